#pragma once

// Unrooted leaf-labelled trees with internal degree <= 3, plus the structural
// operations everything else is built on: induced subtrees, restrictions,
// quartet topologies, cherries, chains, sides/pendant decompositions and TBR
// moves. Trees are immutable after construction; all operations are pure.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsikern {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Instance exceeds a configured oracle size cap.
class CapExceeded : public Error {
public:
    using Error::Error;
};

struct Edge {
    int u = -1;
    int v = -1;
    Edge() = default;
    Edge(int a, int b) : u(std::min(a, b)), v(std::max(a, b)) {}
    friend bool operator==(const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }
    friend bool operator!=(const Edge& a, const Edge& b) { return !(a == b); }
    friend bool operator<(const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    }
};

inline bool valid_taxon_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (c == '(' || c == ')' || c == ',' || c == ';' || c == ':' || c == '[' || c == ']')
            return false;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
    }
    return true;
}

class Tree {
public:
    Tree() = default;

    // edges: (u,v) pairs over vertex ids 0..n-1; leaf_labels: (vertex, taxon name).
    Tree(int n_vertices, const std::vector<std::pair<int, int>>& edge_list,
         const std::vector<std::pair<int, std::string>>& leaf_labels) {
        if (n_vertices <= 0) throw Error("tree: needs at least one vertex");
        adj_.assign(n_vertices, {});
        label_.assign(n_vertices, -1);
        if ((int)edge_list.size() != n_vertices - 1)
            throw Error("tree: edge count must be n-1");
        for (auto [u, v] : edge_list) {
            if (u < 0 || u >= n_vertices || v < 0 || v >= n_vertices || u == v)
                throw Error("tree: bad edge");
            adj_[u].push_back(v);
            adj_[v].push_back(u);
            edges_.push_back(Edge(u, v));
        }
        std::sort(edges_.begin(), edges_.end());
        for (size_t i = 1; i < edges_.size(); ++i)
            if (edges_[i] == edges_[i - 1]) throw Error("tree: duplicate edge");

        // connectivity (acyclicity follows from edge count)
        std::vector<char> seen(n_vertices, 0);
        std::queue<int> bfs;
        bfs.push(0);
        seen[0] = 1;
        int reached = 1;
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (int w : adj_[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    bfs.push(w);
                }
        }
        if (reached != n_vertices) throw Error("tree: not connected");

        // taxa: sorted lexicographically, unique
        std::vector<std::pair<std::string, int>> named;
        for (auto& [v, name] : leaf_labels) {
            if (v < 0 || v >= n_vertices) throw Error("tree: label on unknown vertex");
            if (!valid_taxon_name(name)) throw Error("tree: invalid taxon name '" + name + "'");
            named.push_back({name, v});
        }
        std::sort(named.begin(), named.end());
        for (size_t i = 1; i < named.size(); ++i)
            if (named[i].first == named[i - 1].first)
                throw Error("tree: duplicate taxon '" + named[i].first + "'");
        taxon_vertex_.resize(named.size());
        for (size_t i = 0; i < named.size(); ++i) {
            taxa_.push_back(named[i].first);
            taxon_vertex_[i] = named[i].second;
            if (label_[named[i].second] >= 0) throw Error("tree: vertex labelled twice");
            label_[named[i].second] = (int)i;
        }

        // degree constraints
        phylogenetic_ = true;
        for (int v = 0; v < n_vertices; ++v) {
            int d = (int)adj_[v].size();
            if (label_[v] >= 0) {
                if (d > 1) throw Error("tree: labelled vertex with degree > 1");
                if (d == 0 && n_vertices > 1) throw Error("tree: isolated labelled vertex");
            } else {
                if (d <= 1) throw Error("tree: unlabelled vertex with degree <= 1");
                if (d > 3) throw Error("tree: internal degree > 3");
            }
            if (d == 2) phylogenetic_ = false;
        }
        for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    }

    int vertex_count() const { return (int)adj_.size(); }
    int leaf_count() const { return (int)taxa_.size(); }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    int degree(int v) const { return (int)adj_[v].size(); }
    int label_of(int v) const { return label_[v]; }
    bool is_leaf(int v) const { return label_[v] >= 0; }
    const std::string& taxon_name(int t) const { return taxa_[t]; }
    int vertex_of_taxon(int t) const { return taxon_vertex_[t]; }
    const std::vector<std::string>& taxa() const { return taxa_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool phylogenetic() const { return phylogenetic_; }

    std::optional<int> taxon_index(const std::string& name) const {
        auto it = std::lower_bound(taxa_.begin(), taxa_.end(), name);
        if (it == taxa_.end() || *it != name) return std::nullopt;
        return (int)(it - taxa_.begin());
    }

    int edge_id(const Edge& e) const {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) return -1;
        return (int)(it - edges_.begin());
    }
    bool has_edge(int u, int v) const { return edge_id(Edge(u, v)) >= 0; }

    // The unique neighbour of a leaf.
    int parent_of_leaf(int v) const {
        if (!is_leaf(v) || degree(v) != 1) throw Error("tree: parent_of_leaf on non-leaf");
        return adj_[v][0];
    }

private:
    std::vector<std::vector<int>> adj_;
    std::vector<int> label_;
    std::vector<std::string> taxa_;
    std::vector<int> taxon_vertex_;
    std::vector<Edge> edges_;
    bool phylogenetic_ = true;
};

inline bool same_leaf_set(const Tree& a, const Tree& b) { return a.taxa() == b.taxa(); }

inline void require_same_leaf_set(const Tree& a, const Tree& b) {
    if (!same_leaf_set(a, b)) throw Error("trees are not on the same taxon set");
}

// ---------------------------------------------------------------------------
// paths

inline std::vector<int> bfs_parents(const Tree& t, int root) {
    std::vector<int> parent(t.vertex_count(), -1);
    std::vector<char> seen(t.vertex_count(), 0);
    std::queue<int> q;
    q.push(root);
    seen[root] = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : t.neighbors(v))
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = v;
                q.push(w);
            }
    }
    return parent;
}

// Vertex sequence from u to v inclusive.
inline std::vector<int> tree_path(const Tree& t, int u, int v) {
    auto parent = bfs_parents(t, u);
    std::vector<int> path;
    for (int x = v; x != -1; x = parent[x]) {
        path.push_back(x);
        if (x == u) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

inline std::vector<Edge> path_edges(const std::vector<int>& path) {
    std::vector<Edge> es;
    for (size_t i = 0; i + 1 < path.size(); ++i) es.push_back(Edge(path[i], path[i + 1]));
    return es;
}

// The vertex common to all three pairwise paths.
inline int median_vertex(const Tree& t, int a, int b, int c) {
    auto pab = tree_path(t, a, b);
    std::vector<char> on_ab(t.vertex_count(), 0);
    for (int v : pab) on_ab[v] = 1;
    auto pac = tree_path(t, a, c);
    int med = a;
    for (int v : pac)
        if (on_ab[v]) med = v;
    return med;
}

// ---------------------------------------------------------------------------
// induced subtrees and restrictions

struct InducedSubtree {
    Tree tree;                    // dense ids; leaves are exactly Y
    std::vector<int> to_host;     // subtree vertex -> host vertex
    std::vector<int> from_host;   // host vertex -> subtree vertex or -1
    std::vector<Edge> host_edges; // edges of T(Y) in host ids, sorted
};

inline std::vector<int> check_taxon_subset(const Tree& t, std::vector<int> ytaxa) {
    std::sort(ytaxa.begin(), ytaxa.end());
    ytaxa.erase(std::unique(ytaxa.begin(), ytaxa.end()), ytaxa.end());
    if (ytaxa.empty()) throw Error("taxon subset is empty");
    for (int y : ytaxa)
        if (y < 0 || y >= t.leaf_count()) throw Error("taxon subset not within leaf set");
    return ytaxa;
}

inline InducedSubtree induced_subtree(const Tree& t, const std::vector<int>& ytaxa_in) {
    auto ytaxa = check_taxon_subset(t, ytaxa_in);
    int root = t.vertex_of_taxon(ytaxa[0]);
    auto parent = bfs_parents(t, root);
    std::vector<char> mark(t.vertex_count(), 0);
    mark[root] = 1;
    std::vector<Edge> hedges;
    for (int y : ytaxa) {
        int v = t.vertex_of_taxon(y);
        while (!mark[v]) {
            mark[v] = 1;
            hedges.push_back(Edge(v, parent[v]));
            v = parent[v];
        }
    }
    std::sort(hedges.begin(), hedges.end());

    InducedSubtree out;
    out.from_host.assign(t.vertex_count(), -1);
    for (int v = 0; v < t.vertex_count(); ++v)
        if (mark[v]) {
            out.from_host[v] = (int)out.to_host.size();
            out.to_host.push_back(v);
        }
    std::vector<std::pair<int, int>> es;
    for (const Edge& e : hedges) es.push_back({out.from_host[e.u], out.from_host[e.v]});
    std::vector<std::pair<int, std::string>> labels;
    for (int y : ytaxa) labels.push_back({out.from_host[t.vertex_of_taxon(y)], t.taxon_name(y)});
    out.tree = Tree((int)out.to_host.size(), es, labels);
    out.host_edges = hedges;
    return out;
}

// Contract away unlabelled degree-2 vertices.
inline Tree suppress_degree2(const Tree& t) {
    int n = t.vertex_count();
    std::vector<char> keep(n, 0);
    for (int v = 0; v < n; ++v) keep[v] = (t.label_of(v) >= 0 || t.degree(v) != 2);
    std::set<Edge> new_edges;
    std::vector<int> dense(n, -1);
    int m = 0;
    for (int v = 0; v < n; ++v)
        if (keep[v]) dense[v] = m++;
    for (int v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        for (int w : t.neighbors(v)) {
            int prev = v, cur = w;
            while (!keep[cur]) {
                int nxt = (t.neighbors(cur)[0] == prev) ? t.neighbors(cur)[1] : t.neighbors(cur)[0];
                prev = cur;
                cur = nxt;
            }
            new_edges.insert(Edge(dense[v], dense[cur]));
        }
    }
    std::vector<std::pair<int, int>> es;
    for (const Edge& e : new_edges) es.push_back({e.u, e.v});
    std::vector<std::pair<int, std::string>> labels;
    for (int v = 0; v < n; ++v)
        if (keep[v] && t.label_of(v) >= 0) labels.push_back({dense[v], t.taxon_name(t.label_of(v))});
    return Tree(m, es, labels);
}

// T|_Y: induced subtree with degree-2 vertices suppressed.
inline Tree restrict_to(const Tree& t, const std::vector<int>& ytaxa) {
    return suppress_degree2(induced_subtree(t, ytaxa).tree);
}

// ---------------------------------------------------------------------------
// canonical form, isomorphism, write order

namespace detail {

// Serialization rooted at v coming from parent; children sorted by the
// smallest taxon they contain. Returns (newick, min taxon index).
inline std::pair<std::string, int> canon_subtree(const Tree& t, int v, int parent) {
    if (t.label_of(v) >= 0) return {t.taxon_name(t.label_of(v)), t.label_of(v)};
    std::vector<std::pair<int, std::string>> kids;
    for (int w : t.neighbors(v)) {
        if (w == parent) continue;
        auto [s, mt] = canon_subtree(t, w, v);
        kids.push_back({mt, s});
    }
    std::sort(kids.begin(), kids.end());
    std::string out = "(";
    for (size_t i = 0; i < kids.size(); ++i) {
        if (i) out += ",";
        out += kids[i].second;
    }
    out += ")";
    return {out, kids[0].first};
}

inline int min_taxon_in_component(const Tree& t, int v, int banned) {
    int best = t.leaf_count();
    std::vector<char> seen(t.vertex_count(), 0);
    seen[banned] = 1;
    std::queue<int> q;
    q.push(v);
    seen[v] = 1;
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        if (t.label_of(x) >= 0) best = std::min(best, t.label_of(x));
        for (int w : t.neighbors(x))
            if (!seen[w]) {
                seen[w] = 1;
                q.push(w);
            }
    }
    return best;
}

} // namespace detail

// Deterministic canonical Newick: rooted on the edge between the parent p of
// the smallest taxon and the neighbour of p whose component holds the
// lexicographically greatest minimal taxon; children sorted by smallest taxon.
inline std::string canonical_newick(const Tree& t) {
    if (t.vertex_count() == 1) return t.taxon_name(0) + ";";
    int leaf0 = t.vertex_of_taxon(0);
    int p = t.parent_of_leaf(leaf0);
    int q = -1, best = -1;
    for (int w : t.neighbors(p)) {
        if (w == leaf0) continue;
        int mt = detail::min_taxon_in_component(t, w, p);
        if (mt > best) {
            best = mt;
            q = w;
        }
    }
    if (q < 0) { // two-vertex tree
        return "(" + t.taxon_name(0) + "," + t.taxon_name(t.label_of(p)) + ");";
    }
    auto left = detail::canon_subtree(t, p, q);
    auto right = detail::canon_subtree(t, q, p);
    return "(" + left.first + "," + right.first + ");";
}

inline bool isomorphic(const Tree& a, const Tree& b) {
    if (a.taxa() != b.taxa()) return false;
    return canonical_newick(a) == canonical_newick(b);
}

// ---------------------------------------------------------------------------
// quartets

enum class QuartetTopology { AB_CD, AC_BD, AD_BC };

inline const char* topology_tag(QuartetTopology q) {
    switch (q) {
    case QuartetTopology::AB_CD: return "01|23";
    case QuartetTopology::AC_BD: return "02|13";
    default: return "03|12";
    }
}

// Pairs of positions (into the sorted 4-set) forming the two legs.
inline std::array<std::array<int, 2>, 2> topology_pairs(QuartetTopology q) {
    switch (q) {
    case QuartetTopology::AB_CD: return {{{0, 1}, {2, 3}}};
    case QuartetTopology::AC_BD: return {{{0, 2}, {1, 3}}};
    default: return {{{0, 3}, {1, 2}}};
    }
}

// Resolution of a 4-taxon set via path disjointness.
inline QuartetTopology quartet_topology(const Tree& t, std::array<int, 4> q) {
    std::sort(q.begin(), q.end());
    if (q[0] == q[1] || q[1] == q[2] || q[2] == q[3]) throw Error("quartet: repeated taxon");
    std::array<int, 4> v;
    for (int i = 0; i < 4; ++i) {
        if (q[i] < 0 || q[i] >= t.leaf_count()) throw Error("quartet: taxon not in tree");
        v[i] = t.vertex_of_taxon(q[i]);
    }
    const QuartetTopology all[3] = {QuartetTopology::AB_CD, QuartetTopology::AC_BD,
                                    QuartetTopology::AD_BC};
    for (QuartetTopology cand : all) {
        auto pr = topology_pairs(cand);
        auto p1 = tree_path(t, v[pr[0][0]], v[pr[0][1]]);
        auto p2 = tree_path(t, v[pr[1][0]], v[pr[1][1]]);
        std::vector<char> on(t.vertex_count(), 0);
        for (int x : p1) on[x] = 1;
        bool disjoint = true;
        for (int x : p2)
            if (on[x]) {
                disjoint = false;
                break;
            }
        if (disjoint) return cand;
    }
    throw Error("quartet: unresolved (internal error for binary trees)");
}

// ---------------------------------------------------------------------------
// cherries

inline std::vector<std::pair<int, int>> cherries(const Tree& t) {
    std::map<int, std::vector<int>> by_parent;
    if (t.vertex_count() < 3) return {};
    for (int i = 0; i < t.leaf_count(); ++i)
        by_parent[t.parent_of_leaf(t.vertex_of_taxon(i))].push_back(i);
    std::vector<std::pair<int, int>> out;
    for (auto& [p, leaves] : by_parent)
        for (size_t i = 0; i < leaves.size(); ++i)
            for (size_t j = i + 1; j < leaves.size(); ++j)
                out.push_back({leaves[i], leaves[j]});
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::pair<int, int>> common_cherries(const Tree& t1, const Tree& t2) {
    require_same_leaf_set(t1, t2);
    auto c1 = cherries(t1);
    auto c2 = cherries(t2);
    std::vector<std::pair<int, int>> out;
    std::set_intersection(c1.begin(), c1.end(), c2.begin(), c2.end(), std::back_inserter(out));
    return out;
}

// ---------------------------------------------------------------------------
// chains

struct Chain {
    std::vector<int> leaves; // taxon indices in chain order
    bool pendant_first = false;
    bool pendant_last = false;
};

// Chain of T1 and T2 simultaneously; pendant status is tracked per tree since
// a common chain may be pendant in one tree only.
struct CommonChain {
    std::vector<int> leaves;
    bool pendant_first_t1 = false, pendant_last_t1 = false;
    bool pendant_first_t2 = false, pendant_last_t2 = false;
    int length() const { return (int)leaves.size(); }
};

// Is the leaf sequence a chain in t? Parents must form a path; equal
// consecutive parents only at the first and last pair.
inline std::optional<std::pair<bool, bool>> chain_in_tree(const Tree& t,
                                                          const std::vector<int>& leaves) {
    int k = (int)leaves.size();
    if (k < 2) return std::nullopt;
    std::vector<int> par(k);
    for (int i = 0; i < k; ++i) {
        int v = t.vertex_of_taxon(leaves[i]);
        if (t.degree(v) != 1) return std::nullopt;
        par[i] = t.parent_of_leaf(v);
    }
    for (int i = 0; i + 1 < k; ++i)
        if (par[i] == par[i + 1] && i != 0 && i != k - 2) return std::nullopt;
    std::vector<int> distinct;
    for (int i = 0; i < k; ++i)
        if (distinct.empty() || distinct.back() != par[i]) distinct.push_back(par[i]);
    std::set<int> uniq(distinct.begin(), distinct.end());
    if (uniq.size() != distinct.size()) return std::nullopt;
    for (size_t i = 0; i + 1 < distinct.size(); ++i)
        if (!t.has_edge(distinct[i], distinct[i + 1])) return std::nullopt;
    return std::make_pair(par[0] == par[1], par[k - 2] == par[k - 1]);
}

namespace detail {

// A chain pendant at an end in both trees admits either order of the end
// cherry; normalize so each reported chain has one canonical sequence.
inline std::vector<int> canonical_chain_form(const Tree& t1, const Tree& t2,
                                             const std::vector<int>& leaves) {
    auto normalize = [&](std::vector<int> s) {
        int k = (int)s.size();
        auto f1 = chain_in_tree(t1, s);
        auto f2 = chain_in_tree(t2, s);
        if (f1->first && f2->first && s[0] > s[1]) std::swap(s[0], s[1]);
        if (f1->second && f2->second && s[k - 2] > s[k - 1]) std::swap(s[k - 2], s[k - 1]);
        return s;
    };
    std::vector<int> fwd = normalize(leaves);
    std::vector<int> rev(leaves.rbegin(), leaves.rend());
    rev = normalize(rev);
    return std::min(fwd, rev);
}

} // namespace detail

// Maximal common chains of length >= 4 (shorter ones degenerate to cherry or
// adjacency artifacts); overlapping maximal chains are all reported.
inline std::vector<CommonChain> common_chains(const Tree& t1, const Tree& t2) {
    require_same_leaf_set(t1, t2);
    int n = t1.leaf_count();
    auto is_common = [&](const std::vector<int>& s) {
        return chain_in_tree(t1, s) && chain_in_tree(t2, s);
    };
    std::set<std::vector<int>> results;
    std::set<std::vector<int>> visited;

    std::vector<std::vector<int>> stack;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (x == y) continue;
            std::vector<int> s = {x, y};
            if (is_common(s)) stack.push_back(s);
        }
    while (!stack.empty()) {
        auto s = stack.back();
        stack.pop_back();
        if (visited.count(s)) continue;
        visited.insert(s);
        std::vector<char> used(n, 0);
        for (int l : s) used[l] = 1;
        bool extended = false, front_ext = false;
        for (int w = 0; w < n; ++w) {
            if (used[w]) continue;
            std::vector<int> back = s;
            back.push_back(w);
            if (is_common(back)) {
                extended = true;
                stack.push_back(back);
            }
            std::vector<int> front = {w};
            front.insert(front.end(), s.begin(), s.end());
            if (is_common(front)) front_ext = true;
        }
        if (!extended && !front_ext && (int)s.size() >= 4)
            results.insert(detail::canonical_chain_form(t1, t2, s));
    }
    std::vector<CommonChain> out;
    for (const auto& leaves : results) {
        CommonChain c;
        c.leaves = leaves;
        auto f1 = chain_in_tree(t1, leaves);
        auto f2 = chain_in_tree(t2, leaves);
        c.pendant_first_t1 = f1->first;
        c.pendant_last_t1 = f1->second;
        c.pendant_first_t2 = f2->first;
        c.pendant_last_t2 = f2->second;
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// sides and pendant subtrees of T(Xp) in T

struct Side {
    std::vector<int> vertices; // host ids: endpoint, interiors..., endpoint
};

struct Pendant {
    int attach = -1;           // vertex of T(Xp) the subtree hangs off
    int root = -1;             // vertex of the pendant subtree adjacent to attach
    std::vector<int> vertices; // all pendant vertices, sorted host ids
};

struct SidesPendants {
    std::vector<Side> sides;
    std::vector<Pendant> pendants;
    std::vector<char> in_subtree; // host vertex -> belongs to T(Xp)
};

inline SidesPendants sides_and_pendants(const Tree& t, const std::vector<int>& xptaxa_in) {
    auto xptaxa = check_taxon_subset(t, xptaxa_in);
    if (xptaxa.size() < 2) throw Error("sides_and_pendants: need at least 2 taxa");
    auto ind = induced_subtree(t, xptaxa);
    SidesPendants out;
    out.in_subtree.assign(t.vertex_count(), 0);
    for (int hv : ind.to_host) out.in_subtree[hv] = 1;

    std::vector<std::vector<int>> sub_adj(t.vertex_count());
    for (const Edge& e : ind.host_edges) {
        sub_adj[e.u].push_back(e.v);
        sub_adj[e.v].push_back(e.u);
    }
    for (auto& v : sub_adj) std::sort(v.begin(), v.end());

    auto subdeg = [&](int v) { return (int)sub_adj[v].size(); };
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (!out.in_subtree[v] || subdeg(v) == 2) continue;
        for (int w : sub_adj[v]) {
            std::vector<int> side = {v};
            int prev = v, cur = w;
            while (subdeg(cur) == 2) {
                side.push_back(cur);
                int nxt = (sub_adj[cur][0] == prev) ? sub_adj[cur][1] : sub_adj[cur][0];
                prev = cur;
                cur = nxt;
            }
            side.push_back(cur);
            if (side.front() < side.back() ||
                (side.front() == side.back() && side[1] < side[side.size() - 2]))
                out.sides.push_back({side});
        }
    }
    std::sort(out.sides.begin(), out.sides.end(),
              [](const Side& a, const Side& b) { return a.vertices < b.vertices; });

    std::vector<char> seen(t.vertex_count(), 0);
    for (int v = 0; v < t.vertex_count(); ++v) {
        if (out.in_subtree[v] || seen[v]) continue;
        // flood the component, remembering the unique edge into T(Xp)
        std::vector<int> comp;
        std::queue<int> q;
        q.push(v);
        seen[v] = 1;
        int attach = -1, root = -1;
        while (!q.empty()) {
            int x = q.front();
            q.pop();
            comp.push_back(x);
            for (int w : t.neighbors(x)) {
                if (out.in_subtree[w]) {
                    attach = w;
                    root = x;
                } else if (!seen[w]) {
                    seen[w] = 1;
                    q.push(w);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.pendants.push_back({attach, root, comp});
    }
    std::sort(out.pendants.begin(), out.pendants.end(), [](const Pendant& a, const Pendant& b) {
        return std::tie(a.attach, a.root) < std::tie(b.attach, b.root);
    });
    return out;
}

// ---------------------------------------------------------------------------
// TBR moves

// Cut cut_edge, subdivide reattach_u in the component of cut_edge.u and
// reattach_v in the component of cut_edge.v, join the subdivision points,
// suppress the degree-2 remnants. A single-leaf component takes no reattach
// edge (pass nullopt).
inline Tree tbr_move(const Tree& t, Edge cut_edge, std::optional<Edge> reattach_u,
                     std::optional<Edge> reattach_v) {
    if (t.edge_id(cut_edge) < 0) throw Error("tbr: cut edge not in tree");
    // component of u after the cut
    std::vector<char> in_u(t.vertex_count(), 0);
    {
        std::queue<int> q;
        q.push(cut_edge.u);
        in_u[cut_edge.u] = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int w : t.neighbors(v)) {
                if (v == cut_edge.u && w == cut_edge.v) continue;
                if (v == cut_edge.v && w == cut_edge.u) continue;
                if (!in_u[w]) {
                    in_u[w] = 1;
                    q.push(w);
                }
            }
        }
    }
    auto check_side = [&](const std::optional<Edge>& re, int anchor, bool side_u) {
        bool single = true;
        for (int v = 0; v < t.vertex_count(); ++v)
            if ((in_u[v] != 0) == side_u && v != anchor) single = false;
        if (single) {
            if (re) throw Error("tbr: leaf component takes no reattach edge");
            return;
        }
        if (!re) throw Error("tbr: reattach edge required for non-leaf component");
        if (t.edge_id(*re) < 0) throw Error("tbr: reattach edge not in tree");
        if (*re == cut_edge) throw Error("tbr: reattach edge in wrong component");
        if ((in_u[re->u] != 0) != side_u || (in_u[re->v] != 0) != side_u)
            throw Error("tbr: reattach edge in wrong component");
    };
    check_side(reattach_u, cut_edge.u, true);
    check_side(reattach_v, cut_edge.v, false);

    std::vector<std::pair<int, int>> es;
    for (const Edge& e : t.edges())
        if (e != cut_edge) es.push_back({e.u, e.v});
    int next = t.vertex_count();
    auto subdivide = [&](const Edge& e) {
        for (auto& pr : es)
            if (Edge(pr.first, pr.second) == e) {
                int nu = next++;
                int keep = pr.first;
                pr = {keep, nu};
                es.push_back({nu, e.u == keep ? e.v : e.u});
                return nu;
            }
        throw Error("tbr: internal error");
    };
    int up = reattach_u ? subdivide(*reattach_u) : cut_edge.u;
    int vp = reattach_v ? subdivide(*reattach_v) : cut_edge.v;
    es.push_back({up, vp});

    std::vector<std::pair<int, std::string>> labels;
    for (int i = 0; i < t.leaf_count(); ++i) labels.push_back({t.vertex_of_taxon(i), t.taxon_name(i)});
    Tree raw(next, es, labels); // may contain degree-2 remnants of the cut
    return suppress_degree2(raw);
}

// ---------------------------------------------------------------------------
// misc

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string tree_hash(const Tree& t) {
    static const char* hexd = "0123456789abcdef";
    uint64_t h = fnv1a64(canonical_newick(t));
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hexd[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace parsikern
