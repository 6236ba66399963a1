#pragma once

// Fitch–Hartigan small parsimony: candidate-set maps, optimal extensions,
// parsimonious extensions from induced subtrees, and a brute-force oracle.
// Candidate sets are 64-bit sets, so at most 64 states. Fitch runs directly on
// trees with degree-2 vertices (such a vertex copies its single child's set),
// which lets T(Y) be scored without suppression.

#include "parsikern/tree.hpp"

#include <cstdint>
#include <functional>
#include <limits>

namespace parsikern {

constexpr int kUnboundedStates = -1;
constexpr int kMaxStates = 64;

// States of every taxon of a specific tree, aligned with its taxa() order.
struct Character {
    std::vector<int> states;
    int num_states = kUnboundedStates; // declared bound t, or kUnboundedStates

    int distinct_states() const {
        std::set<int> s(states.begin(), states.end());
        return (int)s.size();
    }
};

inline void check_character(const Tree& t, const Character& f) {
    if ((int)f.states.size() != t.leaf_count())
        throw Error("character does not cover the leaf set");
    int bound = f.num_states == kUnboundedStates ? kMaxStates : f.num_states;
    if (bound > kMaxStates) throw Error("more than 64 states are not supported");
    for (int s : f.states)
        if (s < 0 || s >= bound) throw Error("character state out of range");
}

// Vertex states for every vertex of a specific tree.
using Extension = std::vector<int>;

enum class FitchKind : uint8_t { Leaf, Pass, Union, Intersection };

struct FitchMap {
    Edge root_edge;
    std::vector<uint64_t> set;    // candidate sets per original vertex
    std::vector<FitchKind> kind;  // classification per original vertex
    std::vector<int> parent;      // parent per vertex; -1 for the two root children
    std::vector<int> order;       // children-before-parents order
    uint64_t root_set = 0;        // synthetic root on the subdivided root_edge
    FitchKind root_kind = FitchKind::Intersection;
    int union_count = 0;          // unions including the synthetic root
};

inline Edge default_root_edge(const Tree& t) {
    if (t.edges().empty()) throw Error("fitch: tree has no edges");
    int v = t.vertex_of_taxon(0);
    return Edge(v, t.parent_of_leaf(v));
}

inline FitchMap fitch_map(const Tree& t, const Character& f, Edge root_edge) {
    check_character(t, f);
    if (t.edge_id(root_edge) < 0) throw Error("fitch: root edge not in tree");
    int n = t.vertex_count();
    FitchMap m;
    m.root_edge = root_edge;
    m.set.assign(n, 0);
    m.kind.assign(n, FitchKind::Leaf);
    m.parent.assign(n, -1);

    // orient away from the subdivided root edge
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(root_edge.u);
    q.push(root_edge.v);
    seen[root_edge.u] = seen[root_edge.v] = 1;
    std::vector<int> bfs_order;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        bfs_order.push_back(v);
        for (int w : t.neighbors(v)) {
            if (v == root_edge.u && w == root_edge.v) continue;
            if (v == root_edge.v && w == root_edge.u) continue;
            if (!seen[w]) {
                seen[w] = 1;
                m.parent[w] = v;
                q.push(w);
            }
        }
    }
    m.order.assign(bfs_order.rbegin(), bfs_order.rend());

    for (int v : m.order) {
        if (t.label_of(v) >= 0) {
            m.set[v] = 1ull << f.states[t.label_of(v)];
            m.kind[v] = FitchKind::Leaf;
            continue;
        }
        std::vector<int> kids;
        for (int w : t.neighbors(v))
            if (m.parent[w] == v) kids.push_back(w);
        if (kids.size() == 1) {
            m.set[v] = m.set[kids[0]];
            m.kind[v] = FitchKind::Pass;
        } else if (kids.size() == 2) {
            uint64_t inter = m.set[kids[0]] & m.set[kids[1]];
            if (inter) {
                m.set[v] = inter;
                m.kind[v] = FitchKind::Intersection;
            } else {
                m.set[v] = m.set[kids[0]] | m.set[kids[1]];
                m.kind[v] = FitchKind::Union;
                ++m.union_count;
            }
        } else {
            throw Error("fitch: vertex with more than two children");
        }
    }
    uint64_t inter = m.set[root_edge.u] & m.set[root_edge.v];
    if (inter) {
        m.root_set = inter;
        m.root_kind = FitchKind::Intersection;
    } else {
        m.root_set = m.set[root_edge.u] | m.set[root_edge.v];
        m.root_kind = FitchKind::Union;
        ++m.union_count;
    }
    return m;
}

// l_f(T): number of union vertices; independent of the root edge.
inline int parsimony_score(const Tree& t, const Character& f) {
    check_character(t, f);
    if (t.vertex_count() == 1) return 0;
    return fitch_map(t, f, default_root_edge(t)).union_count;
}

inline int lowest_state(uint64_t set) {
    for (int s = 0; s < kMaxStates; ++s)
        if (set & (1ull << s)) return s;
    throw Error("fitch: empty candidate set");
}

// Top-down phase; free choices resolve to the smallest state index. The
// synthetic root is suppressed, which leaves the mutation count unchanged.
inline Extension fitch_extension(const Tree& t, const Character& f, Edge root_edge) {
    FitchMap m = fitch_map(t, f, root_edge);
    Extension ext(t.vertex_count(), -1);
    int rstate = lowest_state(m.root_set);
    auto assign = [&](int v, int parent_state) {
        if (parent_state >= 0 && (m.set[v] & (1ull << parent_state)))
            ext[v] = parent_state;
        else
            ext[v] = lowest_state(m.set[v]);
    };
    assign(root_edge.u, rstate);
    assign(root_edge.v, rstate);
    for (auto it = m.order.rbegin(); it != m.order.rend(); ++it) {
        int v = *it;
        if (m.parent[v] < 0) continue;
        assign(v, ext[m.parent[v]]);
    }
    return ext;
}

inline Extension fitch_extension(const Tree& t, const Character& f) {
    return fitch_extension(t, f, default_root_edge(t));
}

inline int mutation_count(const Tree& t, const Extension& e) {
    if ((int)e.size() != t.vertex_count()) throw Error("extension does not cover the tree");
    for (int s : e)
        if (s < 0) throw Error("extension has unassigned vertices");
    int count = 0;
    for (const Edge& ed : t.edges())
        if (e[ed.u] != e[ed.v]) ++count;
    return count;
}

// Extend a labelling of T(Y) to T: every vertex outside T(Y) takes the state
// of the nearest T(Y)-vertex. Mutation counts agree between T(Y) and T.
inline Extension parsimonious_extension(const Tree& t, const InducedSubtree& sub,
                                        const Extension& fbar_on_sub) {
    if ((int)fbar_on_sub.size() != sub.tree.vertex_count())
        throw Error("parsimonious_extension: labelling does not cover T(Y)");
    Extension ext(t.vertex_count(), -1);
    std::queue<int> q;
    for (int sv = 0; sv < sub.tree.vertex_count(); ++sv) {
        if (fbar_on_sub[sv] < 0) throw Error("parsimonious_extension: incomplete labelling");
        ext[sub.to_host[sv]] = fbar_on_sub[sv];
        q.push(sub.to_host[sv]);
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : t.neighbors(v))
            if (ext[w] < 0) {
                ext[w] = ext[v];
                q.push(w);
            }
    }
    return ext;
}

// Exact minimum over all extensions by exhaustive enumeration; only states
// used by f are enumerated (an optimal extension never needs others).
inline int brute_force_parsimony_oracle(const Tree& t, const Character& f,
                                        int internal_cap = 12, int state_cap = 12) {
    check_character(t, f);
    std::vector<int> internal;
    for (int v = 0; v < t.vertex_count(); ++v)
        if (t.label_of(v) < 0) internal.push_back(v);
    std::set<int> used(f.states.begin(), f.states.end());
    std::vector<int> states(used.begin(), used.end());
    if ((int)internal.size() > internal_cap)
        throw CapExceeded("brute force oracle: too many internal vertices (use Fitch instead)");
    if ((int)states.size() > state_cap)
        throw CapExceeded("brute force oracle: too many states");

    Extension ext(t.vertex_count(), -1);
    for (int i = 0; i < t.leaf_count(); ++i) ext[t.vertex_of_taxon(i)] = f.states[i];
    int m = (int)internal.size();
    std::vector<int> odo(m, 0);
    int best = std::numeric_limits<int>::max();
    while (true) {
        for (int i = 0; i < m; ++i) ext[internal[i]] = states[odo[i]];
        best = std::min(best, mutation_count(t, ext));
        int i = 0;
        for (; i < m; ++i) {
            if (++odo[i] < (int)states.size()) break;
            odo[i] = 0;
        }
        if (i == m) break;
        if (m == 0) break;
    }
    return best;
}

} // namespace parsikern
