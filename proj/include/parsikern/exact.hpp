#pragma once

// Desk-scale exact oracles: d_MP^t by character enumeration over set
// partitions (restricted growth strings quotient state symmetry), incompatible
// quartet enumeration, agreement-forest validation, and exact d_TBR both by
// partition enumeration and by a branch-and-bound over the quartet-leg hitting
// set ILP.

#include "parsikern/fitch.hpp"
#include "parsikern/tree.hpp"

#include <cstdlib>
#include <thread>

namespace parsikern {

// All set partitions of {0..n-1} into at most max_blocks blocks, as restricted
// growth strings (block of element i = rgs[i], blocks numbered by first
// occurrence).
inline std::vector<std::vector<int8_t>> enumerate_partitions(int n, int max_blocks) {
    std::vector<std::vector<int8_t>> out;
    std::vector<int8_t> rgs(n, 0);
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (i == n) {
            out.push_back(rgs);
            return;
        }
        int lim = std::min(used + 1, max_blocks);
        for (int b = 0; b < lim; ++b) {
            rgs[i] = (int8_t)b;
            rec(i + 1, std::max(used, b + 1));
        }
    };
    if (n > 0 && max_blocks > 0) rec(0, 0);
    return out;
}

struct Quartet {
    std::array<int, 4> taxa; // sorted taxon indices
    QuartetTopology t1, t2;

    friend bool operator<(const Quartet& a, const Quartet& b) { return a.taxa < b.taxa; }
    friend bool operator==(const Quartet& a, const Quartet& b) { return a.taxa == b.taxa; }
};

// All 4-subsets with differing restrictions, sorted.
inline std::vector<Quartet> incompatible_quartets(const Tree& t1, const Tree& t2) {
    require_same_leaf_set(t1, t2);
    int n = t1.leaf_count();
    std::vector<Quartet> out;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
                for (int d = c + 1; d < n; ++d) {
                    std::array<int, 4> q = {a, b, c, d};
                    QuartetTopology r1 = quartet_topology(t1, q);
                    QuartetTopology r2 = quartet_topology(t2, q);
                    if (r1 != r2) out.push_back({q, r1, r2});
                }
    return out;
}

inline int default_dmp_cap(int t) { return (t != kUnboundedStates && t <= 3) ? 10 : 9; }

// d_MP^t by maximizing |l_f(T1) - l_f(T2)| over canonical t-state characters.
// t = kUnboundedStates means no bound (realized as t = n). cap = 0 picks the
// default for t.
inline int dmp_exact(const Tree& t1, const Tree& t2, int t, int cap = 0, int threads = 1) {
    require_same_leaf_set(t1, t2);
    if (t != kUnboundedStates && t < 1) throw Error("dmp_exact: t must be >= 1 or unbounded");
    if (t != kUnboundedStates && t > kMaxStates)
        throw Error("dmp_exact: t > 64 not supported");
    int n = t1.leaf_count();
    if (n <= 3) return 0; // trees on <= 3 taxa are always isomorphic
    if (cap <= 0) cap = default_dmp_cap(t);
    if (n > cap)
        throw CapExceeded("dmp_exact: instance with n=" + std::to_string(n) +
                          " exceeds cap " + std::to_string(cap));
    int teff = (t == kUnboundedStates || t > n) ? n : t;
    auto partitions = enumerate_partitions(n, teff);

    auto score_range = [&](size_t lo, size_t hi) {
        int best = 0;
        Character f;
        f.num_states = teff;
        f.states.resize(n);
        for (size_t i = lo; i < hi; ++i) {
            for (int j = 0; j < n; ++j) f.states[j] = partitions[i][j];
            int d = std::abs(parsimony_score(t1, f) - parsimony_score(t2, f));
            best = std::max(best, d);
        }
        return best;
    };
    if (threads <= 1 || partitions.size() < 64) return score_range(0, partitions.size());

    std::vector<int> results(threads, 0);
    std::vector<std::thread> pool;
    size_t chunk = (partitions.size() + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        size_t lo = std::min(partitions.size(), w * chunk);
        size_t hi = std::min(partitions.size(), lo + chunk);
        pool.emplace_back([&, w, lo, hi] { results[w] = score_range(lo, hi); });
    }
    for (auto& th : pool) th.join();
    int best = 0;
    for (int r : results) best = std::max(best, r);
    return best;
}

// ---------------------------------------------------------------------------
// agreement forests

struct AfReport {
    bool ok = true;
    std::string violation;    // "topology", "t1-edge-disjoint", "t2-edge-disjoint"
    int block_i = -1, block_j = -1;
};

inline void check_partition(const Tree& t, const std::vector<std::vector<int>>& blocks) {
    std::vector<int> all;
    for (auto& b : blocks) {
        if (b.empty()) throw Error("partition has an empty block");
        all.insert(all.end(), b.begin(), b.end());
    }
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size(); ++i)
        if (all[i] != (int)i) throw Error("blocks do not partition the taxon set");
    if ((int)all.size() != t.leaf_count()) throw Error("blocks do not partition the taxon set");
}

inline AfReport is_agreement_forest(const Tree& t1, const Tree& t2,
                                    const std::vector<std::vector<int>>& blocks) {
    require_same_leaf_set(t1, t2);
    check_partition(t1, blocks);
    int k = (int)blocks.size();
    for (int i = 0; i < k; ++i) {
        if (!isomorphic(restrict_to(t1, blocks[i]), restrict_to(t2, blocks[i])))
            return {false, "topology", i, -1};
    }
    auto edge_sets = [&](const Tree& t) {
        std::vector<std::vector<Edge>> es(k);
        for (int i = 0; i < k; ++i)
            if (blocks[i].size() >= 2) es[i] = induced_subtree(t, blocks[i]).host_edges;
        return es;
    };
    auto check_disjoint = [&](const std::vector<std::vector<Edge>>& es, const char* tag,
                              AfReport& rep) {
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                std::vector<Edge> inter;
                std::set_intersection(es[i].begin(), es[i].end(), es[j].begin(), es[j].end(),
                                      std::back_inserter(inter));
                if (!inter.empty()) {
                    rep = {false, tag, i, j};
                    return false;
                }
            }
        return true;
    };
    AfReport rep;
    auto e1 = edge_sets(t1);
    if (!check_disjoint(e1, "t1-edge-disjoint", rep)) return rep;
    auto e2 = edge_sets(t2);
    if (!check_disjoint(e2, "t2-edge-disjoint", rep)) return rep;
    return rep;
}

// Leaf sets of the components of T1 minus the given edges (leafless
// components are dropped).
inline std::vector<std::vector<int>> cut_to_partition(const Tree& t1,
                                                      const std::vector<Edge>& edges) {
    std::set<Edge> cut(edges.begin(), edges.end());
    for (const Edge& e : cut)
        if (t1.edge_id(e) < 0) throw Error("cut_to_partition: edge not in tree");
    int n = t1.vertex_count();
    std::vector<int> comp(n, -1);
    int nc = 0;
    for (int v = 0; v < n; ++v) {
        if (comp[v] >= 0) continue;
        std::queue<int> q;
        q.push(v);
        comp[v] = nc;
        while (!q.empty()) {
            int x = q.front();
            q.pop();
            for (int w : t1.neighbors(x)) {
                if (cut.count(Edge(x, w))) continue;
                if (comp[w] < 0) {
                    comp[w] = nc;
                    q.push(w);
                }
            }
        }
        ++nc;
    }
    std::vector<std::vector<int>> blocks(nc);
    for (int i = 0; i < t1.leaf_count(); ++i) blocks[comp[t1.vertex_of_taxon(i)]].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& b : blocks)
        if (!b.empty()) out.push_back(b);
    std::sort(out.begin(), out.end());
    return out;
}

// Exact d_TBR as (size of a minimum agreement forest) - 1, by enumerating all
// partitions of the taxon set.
inline int dtbr_partition_oracle(const Tree& t1, const Tree& t2, int cap = 8) {
    require_same_leaf_set(t1, t2);
    int n = t1.leaf_count();
    if (n <= 3) return 0;
    if (n > cap)
        throw CapExceeded("dtbr_partition_oracle: instance with n=" + std::to_string(n) +
                          " exceeds cap " + std::to_string(cap));
    auto partitions = enumerate_partitions(n, n);
    int best = n - 1; // all singletons is always an AF
    for (const auto& rgs : partitions) {
        int nb = 0;
        for (int8_t b : rgs) nb = std::max(nb, (int)b + 1);
        if (nb - 1 >= best) continue;
        std::vector<std::vector<int>> blocks(nb);
        for (int i = 0; i < n; ++i) blocks[rgs[i]].push_back(i);
        if (is_agreement_forest(t1, t2, blocks).ok) best = nb - 1;
    }
    return best;
}

// ---------------------------------------------------------------------------
// hitting-set solver: min edges of T1 meeting every incompatible quartet's legs

struct HittingSetResult {
    int value = 0;
    std::vector<Edge> edges;
};

// Edge ids of the two T1-legs of q.
inline std::vector<int> leg_edge_ids(const Tree& t1, const Quartet& q) {
    auto pairs = topology_pairs(q.t1);
    std::vector<int> ids;
    for (auto& pr : pairs) {
        auto p = tree_path(t1, t1.vertex_of_taxon(q.taxa[pr[0]]), t1.vertex_of_taxon(q.taxa[pr[1]]));
        for (const Edge& e : path_edges(p)) ids.push_back(t1.edge_id(e));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace detail {

struct HittingSolver {
    const std::vector<uint64_t>& legs; // one mask per quartet
    int best = 0;
    uint64_t best_mask = 0;

    // greedy packing of leg-disjoint unhit quartets: lower bound on the number
    // of further edges any hitting set needs
    int lower_bound(uint64_t chosen) const {
        uint64_t used = 0;
        int count = 0;
        for (uint64_t L : legs) {
            if (L & chosen) continue;
            if (L & used) continue;
            used |= L;
            ++count;
        }
        return count;
    }

    void dfs(uint64_t chosen, int count) {
        int unhit = -1, unhit_size = 65;
        for (size_t i = 0; i < legs.size(); ++i) {
            if (legs[i] & chosen) continue;
            int sz = __builtin_popcountll(legs[i]);
            if (sz < unhit_size) {
                unhit_size = sz;
                unhit = (int)i;
            }
        }
        if (unhit < 0) {
            if (count < best) {
                best = count;
                best_mask = chosen;
            }
            return;
        }
        if (count + lower_bound(chosen) >= best) return;
        uint64_t L = legs[unhit];
        while (L) {
            uint64_t bit = L & (~L + 1);
            L ^= bit;
            dfs(chosen | bit, count + 1);
        }
    }
};

} // namespace detail

inline HittingSetResult dtbr_hitting_set(const Tree& t1, const Tree& t2, int cap = 16) {
    require_same_leaf_set(t1, t2);
    int n = t1.leaf_count();
    if (n > cap)
        throw CapExceeded("dtbr_hitting_set: instance with n=" + std::to_string(n) +
                          " exceeds cap " + std::to_string(cap));
    auto quartets = incompatible_quartets(t1, t2);
    if (quartets.empty()) return {0, {}};
    if ((int)t1.edges().size() > 64) throw Error("dtbr_hitting_set: too many edges");

    std::vector<uint64_t> legs;
    for (const Quartet& q : quartets) {
        uint64_t m = 0;
        for (int id : leg_edge_ids(t1, q)) m |= 1ull << id;
        legs.push_back(m);
    }
    detail::HittingSolver solver{legs};
    // greedy start: repeatedly add the edge covering the most unhit quartets
    {
        uint64_t chosen = 0;
        int count = 0;
        while (true) {
            std::vector<int> gain(t1.edges().size(), 0);
            bool any = false;
            for (uint64_t L : legs) {
                if (L & chosen) continue;
                any = true;
                uint64_t m = L;
                while (m) {
                    int id = __builtin_ctzll(m);
                    m &= m - 1;
                    ++gain[id];
                }
            }
            if (!any) break;
            int bestid = (int)(std::max_element(gain.begin(), gain.end()) - gain.begin());
            chosen |= 1ull << bestid;
            ++count;
        }
        solver.best = count;
        solver.best_mask = chosen;
    }
    solver.dfs(0, 0);

    HittingSetResult out;
    out.value = solver.best;
    for (size_t id = 0; id < t1.edges().size(); ++id)
        if (solver.best_mask & (1ull << id)) out.edges.push_back(t1.edges()[id]);
    return out;
}

} // namespace parsikern
