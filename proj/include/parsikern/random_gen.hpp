#pragma once

// Deterministic instance generation: random binary trees by sequential leaf
// attachment, random TBR neighbours, and random characters. Bounded draws use
// rejection sampling on mt19937_64 so outputs are identical across platforms.

#include "parsikern/tree.hpp"

#include <random>

namespace parsikern {

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    int below(int n) {
        if (n <= 0) throw Error("rng: empty range");
        uint64_t lim = UINT64_MAX - UINT64_MAX % (uint64_t)n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= lim);
        return (int)(v % (uint64_t)n);
    }

private:
    std::mt19937_64 gen_;
};

inline std::vector<std::string> default_taxon_names(int n) {
    int width = 1;
    for (int x = n - 1; x >= 10; x /= 10) ++width;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        std::string num = std::to_string(i);
        names.push_back("t" + std::string(width - num.size(), '0') + num);
    }
    return names;
}

// Random binary tree by attaching each new leaf to a uniformly random edge.
inline Tree random_binary_tree(int n, Rng& rng,
                               const std::vector<std::string>& names_in = {}) {
    if (n < 2) throw Error("random tree: need at least 2 leaves");
    auto names = names_in.empty() ? default_taxon_names(n) : names_in;
    if ((int)names.size() != n) throw Error("random tree: name count mismatch");

    std::vector<std::pair<int, int>> edges = {{0, 1}};
    int next = 2;
    for (int leaf = 2; leaf < n; ++leaf) {
        int ei = rng.below((int)edges.size());
        auto [u, v] = edges[ei];
        int mid = next++;
        int lf = next++;
        edges[ei] = {u, mid};
        edges.push_back({mid, v});
        edges.push_back({mid, lf});
    }
    // vertex ids: leaf i of names[i] is vertex i for the first two, then the
    // explicit lf ids; collect labels
    std::vector<std::pair<int, std::string>> labels;
    labels.push_back({0, names[0]});
    labels.push_back({1, names[1]});
    int id = 3; // first attached leaf is vertex 3 (mid=2, lf=3)
    for (int leaf = 2; leaf < n; ++leaf, id += 2) labels.push_back({id, names[leaf]});
    return Tree(next, edges, labels);
}

// One uniformly random TBR move (cut edge, then a random reattach edge in
// each component; single-leaf components reattach at the leaf).
inline Tree random_tbr_neighbor(const Tree& t, Rng& rng) {
    if (t.leaf_count() < 4) throw Error("tbr: tree too small");
    Edge cut = t.edges()[rng.below((int)t.edges().size())];
    std::vector<char> in_u(t.vertex_count(), 0);
    {
        std::queue<int> q;
        q.push(cut.u);
        in_u[cut.u] = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int w : t.neighbors(v)) {
                if (Edge(v, w) == cut) continue;
                if (!in_u[w]) {
                    in_u[w] = 1;
                    q.push(w);
                }
            }
        }
    }
    auto side_edges = [&](bool u_side) {
        std::vector<Edge> out;
        for (const Edge& e : t.edges()) {
            if (e == cut) continue;
            if ((in_u[e.u] != 0) == u_side && (in_u[e.v] != 0) == u_side) out.push_back(e);
        }
        return out;
    };
    auto pick = [&](bool u_side) -> std::optional<Edge> {
        auto es = side_edges(u_side);
        if (es.empty()) return std::nullopt;
        return es[rng.below((int)es.size())];
    };
    return tbr_move(t, cut, pick(true), pick(false));
}

// T1 random; T2 = r random TBR moves applied to T1, so d_TBR(T1,T2) <= r.
inline std::pair<Tree, Tree> gen_random_pair(int n, int moves, uint64_t seed) {
    if (n < 4) throw Error("gen: need n >= 4");
    if (moves < 0) throw Error("gen: moves must be >= 0");
    Rng rng(seed);
    Tree t1 = random_binary_tree(n, rng);
    Tree t2 = t1;
    for (int i = 0; i < moves; ++i) t2 = random_tbr_neighbor(t2, rng);
    return {t1, t2};
}

inline std::vector<int> random_states(int n, int t, Rng& rng) {
    std::vector<int> states(n);
    for (int i = 0; i < n; ++i) states[i] = rng.below(t);
    return states;
}

} // namespace parsikern
