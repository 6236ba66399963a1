#include "parsikern/fitch.hpp"
#include "parsikern/newick.hpp"
#include "parsikern/random_gen.hpp"

#include <doctest.h>

using namespace parsikern;

namespace {

Tree T(const std::string& nwk) { return parse_newick(nwk); }

Character chr(std::vector<int> states, int t = kUnboundedStates) {
    Character f;
    f.states = std::move(states);
    f.num_states = t;
    return f;
}

} // namespace

TEST_CASE("brute force parsimony oracle") {
    Tree q4 = T("((a,b),(c,d));");
    CHECK(brute_force_parsimony_oracle(q4, chr({0, 0, 0, 0})) == 0);
    CHECK(brute_force_parsimony_oracle(q4, chr({0, 0, 1, 1})) == 1);
    CHECK(brute_force_parsimony_oracle(q4, chr({0, 1, 0, 1})) == 2);
    SUBCASE("cap is enforced") {
        Rng rng(1);
        Tree big = random_binary_tree(20, rng);
        Character f = chr(random_states(20, 2, rng));
        CHECK_THROWS_AS(brute_force_parsimony_oracle(big, f), CapExceeded);
    }
}

TEST_CASE("fitch map classification") {
    SUBCASE("constant character: all intersection, singleton sets") {
        Tree q4 = T("((a,b),(c,d));");
        Character f = chr({0, 0, 0, 0});
        FitchMap m = fitch_map(q4, f, default_root_edge(q4));
        CHECK(m.union_count == 0);
        for (int v = 0; v < q4.vertex_count(); ++v)
            if (q4.label_of(v) < 0) {
                CHECK(m.kind[v] == FitchKind::Intersection);
                CHECK(m.set[v] == 1ull);
            }
    }
    SUBCASE("alternating character on ab|cd rooted on the backbone") {
        Tree q4 = T("((a,b),(c,d));");
        Character f = chr({0, 1, 0, 1});
        // backbone edge: between the two internal vertices
        Edge backbone(-1, -1);
        for (const Edge& e : q4.edges())
            if (q4.label_of(e.u) < 0 && q4.label_of(e.v) < 0) backbone = e;
        FitchMap m = fitch_map(q4, f, backbone);
        CHECK(m.kind[backbone.u] == FitchKind::Union);
        CHECK(m.kind[backbone.v] == FitchKind::Union);
        CHECK(m.root_kind == FitchKind::Intersection);
        CHECK(m.union_count == 2);
    }
    SUBCASE("same character on ac|bd: cherry parents intersect, root unions") {
        Tree t = T("((a,c),(b,d));");
        // states by taxon index a,b,c,d
        Character f = chr({0, 1, 0, 1});
        Edge backbone(-1, -1);
        for (const Edge& e : t.edges())
            if (t.label_of(e.u) < 0 && t.label_of(e.v) < 0) backbone = e;
        FitchMap m = fitch_map(t, f, backbone);
        CHECK(m.kind[backbone.u] == FitchKind::Intersection);
        CHECK(m.kind[backbone.v] == FitchKind::Intersection);
        CHECK(m.root_kind == FitchKind::Union);
        CHECK(m.union_count == 1);
    }
}

TEST_CASE("parsimony score") {
    Tree q4 = T("((a,b),(c,d));");
    Tree q4x = T("((a,c),(b,d));");
    CHECK(parsimony_score(q4, chr({0, 0, 0, 0})) == 0);
    CHECK(parsimony_score(q4, chr({0, 1, 0, 1})) == 2);
    CHECK(parsimony_score(q4x, chr({0, 1, 0, 1})) == 1);

    SUBCASE("root independence") {
        Rng rng(41);
        for (int it = 0; it < 20; ++it) {
            Tree t = random_binary_tree(4 + rng.below(5), rng);
            Character f = chr(random_states(t.leaf_count(), 1 + rng.below(4), rng));
            FitchMap ref = fitch_map(t, f, default_root_edge(t));
            for (const Edge& e : t.edges())
                CHECK(fitch_map(t, f, e).union_count == ref.union_count);
        }
    }
    SUBCASE("agrees with the brute force oracle on random instances") {
        Rng rng(42);
        for (int it = 0; it < 200; ++it) {
            int n = 4 + rng.below(4); // n <= 7
            Tree t = random_binary_tree(n, rng);
            Character f = chr(random_states(n, 1 + rng.below(4), rng));
            CHECK(parsimony_score(t, f) == brute_force_parsimony_oracle(t, f));
        }
    }
    SUBCASE("state renaming leaves the score unchanged") {
        Rng rng(43);
        for (int it = 0; it < 30; ++it) {
            int n = 4 + rng.below(5);
            Tree t = random_binary_tree(n, rng);
            int k = 2 + rng.below(3);
            Character f = chr(random_states(n, k, rng));
            std::vector<int> perm(k);
            for (int i = 0; i < k; ++i) perm[i] = i;
            for (int i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
            Character g = f;
            for (int& s : g.states) s = perm[s];
            CHECK(parsimony_score(t, f) == parsimony_score(t, g));
        }
    }
}

TEST_CASE("fitch extension") {
    Tree q4 = T("((a,b),(c,d));");
    SUBCASE("constant character gives the constant extension") {
        Extension e = fitch_extension(q4, chr({1, 1, 1, 1}));
        for (int s : e) CHECK(s == 1);
        CHECK(mutation_count(q4, e) == 0);
    }
    SUBCASE("extension agrees with the character on leaves") {
        Character f = chr({0, 1, 0, 1});
        Extension e = fitch_extension(q4, f);
        for (int i = 0; i < 4; ++i) CHECK(e[q4.vertex_of_taxon(i)] == f.states[i]);
        CHECK(mutation_count(q4, e) == 2);
    }
    SUBCASE("achieves the parsimony score on random instances") {
        Rng rng(44);
        for (int it = 0; it < 100; ++it) {
            int n = 4 + rng.below(6);
            Tree t = random_binary_tree(n, rng);
            Character f = chr(random_states(n, 1 + rng.below(4), rng));
            Extension e = fitch_extension(t, f);
            CHECK(mutation_count(t, e) == parsimony_score(t, f));
        }
    }
}

TEST_CASE("mutation count") {
    // alternating states along a path of m edges mutate on every edge
    Tree path = T("(a,b);");
    CHECK(mutation_count(path, {0, 1}) == 1);
    Tree star = T("(a,b,c);");
    CHECK(mutation_count(star, {0, 0, 0, 0}) == 0);
    CHECK_THROWS_AS(mutation_count(star, {0, 0, 0}), Error);
    CHECK_THROWS_AS(mutation_count(star, {0, 0, 0, -1}), Error);
}

TEST_CASE("parsimonious extension") {
    Tree cat = T("((a,b),(c,(d,(e,f))));");
    SUBCASE("full leaf set is the identity") {
        std::vector<int> all = {0, 1, 2, 3, 4, 5};
        auto ind = induced_subtree(cat, all);
        Extension fbar(ind.tree.vertex_count(), 0);
        fbar[0] = 1;
        Extension ext = parsimonious_extension(cat, ind, fbar);
        for (int sv = 0; sv < ind.tree.vertex_count(); ++sv)
            CHECK(ext[ind.to_host[sv]] == fbar[sv]);
    }
    SUBCASE("mutation counts transfer from T(Y) to T") {
        Rng rng(45);
        for (int it = 0; it < 50; ++it) {
            int n = 5 + rng.below(5);
            Tree t = random_binary_tree(n, rng);
            std::vector<int> y;
            for (int i = 0; i < n; ++i)
                if (rng.below(2)) y.push_back(i);
            while (y.size() < 2) y.push_back(rng.below(n));
            auto ind = induced_subtree(t, y);
            Extension fbar(ind.tree.vertex_count());
            for (int& s : fbar) s = rng.below(3);
            Extension ext = parsimonious_extension(t, ind, fbar);
            int in_sub = 0;
            for (const Edge& e : ind.tree.edges())
                if (fbar[e.u] != fbar[e.v]) ++in_sub;
            CHECK(mutation_count(t, ext) == in_sub);
        }
    }
    SUBCASE("constant labelling extends to the constant extension") {
        auto ind = induced_subtree(cat, {0, 2});
        Extension fbar(ind.tree.vertex_count(), 3);
        Extension ext = parsimonious_extension(cat, ind, fbar);
        for (int s : ext) CHECK(s == 3);
    }
}

TEST_CASE("restriction lemmas for scores") {
    SUBCASE("degree-2-tolerant Fitch scores T(Y) like the restriction") {
        Rng rng(46);
        for (int it = 0; it < 100; ++it) {
            int n = 5 + rng.below(5);
            Tree t = random_binary_tree(n, rng);
            std::vector<int> y;
            for (int i = 0; i < n; ++i)
                if (rng.below(2)) y.push_back(i);
            while (y.size() < 2) y.push_back(rng.below(n));
            std::sort(y.begin(), y.end());
            y.erase(std::unique(y.begin(), y.end()), y.end());
            auto ind = induced_subtree(t, y);
            Tree r = restrict_to(t, y);
            Character f = chr(random_states((int)y.size(), 1 + rng.below(3), rng));
            CHECK(parsimony_score(ind.tree, f) == parsimony_score(r, f));
        }
    }
    SUBCASE("restricting the character can only lower the score") {
        Rng rng(47);
        for (int it = 0; it < 100; ++it) {
            int n = 5 + rng.below(5);
            Tree t = random_binary_tree(n, rng);
            Character f = chr(random_states(n, 1 + rng.below(3), rng));
            std::vector<int> y;
            for (int i = 0; i < n; ++i)
                if (rng.below(2)) y.push_back(i);
            while (y.size() < 2) y.push_back(rng.below(n));
            std::sort(y.begin(), y.end());
            y.erase(std::unique(y.begin(), y.end()), y.end());
            auto ind = induced_subtree(t, y);
            Character fy;
            fy.num_states = f.num_states;
            for (int taxon : y) fy.states.push_back(f.states[taxon]);
            CHECK(parsimony_score(ind.tree, fy) <= parsimony_score(t, f));
        }
    }
}
