#include "parsikern/exact.hpp"
#include "parsikern/kernelize.hpp"
#include "parsikern/newick.hpp"
#include "parsikern/random_gen.hpp"

#include <doctest.h>

using namespace parsikern;

namespace {

Tree T(const std::string& nwk) { return parse_newick(nwk); }

} // namespace

TEST_CASE("cherry reduction") {
    SUBCASE("identical quartets collapse to triples") {
        Tree q = T("((a,b),(c,d));");
        auto [r1, r2] = apply_cherry_reduction(q, q, 0, 1);
        CHECK(r1.leaf_count() == 3);
        CHECK(isomorphic(r1, r2));
        CHECK(r1.taxon_index("b") == std::nullopt);
    }
    SUBCASE("reduction restricts both trees") {
        Tree t1 = T("((a,b),(c,(d,e)));");
        Tree t2 = T("((a,b),(d,(c,e)));");
        auto [r1, r2] = apply_cherry_reduction(t1, t2, 0, 1);
        CHECK(isomorphic(r1, T("((a,c),(d,e));")));
        CHECK(isomorphic(r2, T("((a,d),(c,e));")));
        // the parsimony distance is preserved
        CHECK(dmp_exact(r1, r2, 2) == dmp_exact(t1, t2, 2));
    }
    SUBCASE("non-cherries are rejected") {
        Tree t1 = T("((a,b),(c,d));");
        Tree t2 = T("((a,c),(b,d));");
        CHECK_THROWS_AS(apply_cherry_reduction(t1, t2, 0, 1), Error);
    }
}

TEST_CASE("chain reduction") {
    // cat(a,x1..x6,b) vs cat(b,x1..x6,a): the interior 6-chain is common
    Tree t1 = T("((a,x1),(x2,(x3,(x4,(x5,(x6,b))))));");
    Tree t2 = T("((b,x1),(x2,(x3,(x4,(x5,(x6,a))))));");
    auto chains = common_chains(t1, t2);
    const CommonChain* six = nullptr;
    for (const auto& c : chains)
        if (c.length() == 6) six = &c;
    REQUIRE(six != nullptr);

    SUBCASE("keeps the four outer chain leaves") {
        auto [r1, r2] = apply_chain_reduction(t1, t2, six->leaves);
        CHECK(r1.leaf_count() == 6);
        std::vector<std::string> want = {"a", "b", "x1", "x2", "x5", "x6"};
        CHECK(r1.taxa() == want);
        CHECK(r2.taxa() == want);
        // matches direct restriction
        std::vector<int> keep;
        for (const auto& n : want) keep.push_back(*t1.taxon_index(n));
        CHECK(isomorphic(r1, restrict_to(t1, keep)));
        CHECK(isomorphic(r2, restrict_to(t2, keep)));
    }
    SUBCASE("preserves the parsimony distance at t=2") {
        auto [r1, r2] = apply_chain_reduction(t1, t2, six->leaves);
        CHECK(dmp_exact(r1, r2, 2) == dmp_exact(t1, t2, 2));
    }
    SUBCASE("length-5 chains lose exactly the middle leaf") {
        std::vector<int> five(six->leaves.begin(), six->leaves.begin() + 5);
        if (chain_in_tree(t1, five) && chain_in_tree(t2, five)) {
            auto [r1, r2] = apply_chain_reduction(t1, t2, five);
            CHECK(r1.leaf_count() == t1.leaf_count() - 1);
            CHECK(r1.taxon_index(t1.taxon_name(five[2])) == std::nullopt);
        }
    }
    SUBCASE("short or non-common chains are rejected") {
        std::vector<int> four(six->leaves.begin(), six->leaves.begin() + 4);
        CHECK_THROWS_AS(apply_chain_reduction(t1, t2, four), Error);
        std::vector<int> shuffled = six->leaves;
        std::swap(shuffled[0], shuffled[3]);
        CHECK_THROWS_AS(apply_chain_reduction(t1, t2, shuffled), Error);
    }
}

TEST_CASE("fully_reduce") {
    SUBCASE("identical trees collapse to at most 4 leaves") {
        Rng rng(61);
        for (int it = 0; it < 10; ++it) {
            Tree t = random_binary_tree(5 + rng.below(6), rng);
            auto red = fully_reduce(t, t);
            CHECK(red.t1.leaf_count() <= 4);
            CHECK(isomorphic(red.t1, red.t2));
        }
    }
    SUBCASE("a conflicting quartet is already fully reduced") {
        Tree t1 = T("((a,b),(c,d));");
        Tree t2 = T("((a,c),(b,d));");
        auto red = fully_reduce(t1, t2);
        CHECK(red.trace.steps.empty());
        CHECK(isomorphic(red.t1, t1));
        CHECK(isomorphic(red.t2, t2));
    }
    SUBCASE("output has no common cherry and no long common chain") {
        Rng rng(62);
        for (int it = 0; it < 20; ++it) {
            auto [t1, t2] = gen_random_pair(5 + rng.below(5), rng.below(4), rng.next());
            auto red = fully_reduce(t1, t2);
            if (red.t1.leaf_count() >= 4) {
                CHECK(common_cherries(red.t1, red.t2).empty());
                for (const auto& c : common_chains(red.t1, red.t2)) CHECK(c.length() < 5);
            }
        }
    }
    SUBCASE("each step strictly shrinks the leaf count and the trace replays") {
        Rng rng(63);
        for (int it = 0; it < 20; ++it) {
            auto [t1, t2] = gen_random_pair(5 + rng.below(5), rng.below(3), rng.next());
            auto red = fully_reduce(t1, t2);
            int prev = red.trace.initial_leaves;
            for (const auto& s : red.trace.steps) {
                CHECK(s.leaves_before == prev);
                CHECK(s.leaves_after < s.leaves_before);
                prev = s.leaves_after;
            }
            CHECK(prev == red.trace.final_leaves);
            auto [p1, p2] = replay_trace(t1, t2, red.trace);
            CHECK(isomorphic(p1, red.t1));
            CHECK(isomorphic(p2, red.t2));
        }
    }
    SUBCASE("reduction is safe: the distance is unchanged") {
        Rng rng(64);
        for (int it = 0; it < 25; ++it) {
            int n = 5 + rng.below(3); // n <= 7 keeps the oracles fast here
            auto [t1, t2] = gen_random_pair(n, rng.below(4), rng.next());
            auto red = fully_reduce(t1, t2);
            for (int t : {2, 3, kUnboundedStates})
                CHECK(dmp_exact(red.t1, red.t2, t) == dmp_exact(t1, t2, t));
        }
    }
    SUBCASE("kernel bound against the exact TBR distance") {
        Rng rng(65);
        for (int it = 0; it < 15; ++it) {
            auto [t1, t2] = gen_random_pair(5 + rng.below(4), 1 + rng.below(3), rng.next());
            auto red = fully_reduce(t1, t2);
            int d = dtbr_hitting_set(red.t1, red.t2).value;
            if (d == 0)
                CHECK(red.t1.leaf_count() <= 3);
            else
                CHECK(red.t1.leaf_count() <= 20 * d);
        }
    }
    SUBCASE("trace serializes to JSON") {
        Tree t = T("((a,b),(c,d));");
        auto red = fully_reduce(t, t);
        std::string j = trace_to_json(red.trace);
        CHECK(j.find("\"cherry\"") != std::string::npos);
        CHECK(j.find("\"initial_leaves\": 4") != std::string::npos);
    }
}
