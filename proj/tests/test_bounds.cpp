#include "parsikern/bounds.hpp"
#include "parsikern/newick.hpp"
#include "parsikern/random_gen.hpp"
#include "parsikern/verify.hpp"

#include <doctest.h>

using namespace parsikern;

namespace {

Tree T(const std::string& nwk) { return parse_newick(nwk); }

Quartet mk_quartet(const Tree& t1, const Tree& t2, const std::vector<std::string>& names) {
    Quartet q;
    for (int i = 0; i < 4; ++i) q.taxa[i] = *t1.taxon_index(names[i]);
    std::sort(q.taxa.begin(), q.taxa.end());
    q.t1 = quartet_topology(t1, q.taxa);
    q.t2 = quartet_topology(t2, q.taxa);
    return q;
}

std::vector<int> reach_taxa_ref(const Tree& t, int from, int blocked,
                                const std::vector<Edge>& eprime) {
    // straight-line reference: DFS with explicit blocks
    std::set<Edge> cut(eprime.begin(), eprime.end());
    std::vector<int> out;
    std::vector<char> seen(t.vertex_count(), 0);
    seen[blocked] = 1;
    std::vector<int> stack = {from};
    seen[from] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (t.label_of(v) >= 0) out.push_back(t.label_of(v));
        for (int w : t.neighbors(v))
            if (!seen[w] && !cut.count(Edge(v, w))) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("quartet geometry") {
    Tree q1 = T("((a,b),(c,d));");
    Tree q2 = T("((a,c),(b,d));");
    Quartet q = mk_quartet(q1, q2, {"a", "b", "c", "d"});

    SUBCASE("legs, joints and reach sets on the bare quartet") {
        auto g = quartet_geometry(q1, q, {});
        CHECK(g.leg_ab.size() == 2);
        CHECK(g.leg_cd.size() == 2);
        CHECK(g.backbone.size() == 1);
        CHECK(g.u_ab != g.u_cd);
        CHECK(g.xa == std::vector<int>{*q1.taxon_index("a")});
        CHECK(g.xb == std::vector<int>{*q1.taxon_index("b")});
        CHECK(g.xc == std::vector<int>{*q1.taxon_index("c")});
        CHECK(g.xd == std::vector<int>{*q1.taxon_index("d")});
    }
    SUBCASE("reach sets in a caterpillar host match a reference traversal") {
        Tree host = T("((a,b),(c,(d,(e,(f,(g,h))))));");
        Tree other = T("((a,c),(b,(d,(e,(f,(g,h))))));");
        auto quartets = incompatible_quartets(host, other);
        REQUIRE(!quartets.empty());
        for (const Quartet& iq : quartets) {
            auto g = quartet_geometry(host, iq, {});
            int va = host.vertex_of_taxon(g.a);
            CHECK(g.xa == reach_taxa_ref(host, va, g.u_ab, {}));
            int vc = host.vertex_of_taxon(g.c);
            CHECK(g.xc == reach_taxa_ref(host, vc, g.u_cd, {}));
        }
    }
    SUBCASE("E' edges shrink the reach sets") {
        Tree host = T("((a,b),(c,(d,(e,(f,(g,h))))));");
        Tree other = T("((a,c),(b,(d,(e,(f,(g,h))))));");
        // quartet ab|df: the f-side reach set runs past e's pendant edge
        Quartet iq = mk_quartet(host, other, {"a", "b", "d", "f"});
        REQUIRE(iq.t1 == QuartetTopology::AB_CD);
        int ve = host.vertex_of_taxon(*host.taxon_index("e"));
        std::vector<Edge> eprime = {Edge(ve, host.parent_of_leaf(ve))};
        auto g1 = quartet_geometry(host, iq, {});
        auto g2 = quartet_geometry(host, iq, eprime);
        CHECK(g2.xd.size() < g1.xd.size()); // lost the taxon behind the cut
        // an E' edge on a leg is a caller bug
        auto g0 = quartet_geometry(host, iq, {});
        CHECK_THROWS_AS(quartet_geometry(host, iq, {g0.leg_ab[0]}), Error);
    }
}

TEST_CASE("greedy leg-disjoint selection") {
    SUBCASE("identical trees produce nothing") {
        Tree t = T("((a,b),(c,d));");
        auto g = greedy_leg_disjoint(t, t);
        CHECK(g.quartets.empty());
        CHECK(g.hitting.empty());
        CHECK(g.total_quartets == 0);
    }
    SUBCASE("the conflicting quartet needs exactly four edges") {
        auto g = greedy_leg_disjoint(T("((a,b),(c,d));"), T("((a,c),(b,d));"));
        REQUIRE(g.quartets.size() == 1);
        CHECK(g.hitting.size() == 4);
        CHECK(g.ptilde_sizes == std::vector<int>{2});
    }
    SUBCASE("guarantees on random pairs") {
        Rng rng(71);
        for (int it = 0; it < 25; ++it) {
            int n = 6 + rng.below(9);
            auto [t1, t2] = gen_random_pair(n, 1 + rng.below(4), rng.next());
            auto g = greedy_leg_disjoint(t1, t2);
            // E' hits every incompatible quartet
            std::set<Edge> eprime(g.hitting.begin(), g.hitting.end());
            for (const Quartet& q : incompatible_quartets(t1, t2)) {
                bool hit = false;
                for (int id : leg_edge_ids(t1, q))
                    if (eprime.count(t1.edges()[id])) hit = true;
                CHECK(hit);
            }
            // per-iteration path bound and total size bound
            double lg = lg2(n);
            for (int p : g.ptilde_sizes) CHECK((double)p <= 2 * lg + 1e-9);
            CHECK((double)g.hitting.size() <= g.quartets.size() * 2 * (lg + 1) + 1e-9);
            // packing bound against the exact distance
            int d = dtbr_hitting_set(t1, t2).value;
            CHECK((double)g.quartets.size() >= (double)d / (2 * (lg + 1)) - 1e-9);
            CHECK((int)g.hitting.size() >= d);
        }
    }
}

TEST_CASE("phase 1 colouring") {
    Tree t1 = T("((a,b),(c,d));");
    Tree t2 = T("((a,c),(b,d));");
    SUBCASE("single quartet") {
        Quartet q = mk_quartet(t1, t2, {"a", "b", "c", "d"});
        Witness w = phase1_colouring(t1, t2, {q});
        CHECK(w.selected.size() == 1);
        CHECK(w.beta == 2);
        CHECK(w.delta == 1);
        CHECK(w.bound == 1);
        // a and c share a colour; b and d share the other
        int ca = w.colour[t2.vertex_of_taxon(*t2.taxon_index("a"))];
        int cb = w.colour[t2.vertex_of_taxon(*t2.taxon_index("b"))];
        int cc = w.colour[t2.vertex_of_taxon(*t2.taxon_index("c"))];
        int cd = w.colour[t2.vertex_of_taxon(*t2.taxon_index("d"))];
        CHECK(ca == 0);
        CHECK(cc == 0);
        CHECK(cb == 1);
        CHECK(cd == 1);
    }
    SUBCASE("empty input gives the empty witness") {
        Witness w = phase1_colouring(t1, t2, {});
        CHECK(w.bound == 0);
        CHECK(w.selected.empty());
    }
}

TEST_CASE("phase 2 case analysis") {
    SUBCASE("no pool leaves the witness unchanged") {
        Tree t1 = T("((a,b),(c,d));");
        Tree t2 = T("((a,c),(b,d));");
        Quartet q = mk_quartet(t1, t2, {"a", "b", "c", "d"});
        Witness w1 = phase1_colouring(t1, t2, {q});
        Witness w2 = phase2_extend(t1, t2, w1);
        CHECK(w2.bound == w1.bound);
        CHECK(w2.selected.size() == 1);
    }
    SUBCASE("a quartet with a T2 leg pair inside one pendant subtree hits case 2") {
        // q2 = {e,f,g,h}: in T2 the leg pair (e,g) sits inside the pendant
        // subtree hanging off T2(X') after phase 1 selects q1 = {a,b,c,d}
        Tree t1 = T("(((a,b),(c,d)),((e,f),(g,h)));");
        Tree t2 = T("((a,c),((e,g),(f,(h,(b,d)))));");
        Quartet q1 = mk_quartet(t1, t2, {"a", "b", "c", "d"});
        Quartet q2 = mk_quartet(t1, t2, {"e", "f", "g", "h"});
        CHECK(q1.t1 != q1.t2);
        CHECK(q2.t1 != q2.t2);
        Witness w = witness_character(t1, t2, {q1, q2});
        CHECK(w.selected.size() == 2);
        CHECK(w.beta == 4);
        CHECK(w.delta == 2);
        CHECK(w.bound == 2);
        bool saw_case2 = false;
        for (const auto& tag : w.case_log)
            if (tag == "case2") saw_case2 = true;
        CHECK(saw_case2);
        CHECK(dmp_exact(t1, t2, 2) >= w.bound);
    }
}

namespace {

Tree caterpillar(const std::vector<std::string>& order) {
    std::string s = "((" + order[0] + "," + order[1] + "),";
    int n = (int)order.size();
    for (int i = 2; i < n - 1; ++i) s += "(" + order[i] + ",";
    s += order[n - 1] + std::string(n - 3, ')') + ");";
    return parse_newick(s);
}

// caterpillar vs leaf-permuted caterpillar; the permutation is drawn from the
// seed exactly as in the coverage scan that found these instances
Witness witness_for_scrambled_caterpillar(uint64_t seed, std::string* log_out = nullptr) {
    Rng rng(seed);
    int n = 8 + rng.below(9);
    auto names = default_taxon_names(n);
    Tree t1 = caterpillar(names);
    auto perm = names;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    Tree t2 = caterpillar(perm);
    auto g = greedy_leg_disjoint(t1, t2);
    Witness w = witness_character(t1, t2, g.quartets);
    if (log_out)
        for (const auto& tag : w.case_log) *log_out += tag + ";";
    return w;
}

} // namespace

TEST_CASE("phase 2 reaches every case on frozen instances") {
    // seeds found by scanning scrambled caterpillars; the construction itself
    // re-checks beta/delta accounting after every application
    const std::vector<std::pair<std::string, uint64_t>> cases = {
        {"case3", 13068443833877187885ull},
        {"case4.1", 8864994468168803325ull},
        {"case4.2", 16628774555521210696ull},
        {"case4.3-head", 6048222571045127467ull},
        {"case4.3-a2first", 11577690731495143814ull},
        {"case4.3-d1last", 15700568809871056396ull},
        {"case4.3-middle", 11063408274490325815ull},
    };
    for (const auto& [tag, seed] : cases) {
        CAPTURE(tag);
        std::string log;
        Witness w = witness_for_scrambled_caterpillar(seed, &log);
        CHECK(log.find(tag) != std::string::npos);
        CHECK_FALSE(w.case4_fallback);
        CHECK(w.bound >= ((int)w.selected.size() + 2) / 3);
        CHECK(9 * (int)w.selected.size() >= w.input_quartets);
    }
}

TEST_CASE("witness character") {
    Tree t1 = T("((a,b),(c,d));");
    Tree t2 = T("((a,c),(b,d));");
    SUBCASE("single quartet certifies bound 1") {
        Quartet q = mk_quartet(t1, t2, {"a", "b", "c", "d"});
        Witness w = witness_character(t1, t2, {q});
        CHECK(w.bound == 1);
        Character f;
        f.num_states = 2;
        f.states = w.character_states;
        CHECK(parsimony_score(restrict_to(t1, w.xprime), f) == 2);
        CHECK(parsimony_score(restrict_to(t2, w.xprime), f) == 1);
    }
    SUBCASE("empty input certifies bound 0") {
        Witness w = witness_character(t1, t2, {});
        CHECK(w.bound == 0);
    }
    SUBCASE("non-leg-disjoint input is rejected") {
        Tree h1 = T("((a,b),(c,(d,e)));");
        Tree h2 = T("((a,c),(b,(e,d)));");
        auto qs = incompatible_quartets(h1, h2);
        // two overlapping quartets necessarily share a leg edge here
        std::vector<Quartet> two = {qs[0], qs[1]};
        CHECK_THROWS_AS(witness_character(h1, h2, two), Error);
    }
    SUBCASE("witness bounds are sound against the exact oracle") {
        Rng rng(72);
        for (int it = 0; it < 25; ++it) {
            int n = 5 + rng.below(4);
            auto [a, b] = gen_random_pair(n, 1 + rng.below(4), rng.next());
            auto g = greedy_leg_disjoint(a, b);
            Witness w = witness_character(a, b, g.quartets);
            int qsel = (int)w.selected.size();
            CHECK(w.bound >= (qsel + 2) / 3);
            CHECK(9 * qsel >= (int)g.quartets.size());
            CHECK(w.bound <= dmp_exact(a, b, 2));
        }
    }
}

TEST_CASE("lift character") {
    Tree t1 = T("(((a,b),(c,d)),(e,(f,(g,h))));");
    Tree t2 = T("(((a,c),(b,d)),(e,(f,(g,h))));");
    SUBCASE("whole leaf set is the identity") {
        Character f;
        f.num_states = 2;
        f.states = {0, 1, 0, 1, 0, 1, 0, 1};
        std::vector<int> all;
        for (int i = 0; i < 8; ++i) all.push_back(i);
        Character lifted = lift_character(t1, t2, all, f);
        CHECK(lifted.states == f.states);
    }
    SUBCASE("constant characters lift to constants") {
        Character f;
        f.num_states = 2;
        f.states = {1, 1, 1, 1};
        Character lifted = lift_character(t1, t2, {0, 1, 2, 3}, f);
        for (int s : lifted.states) CHECK(s == 1);
    }
    SUBCASE("certificate characters lift to full-tree witnesses of the claim") {
        // the witness certifies l(T1role) - l(T2role) on the restriction; the
        // lift lemma transfers gaps l(B) - l(A) through an optimal extension
        // built in A, so the lift runs through the T2 role
        Rng rng(75);
        for (int it = 0; it < 15; ++it) {
            int n = 8 + rng.below(5); // beyond the d_MP oracle cap
            auto [a, b] = gen_random_pair(n, 1 + rng.below(5), rng.next());
            CertificateDocument c = certified_lower_bound(a, b);
            if (c.quartets.empty()) continue;
            const Tree& ta = c.swapped ? b : a;
            const Tree& tb = c.swapped ? a : b;
            std::vector<int> y;
            Character f;
            f.num_states = 2;
            for (auto& [name, st] : c.character) { // sorted by name == by index
                y.push_back(*ta.taxon_index(name));
                f.states.push_back(st);
            }
            Character lifted = lift_character(tb, ta, y, f);
            int gap = parsimony_score(ta, lifted) - parsimony_score(tb, lifted);
            CHECK(gap >= c.claimed_bound);
        }
    }
    SUBCASE("the lifted gap dominates the restricted gap") {
        Rng rng(73);
        for (int it = 0; it < 40; ++it) {
            int n = 6 + rng.below(4);
            auto [a, b] = gen_random_pair(n, 1 + rng.below(3), rng.next());
            std::vector<int> y;
            for (int i = 0; i < n; ++i)
                if (rng.below(2)) y.push_back(i);
            while (y.size() < 4) y.push_back(rng.below(n));
            std::sort(y.begin(), y.end());
            y.erase(std::unique(y.begin(), y.end()), y.end());
            Character f;
            f.num_states = 2;
            f.states = random_states((int)y.size(), 2, rng);
            Character lifted = lift_character(a, b, y, f);
            auto ia = induced_subtree(a, y);
            auto ib = induced_subtree(b, y);
            int restricted_gap = parsimony_score(ib.tree, f) - parsimony_score(ia.tree, f);
            int lifted_gap = parsimony_score(b, lifted) - parsimony_score(a, lifted);
            CHECK(lifted_gap >= restricted_gap);
        }
    }
}

TEST_CASE("certified lower bound end to end") {
    SUBCASE("identical trees certify zero") {
        Tree t = T("((a,b),(c,d));");
        CertificateDocument c = certified_lower_bound(t, t);
        CHECK(c.claimed_bound == 0);
        CHECK(c.dtbr_upper_bound == 0);
        CHECK(verify_certificate(t, t, c).ok);
    }
    SUBCASE("the conflicting quartet certifies its exact distance") {
        Tree t1 = T("((a,b),(c,d));");
        Tree t2 = T("((a,c),(b,d));");
        CertificateDocument c = certified_lower_bound(t1, t2);
        CHECK(c.claimed_bound == 1);
        CHECK(c.claimed_bound == dmp_exact(t1, t2, 2));
        CHECK(verify_certificate(t1, t2, c).ok);
    }
    SUBCASE("random pairs: sound bound, valid d_TBR ceiling, verifiable") {
        Rng rng(74);
        for (int it = 0; it < 20; ++it) {
            int n = 5 + rng.below(4);
            auto [a, b] = gen_random_pair(n, 1 + rng.below(4), rng.next());
            CertificateDocument c = certified_lower_bound(a, b, 7);
            CHECK(c.claimed_bound <= dmp_exact(a, b, 2));
            CHECK(c.dtbr_upper_bound >= dtbr_hitting_set(a, b).value);
            auto rep = verify_certificate(a, b, c);
            CHECK(rep.ok);
            // serialization round trip stays verifiable
            CertificateDocument back = read_certificate(write_certificate(c));
            CHECK(verify_certificate(a, b, back).ok);
        }
    }
}

TEST_CASE("certificate tampering is caught") {
    Tree t1 = T("(((a,b),(c,d)),((e,f),(g,h)));");
    Tree t2 = T("((a,c),((e,g),(f,(h,(b,d)))));");
    CertificateDocument c = certified_lower_bound(t1, t2);
    REQUIRE(verify_certificate(t1, t2, c).ok);
    REQUIRE(!c.quartets.empty());

    SUBCASE("inflated bound fails the score gap") {
        CertificateDocument bad = c;
        bad.claimed_bound += 1;
        auto rep = verify_certificate(t1, t2, bad);
        CHECK_FALSE(rep.ok);
        bool named = false;
        for (const auto& f : rep.failures)
            if (f.find("score-gap") != std::string::npos) named = true;
        CHECK(named);
    }
    SUBCASE("swapped quartet topology fails incompatibility") {
        CertificateDocument bad = c;
        std::swap(bad.quartets[0].split_t1, bad.quartets[0].split_t2);
        auto rep = verify_certificate(t1, t2, bad);
        CHECK_FALSE(rep.ok);
        bool named = false;
        for (const auto& f : rep.failures)
            if (f.find("incompatibility") != std::string::npos) named = true;
        CHECK(named);
    }
    SUBCASE("flipped character colour fails the score gap") {
        CertificateDocument bad = c;
        bad.character[0].second = 1 - bad.character[0].second;
        CHECK_FALSE(verify_certificate(t1, t2, bad).ok);
    }
    SUBCASE("leg-sharing quartet injection is rejected") {
        CertificateDocument bad = c;
        // duplicate an existing quartet: shares every leg edge with itself
        bad.quartets.push_back(bad.quartets[0]);
        auto rep = verify_certificate(t1, t2, bad);
        CHECK_FALSE(rep.ok);
        bool named = false;
        for (const auto& f : rep.failures)
            if (f.find("leg-disjointness") != std::string::npos) named = true;
        CHECK(named);
    }
    SUBCASE("positive bound with no quartets is rejected") {
        CertificateDocument bad = c;
        bad.quartets.clear();
        bad.character.clear();
        auto rep = verify_certificate(t1, t2, bad);
        CHECK_FALSE(rep.ok);
    }
}
