#include "parsikern/certificate.hpp"
#include "parsikern/newick.hpp"
#include "parsikern/random_gen.hpp"

#include <doctest.h>

using namespace parsikern;

TEST_CASE("newick parsing") {
    SUBCASE("canonical quartet") {
        Tree t = parse_newick("((a,b),(c,d));");
        CHECK(t.leaf_count() == 4);
        CHECK(t.phylogenetic());
        CHECK(quartet_topology(t, {0, 1, 2, 3}) == QuartetTopology::AB_CD);
    }
    SUBCASE("two leaves") {
        Tree t = parse_newick("(a,b);");
        CHECK(t.vertex_count() == 2);
        CHECK(t.leaf_count() == 2);
    }
    SUBCASE("branch lengths are accepted and discarded") {
        Tree a = parse_newick("((a:1.0,b:2.0):0.5,(c,d));");
        CHECK(isomorphic(a, parse_newick("((a,b),(c,d));")));
    }
    SUBCASE("rooted newick is unrooted by suppressing the degree-2 root") {
        Tree a = parse_newick("((a,b),(c,d));");
        Tree b = parse_newick("(a,b,(c,d));");
        CHECK(isomorphic(a, b));
    }
    SUBCASE("comments are skipped, internal labels dropped with a warning") {
        std::vector<std::string> warnings;
        Tree t = parse_newick("[comment]((a,b)label,(c,d));", &warnings);
        CHECK(t.leaf_count() == 4);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("label") != std::string::npos);
    }
    SUBCASE("syntax errors carry byte offsets") {
        try {
            parse_newick("((a,b),(c,d))");
            FAIL("expected parse error");
        } catch (const NewickParseError& e) {
            CHECK(e.offset() == 13);
        }
        CHECK_THROWS_AS(parse_newick("((a,b),(a,d));"), NewickParseError); // duplicate
        CHECK_THROWS_AS(parse_newick("(a);"), NewickParseError);           // degenerate root
        CHECK_THROWS_AS(parse_newick("((a,b),(c,d)); junk"), NewickParseError);
        CHECK_THROWS_AS(parse_newick("(a,b,c,d,e);"), Error); // multifurcation
    }
}

TEST_CASE("newick writing") {
    CHECK(write_newick(parse_newick("((a,b),(c,d));")) == "((a,b),(c,d));");
    CHECK(write_newick(parse_newick("((d,c),(b,a));")) == "((a,b),(c,d));");
    CHECK(write_newick(parse_newick("a;")) == "a;");

    SUBCASE("round trip is the identity up to isomorphism") {
        Rng rng(29);
        for (int it = 0; it < 60; ++it) {
            Tree t = random_binary_tree(4 + rng.below(12), rng);
            Tree back = parse_newick(write_newick(t));
            CHECK(isomorphic(t, back));
            // write is deterministic: equal trees, byte-identical text
            CHECK(write_newick(back) == write_newick(t));
        }
    }
}

TEST_CASE("character tables") {
    SUBCASE("basic parse") {
        auto tab = parse_character_table("a\t0\nb\t0\nc\t1\nd\t1");
        CHECK(tab.rows.size() == 4);
        CHECK(tab.alphabet == std::vector<std::string>{"0", "1"});
    }
    SUBCASE("declared t is enforced") {
        CHECK_THROWS_AS(parse_character_table("a\t0\nb\t1\nc\t2", 2), Error);
        CHECK_NOTHROW(parse_character_table("a\t0\nb\t1\nc\t2", 3));
    }
    SUBCASE("empty file gives an empty table") {
        auto tab = parse_character_table("");
        CHECK(tab.rows.empty());
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(parse_character_table("a\t0\na\t1"), Error); // duplicate taxon
        CHECK_THROWS_AS(parse_character_table("a\t"), Error);        // empty state
        CHECK_THROWS_AS(parse_character_table("a 0"), Error);        // missing tab
    }
}

TEST_CASE("certificate documents") {
    CertificateDocument c;
    c.tree1_hash = "aa";
    c.tree2_hash = "bb";
    c.quartets.push_back({{"a", "b", "c", "d"},
                          {{{"a", "b"}, {"c", "d"}}},
                          {{{"a", "c"}, {"b", "d"}}}});
    c.character = {{"a", 0}, {"b", 1}, {"c", 0}, {"d", 1}};
    c.claimed_bound = 1;
    c.dtbr_upper_bound = 4;
    c.seed = 42;

    SUBCASE("round trip is lossless") {
        std::string text = write_certificate(c);
        CertificateDocument back = read_certificate(text);
        CHECK(back.tree1_hash == c.tree1_hash);
        CHECK(back.swapped == c.swapped);
        CHECK(back.claimed_bound == c.claimed_bound);
        CHECK(back.dtbr_upper_bound == c.dtbr_upper_bound);
        CHECK(back.seed == c.seed);
        REQUIRE(back.quartets.size() == 1);
        CHECK(back.quartets[0].taxa == c.quartets[0].taxa);
        CHECK(back.quartets[0].split_t1 == c.quartets[0].split_t1);
        CHECK(back.character == c.character);
        // writing again is byte-identical
        CHECK(write_certificate(back) == text);
    }
    SUBCASE("negative bound is rejected on read") {
        std::string text = write_certificate(c);
        auto pos = text.find("\"claimed_bound\": 1");
        text.replace(pos, std::string("\"claimed_bound\": 1").size(), "\"claimed_bound\": -1");
        CHECK_THROWS_AS(read_certificate(text), Error);
    }
    SUBCASE("unknown fields are ignored with a note") {
        std::string text = write_certificate(c);
        text.insert(text.find("\"version\""), "\"future_field\": 7,\n  ");
        CertificateDocument back = read_certificate(text);
        CHECK(back.claimed_bound == 1);
        CHECK(back.note.find("future_field") != std::string::npos);
    }
}
