#pragma once

// Independent certificate checking. Uses only the tree core, Fitch scoring and
// the certificate schema; none of the construction code in bounds.hpp is
// reachable from here.

#include "parsikern/certificate.hpp"
#include "parsikern/fitch.hpp"
#include "parsikern/tree.hpp"

#include <string>
#include <vector>

namespace parsikern {

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> failures;

    void fail(const std::string& msg) {
        ok = false;
        failures.push_back(msg);
    }
};

namespace detail {

// Map a certificate split to the topology enum over the sorted 4-set, or -1.
inline int split_topology(const std::array<int, 4>& sorted_taxa,
                          const std::array<std::array<int, 2>, 2>& split) {
    auto pos = [&](int t) {
        for (int i = 0; i < 4; ++i)
            if (sorted_taxa[i] == t) return i;
        return -1;
    };
    std::set<std::set<int>> want;
    for (auto& pr : split) {
        int p0 = pos(pr[0]), p1 = pos(pr[1]);
        if (p0 < 0 || p1 < 0 || p0 == p1) return -1;
        want.insert({p0, p1});
    }
    const QuartetTopology all[3] = {QuartetTopology::AB_CD, QuartetTopology::AC_BD,
                                    QuartetTopology::AD_BC};
    for (QuartetTopology cand : all) {
        auto pairs = topology_pairs(cand);
        std::set<std::set<int>> have;
        for (auto& pr : pairs) have.insert({pr[0], pr[1]});
        if (have == want) return (int)cand;
    }
    return -1;
}

} // namespace detail

// Re-derive every claim of the certificate from the two input trees:
//   (i)   each listed quartet is incompatible with the stated topologies,
//   (ii)  the quartets are pairwise leg-disjoint in the stated T1,
//   (iii) the character is 2-state over exactly the quartet leaves,
//   (iv)  the Fitch score gap on the restriction meets the claimed bound,
//   (v)   claimed_bound >= ceil(|Q|/3) (and 0 when the list is empty).
inline VerifyReport verify_certificate(const Tree& in1, const Tree& in2,
                                       const CertificateDocument& c) {
    VerifyReport rep;
    require_same_leaf_set(in1, in2);
    const Tree& t1 = c.swapped ? in2 : in1;
    const Tree& t2 = c.swapped ? in1 : in2;

    struct Q {
        std::array<int, 4> taxa;
        QuartetTopology t1, t2;
    };
    std::vector<Q> quartets;
    std::set<int> xprime;
    bool structurally_sound = true;

    for (size_t qi = 0; qi < c.quartets.size(); ++qi) {
        const auto& cq = c.quartets[qi];
        Q q;
        bool good = true;
        std::array<std::array<int, 2>, 2> s1{}, s2{};
        for (int i = 0; i < 4 && good; ++i) {
            auto idx = t1.taxon_index(cq.taxa[i]);
            if (!idx) {
                rep.fail("incompatibility: quartet " + std::to_string(qi) +
                         " names unknown taxon '" + cq.taxa[i] + "'");
                good = false;
                break;
            }
            q.taxa[i] = *idx;
        }
        if (!good) {
            structurally_sound = false;
            continue;
        }
        std::sort(q.taxa.begin(), q.taxa.end());
        if (q.taxa[0] == q.taxa[1] || q.taxa[1] == q.taxa[2] || q.taxa[2] == q.taxa[3]) {
            rep.fail("incompatibility: quartet " + std::to_string(qi) + " repeats a taxon");
            structurally_sound = false;
            continue;
        }
        for (int s = 0; s < 2; ++s)
            for (int e = 0; e < 2; ++e) {
                auto i1 = t1.taxon_index(cq.split_t1[s][e]);
                auto i2 = t1.taxon_index(cq.split_t2[s][e]);
                if (!i1 || !i2) good = false;
                if (good) {
                    s1[s][e] = *i1;
                    s2[s][e] = *i2;
                }
            }
        int top1 = good ? detail::split_topology(q.taxa, s1) : -1;
        int top2 = good ? detail::split_topology(q.taxa, s2) : -1;
        if (top1 < 0 || top2 < 0) {
            rep.fail("incompatibility: quartet " + std::to_string(qi) + " has malformed splits");
            structurally_sound = false;
            continue;
        }
        q.t1 = (QuartetTopology)top1;
        q.t2 = (QuartetTopology)top2;
        if (q.t1 == q.t2)
            rep.fail("incompatibility: quartet " + std::to_string(qi) +
                     " states equal topologies");
        if (quartet_topology(t1, q.taxa) != q.t1)
            rep.fail("incompatibility: quartet " + std::to_string(qi) +
                     " misstates the T1 topology");
        if (quartet_topology(t2, q.taxa) != q.t2)
            rep.fail("incompatibility: quartet " + std::to_string(qi) +
                     " misstates the T2 topology");
        quartets.push_back(q);
        for (int t : q.taxa) xprime.insert(t);
    }

    // (ii) pairwise leg-disjointness in T1
    if (structurally_sound) {
        std::vector<char> used(t1.edges().size(), 0);
        bool overlap = false;
        for (const Q& q : quartets) {
            auto pairs = topology_pairs(q.t1);
            for (auto& pr : pairs) {
                auto path = tree_path(t1, t1.vertex_of_taxon(q.taxa[pr[0]]),
                                      t1.vertex_of_taxon(q.taxa[pr[1]]));
                for (const Edge& e : path_edges(path)) {
                    int id = t1.edge_id(e);
                    if (used[id]) overlap = true;
                    used[id] = 1;
                }
            }
        }
        if (overlap) rep.fail("leg-disjointness: two quartets share a T1 leg edge");
    }

    // (iii) character: states in {0,1}, domain exactly the quartet leaves
    std::set<int> domain;
    bool char_ok = true;
    for (const auto& [name, state] : c.character) {
        auto idx = t1.taxon_index(name);
        if (!idx) {
            rep.fail("character: unknown taxon '" + name + "'");
            char_ok = false;
            continue;
        }
        if (state != 0 && state != 1) {
            rep.fail("character: state of '" + name + "' is not 0/1");
            char_ok = false;
        }
        if (!domain.insert(*idx).second) {
            rep.fail("character: duplicate taxon '" + name + "'");
            char_ok = false;
        }
    }
    if (structurally_sound && domain != xprime) {
        rep.fail("character: domain is not the union of the quartet leaves");
        char_ok = false;
    }

    // (iv) Fitch-verified gap
    if (c.quartets.empty()) {
        if (c.claimed_bound != 0)
            rep.fail("score-gap: positive bound with no quartets");
    } else if (structurally_sound && char_ok) {
        std::vector<int> xp(xprime.begin(), xprime.end());
        Tree s1 = restrict_to(t1, xp);
        Tree s2 = restrict_to(t2, xp);
        Character f;
        f.num_states = 2;
        f.states.resize(xp.size());
        for (size_t i = 0; i < xp.size(); ++i) {
            auto idx = s1.taxon_index(t1.taxon_name(xp[i]));
            for (const auto& [name, state] : c.character)
                if (name == t1.taxon_name(xp[i])) f.states[*idx] = state;
        }
        int gap = parsimony_score(s1, f) - parsimony_score(s2, f);
        if (gap < c.claimed_bound)
            rep.fail("score-gap: Fitch gap " + std::to_string(gap) + " below claimed bound " +
                     std::to_string(c.claimed_bound));
    }

    // (v) bound floor
    int nq = (int)c.quartets.size();
    if (nq > 0 && c.claimed_bound < (nq + 2) / 3)
        rep.fail("bound-floor: claimed_bound below ceil(|Q|/3)");

    return rep;
}

} // namespace parsikern
