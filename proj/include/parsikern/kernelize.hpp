#pragma once

// Cherry reduction and chain reduction applied to a fixed point, with an
// auditable, replayable trace. Rule order: exhaust cherries, then one chain
// reduction (longest first), then loop. Leaf counts below 4 short-circuit.

#include "parsikern/tree.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace parsikern {

struct ReductionStep {
    enum class Kind { Cherry, Chain };
    Kind kind;
    // cherry: x kept, y removed; chain: full leaf sequence before reduction
    std::string x, y;
    std::vector<std::string> chain;
    std::vector<std::string> removed;
    int leaves_before = 0;
    int leaves_after = 0;
};

struct ReductionTrace {
    int initial_leaves = 0;
    int final_leaves = 0;
    std::vector<ReductionStep> steps;
};

// Rule 1: remove y of a common cherry (x,y) from both trees.
inline std::pair<Tree, Tree> apply_cherry_reduction(const Tree& t1, const Tree& t2, int x,
                                                    int y) {
    require_same_leaf_set(t1, t2);
    auto cc = common_cherries(t1, t2);
    std::pair<int, int> want{std::min(x, y), std::max(x, y)};
    if (!std::binary_search(cc.begin(), cc.end(), want))
        throw Error("cherry reduction: not a common cherry");
    std::vector<int> keep;
    for (int i = 0; i < t1.leaf_count(); ++i)
        if (i != y) keep.push_back(i);
    return {restrict_to(t1, keep), restrict_to(t2, keep)};
}

// Rule 2: truncate a common chain of length k >= 5 to its four outer leaves.
inline std::pair<Tree, Tree> apply_chain_reduction(const Tree& t1, const Tree& t2,
                                                   const std::vector<int>& chain) {
    require_same_leaf_set(t1, t2);
    int k = (int)chain.size();
    if (k < 5) throw Error("chain reduction: needs length >= 5");
    if (!chain_in_tree(t1, chain) || !chain_in_tree(t2, chain))
        throw Error("chain reduction: not a common chain");
    std::vector<char> removed(t1.leaf_count(), 0);
    for (int i = 2; i <= k - 3; ++i) removed[chain[i]] = 1;
    std::vector<int> keep;
    for (int i = 0; i < t1.leaf_count(); ++i)
        if (!removed[i]) keep.push_back(i);
    return {restrict_to(t1, keep), restrict_to(t2, keep)};
}

struct ReducedPair {
    Tree t1, t2;
    ReductionTrace trace;
};

inline ReducedPair fully_reduce(const Tree& t1_in, const Tree& t2_in) {
    require_same_leaf_set(t1_in, t2_in);
    ReducedPair out{t1_in, t2_in, {}};
    out.trace.initial_leaves = t1_in.leaf_count();
    while (out.t1.leaf_count() >= 4) {
        auto cc = common_cherries(out.t1, out.t2);
        if (!cc.empty()) {
            auto [x, y] = cc.front(); // keep the smaller taxon
            ReductionStep step;
            step.kind = ReductionStep::Kind::Cherry;
            step.x = out.t1.taxon_name(x);
            step.y = out.t1.taxon_name(y);
            step.removed = {step.y};
            step.leaves_before = out.t1.leaf_count();
            auto [r1, r2] = apply_cherry_reduction(out.t1, out.t2, x, y);
            out.t1 = r1;
            out.t2 = r2;
            step.leaves_after = out.t1.leaf_count();
            out.trace.steps.push_back(step);
            continue;
        }
        auto chains = common_chains(out.t1, out.t2);
        const CommonChain* pick = nullptr;
        for (const auto& c : chains) {
            if (c.length() < 5) continue;
            if (!pick || c.length() > pick->length() ||
                (c.length() == pick->length() && c.leaves < pick->leaves))
                pick = &c;
        }
        if (!pick) break;
        ReductionStep step;
        step.kind = ReductionStep::Kind::Chain;
        for (int l : pick->leaves) step.chain.push_back(out.t1.taxon_name(l));
        for (int i = 2; i <= pick->length() - 3; ++i)
            step.removed.push_back(out.t1.taxon_name(pick->leaves[i]));
        step.leaves_before = out.t1.leaf_count();
        auto [r1, r2] = apply_chain_reduction(out.t1, out.t2, pick->leaves);
        out.t1 = r1;
        out.t2 = r2;
        step.leaves_after = out.t1.leaf_count();
        out.trace.steps.push_back(step);
    }
    out.trace.final_leaves = out.t1.leaf_count();
    return out;
}

inline std::string trace_to_json(const ReductionTrace& trace) {
    nlohmann::ordered_json j;
    j["initial_leaves"] = trace.initial_leaves;
    j["final_leaves"] = trace.final_leaves;
    j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : trace.steps) {
        nlohmann::ordered_json sj;
        sj["kind"] = s.kind == ReductionStep::Kind::Cherry ? "cherry" : "chain";
        if (s.kind == ReductionStep::Kind::Cherry) {
            sj["kept"] = s.x;
            sj["removed_leaf"] = s.y;
        } else {
            sj["chain"] = s.chain;
        }
        sj["removed"] = s.removed;
        sj["leaves_before"] = s.leaves_before;
        sj["leaves_after"] = s.leaves_after;
        j["steps"].push_back(sj);
    }
    return j.dump(2) + "\n";
}

// Re-run a trace against the original pair; the result must match.
inline std::pair<Tree, Tree> replay_trace(const Tree& t1_in, const Tree& t2_in,
                                          const ReductionTrace& trace) {
    Tree t1 = t1_in, t2 = t2_in;
    for (const auto& step : trace.steps) {
        if (step.kind == ReductionStep::Kind::Cherry) {
            auto x = t1.taxon_index(step.x), y = t1.taxon_index(step.y);
            if (!x || !y) throw Error("trace replay: unknown taxon");
            std::tie(t1, t2) = apply_cherry_reduction(t1, t2, *x, *y);
        } else {
            std::vector<int> chain;
            for (const auto& name : step.chain) {
                auto idx = t1.taxon_index(name);
                if (!idx) throw Error("trace replay: unknown taxon");
                chain.push_back(*idx);
            }
            std::tie(t1, t2) = apply_chain_reduction(t1, t2, chain);
        }
    }
    return {t1, t2};
}

} // namespace parsikern
