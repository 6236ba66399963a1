// parsikern: kernelization, exact distances and certified lower bounds for
// the t-state maximum parsimony distance between unrooted trees.
//
// Exit status: 0 success (and: certificate verified / partition is an AF),
// 1 domain failure (including failed verification), 2 usage errors.

#include "parsikern/bounds.hpp"
#include "parsikern/certificate.hpp"
#include "parsikern/exact.hpp"
#include "parsikern/fitch.hpp"
#include "parsikern/kernelize.hpp"
#include "parsikern/newick.hpp"
#include "parsikern/random_gen.hpp"
#include "parsikern/tree.hpp"
#include "parsikern/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace parsikern;
using nlohmann::ordered_json;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

// Two Newick lines -> a pair of trees on the same taxon set.
std::pair<Tree, Tree> load_pair(const std::string& path) {
    std::string text = slurp(path);
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty()) lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    if (lines.size() != 2) throw Error("'" + path + "': expected exactly two Newick lines");
    std::vector<std::string> warnings;
    Tree t1 = parse_newick(lines[0], &warnings);
    Tree t2 = parse_newick(lines[1], &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    require_same_leaf_set(t1, t2);
    return {t1, t2};
}

Character table_to_character(const CharacterTable& tab, const Tree& t) {
    Character f;
    f.num_states = tab.declared_t > 0 ? tab.declared_t : kUnboundedStates;
    f.states.assign(t.leaf_count(), -1);
    for (const auto& [taxon, state] : tab.rows) {
        auto idx = t.taxon_index(taxon);
        if (!idx) throw Error("character table names unknown taxon '" + taxon + "'");
        auto it = std::lower_bound(tab.alphabet.begin(), tab.alphabet.end(), state);
        f.states[*idx] = (int)(it - tab.alphabet.begin());
    }
    for (int s : f.states)
        if (s < 0) throw Error("character table does not cover all taxa");
    if (f.num_states == kUnboundedStates) f.num_states = (int)tab.alphabet.size();
    return f;
}

int parse_t_flag(const std::string& s) {
    if (s == "inf" || s == "unbounded") return kUnboundedStates;
    int t = std::stoi(s);
    if (t < 2 || t > 64) throw Error("--t must be in 2..64 or 'inf'");
    return t;
}

std::string quartet_split(const Tree& t, const Quartet& q, QuartetTopology topo) {
    auto pairs = topology_pairs(topo);
    auto name = [&](int i) { return t.taxon_name(q.taxa[i]); };
    return name(pairs[0][0]) + "," + name(pairs[0][1]) + "|" + name(pairs[1][0]) + "," +
           name(pairs[1][1]);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"t-state maximum parsimony distance toolkit"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random tree pair");
    int gen_n = 8, gen_moves = 2;
    uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("--n", gen_n, "leaf count (>= 4)")->required();
    gen->add_option("--moves", gen_moves, "number of random TBR moves")->required();
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("-o,--output", gen_out, "output file (two Newick lines)")->required();

    // score
    auto* score = app.add_subcommand("score", "parsimony scores of a character on both trees");
    std::string score_in, score_chars;
    score->add_option("-i,--input", score_in, "pair file")->required();
    score->add_option("-c,--characters", score_chars, "character table (.tsv)")->required();

    // dmp
    auto* dmp = app.add_subcommand("dmp", "exact d_MP^t by character enumeration");
    std::string dmp_in, dmp_t = "2";
    int dmp_cap = 0, dmp_threads = 1;
    dmp->add_option("-i,--input", dmp_in, "pair file")->required();
    dmp->add_option("--t", dmp_t, "state bound (2..64 or 'inf')");
    dmp->add_option("--cap", dmp_cap, "leaf-count cap override");
    dmp->add_option("--threads", dmp_threads, "worker threads for enumeration");

    // dtbr
    auto* dtbr = app.add_subcommand("dtbr", "exact d_TBR");
    std::string dtbr_in, dtbr_method = "hitting";
    int dtbr_cap = 0;
    dtbr->add_option("-i,--input", dtbr_in, "pair file")->required();
    dtbr->add_option("--method", dtbr_method, "hitting | partition");
    dtbr->add_option("--cap", dtbr_cap, "leaf-count cap override");

    // reduce
    auto* reduce = app.add_subcommand("reduce", "cherry/chain kernelization");
    std::string red_in, red_out, red_trace;
    reduce->add_option("-i,--input", red_in, "pair file")->required();
    reduce->add_option("-o,--output", red_out, "kernelized pair file")->required();
    reduce->add_option("--trace", red_trace, "write the reduction trace (JSON)");

    // quartets
    auto* quart = app.add_subcommand("quartets", "incompatible quartets / greedy selection");
    std::string quart_in;
    bool quart_greedy = false;
    quart->add_option("-i,--input", quart_in, "pair file")->required();
    quart->add_flag("--leg-disjoint", quart_greedy, "run the greedy leg-disjoint selector");

    // certify
    auto* certify = app.add_subcommand("certify", "emit a verified lower-bound certificate");
    std::string cert_in, cert_out;
    uint64_t cert_seed = 0;
    certify->add_option("-i,--input", cert_in, "pair file")->required();
    certify->add_option("-o,--output", cert_out, "certificate file (JSON)")->required();
    certify->add_option("--seed", cert_seed, "seed recorded in the certificate metadata");

    // verify
    auto* verify = app.add_subcommand("verify", "independently check a certificate");
    std::string ver_in, ver_cert;
    verify->add_option("-i,--input", ver_in, "pair file")->required();
    verify->add_option("--cert", ver_cert, "certificate file")->required();

    // check-af
    auto* checkaf = app.add_subcommand("check-af", "test whether a partition is an agreement forest");
    std::string af_in, af_part;
    checkaf->add_option("-i,--input", af_in, "pair file")->required();
    checkaf->add_option("--partition", af_part, "one block per line, comma-separated taxa")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            auto [t1, t2] = gen_random_pair(gen_n, gen_moves, gen_seed);
            spit(gen_out, write_newick(t1) + "\n" + write_newick(t2) + "\n");
            return 0;
        }
        if (*score) {
            auto [t1, t2] = load_pair(score_in);
            auto tab = parse_character_table(slurp(score_chars));
            Character f = table_to_character(tab, t1);
            int l1 = parsimony_score(t1, f), l2 = parsimony_score(t2, f);
            if (as_json)
                std::cout << ordered_json{{"l1", l1}, {"l2", l2}}.dump() << "\n";
            else
                std::cout << "l(T1)=" << l1 << " l(T2)=" << l2 << "\n";
            return 0;
        }
        if (*dmp) {
            auto [t1, t2] = load_pair(dmp_in);
            int value = dmp_exact(t1, t2, parse_t_flag(dmp_t), dmp_cap, dmp_threads);
            if (as_json)
                std::cout << ordered_json{{"dmp", value}}.dump() << "\n";
            else
                std::cout << value << "\n";
            return 0;
        }
        if (*dtbr) {
            auto [t1, t2] = load_pair(dtbr_in);
            int value;
            if (dtbr_method == "hitting")
                value = dtbr_hitting_set(t1, t2, dtbr_cap > 0 ? dtbr_cap : 16).value;
            else if (dtbr_method == "partition")
                value = dtbr_partition_oracle(t1, t2, dtbr_cap > 0 ? dtbr_cap : 8);
            else
                throw Error("--method must be 'hitting' or 'partition'");
            if (as_json)
                std::cout << ordered_json{{"dtbr", value}}.dump() << "\n";
            else
                std::cout << value << "\n";
            return 0;
        }
        if (*reduce) {
            auto [t1, t2] = load_pair(red_in);
            auto red = fully_reduce(t1, t2);
            spit(red_out, write_newick(red.t1) + "\n" + write_newick(red.t2) + "\n");
            if (!red_trace.empty()) spit(red_trace, trace_to_json(red.trace));
            if (as_json)
                std::cout << ordered_json{{"initial_leaves", red.trace.initial_leaves},
                                          {"final_leaves", red.trace.final_leaves},
                                          {"steps", red.trace.steps.size()}}
                                 .dump()
                          << "\n";
            else
                std::cout << red.trace.initial_leaves << " -> " << red.trace.final_leaves
                          << " leaves in " << red.trace.steps.size() << " steps\n";
            return 0;
        }
        if (*quart) {
            auto [t1, t2] = load_pair(quart_in);
            if (!quart_greedy) {
                auto qs = incompatible_quartets(t1, t2);
                if (as_json) {
                    ordered_json out = ordered_json::array();
                    for (const Quartet& q : qs)
                        out.push_back({{"t1", quartet_split(t1, q, q.t1)},
                                       {"t2", quartet_split(t1, q, q.t2)}});
                    std::cout << ordered_json{{"count", qs.size()}, {"quartets", out}}.dump()
                              << "\n";
                } else {
                    for (const Quartet& q : qs)
                        std::cout << quartet_split(t1, q, q.t1) << "  vs  "
                                  << quartet_split(t1, q, q.t2) << "\n";
                    std::cout << qs.size() << " incompatible quartets\n";
                }
            } else {
                auto g = greedy_leg_disjoint(t1, t2);
                if (as_json) {
                    ordered_json out = ordered_json::array();
                    for (const Quartet& q : g.quartets)
                        out.push_back(quartet_split(t1, q, q.t1));
                    std::cout << ordered_json{{"total_incompatible", g.total_quartets},
                                              {"selected", out},
                                              {"hitting_set_size", g.hitting.size()}}
                                     .dump()
                              << "\n";
                } else {
                    for (const Quartet& q : g.quartets)
                        std::cout << quartet_split(t1, q, q.t1) << "\n";
                    std::cout << g.quartets.size() << " leg-disjoint quartets, |E'|="
                              << g.hitting.size() << " (of " << g.total_quartets
                              << " incompatible)\n";
                }
            }
            return 0;
        }
        if (*certify) {
            auto [t1, t2] = load_pair(cert_in);
            CertificateDocument c = certified_lower_bound(t1, t2, cert_seed);
            spit(cert_out, write_certificate(c));
            if (as_json)
                std::cout << ordered_json{{"bound", c.claimed_bound},
                                          {"dtbr_upper_bound", c.dtbr_upper_bound},
                                          {"quartets", c.quartets.size()}}
                                 .dump()
                          << "\n";
            else
                std::cout << "d_MP^t >= " << c.claimed_bound << " (any t >= 2), d_TBR <= "
                          << c.dtbr_upper_bound << "\n";
            return 0;
        }
        if (*verify) {
            auto [t1, t2] = load_pair(ver_in);
            CertificateDocument c = read_certificate(slurp(ver_cert));
            VerifyReport rep = verify_certificate(t1, t2, c);
            if (as_json) {
                std::cout << ordered_json{{"verified", rep.ok}, {"failures", rep.failures}}.dump()
                          << "\n";
            } else if (rep.ok) {
                std::cout << "certificate verified: d_MP^t >= " << c.claimed_bound << "\n";
            } else {
                for (const auto& f : rep.failures) std::cout << "FAILED " << f << "\n";
            }
            return rep.ok ? 0 : 1;
        }
        if (*checkaf) {
            auto [t1, t2] = load_pair(af_in);
            std::string text = slurp(af_part);
            std::vector<std::vector<int>> blocks;
            std::string line;
            std::istringstream ss(text);
            while (std::getline(ss, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                std::vector<int> block;
                std::string tok;
                std::istringstream ls(line);
                while (std::getline(ls, tok, ',')) {
                    auto idx = t1.taxon_index(tok);
                    if (!idx) throw Error("partition names unknown taxon '" + tok + "'");
                    block.push_back(*idx);
                }
                blocks.push_back(block);
            }
            AfReport rep = is_agreement_forest(t1, t2, blocks);
            if (as_json) {
                std::cout << ordered_json{{"agreement_forest", rep.ok},
                                          {"violation", rep.violation},
                                          {"block_i", rep.block_i},
                                          {"block_j", rep.block_j}}
                                 .dump()
                          << "\n";
            } else if (rep.ok) {
                std::cout << "agreement forest with " << blocks.size() << " blocks (d_TBR <= "
                          << blocks.size() - 1 << ")\n";
            } else {
                std::cout << "not an agreement forest: " << rep.violation << " (block "
                          << rep.block_i << (rep.block_j >= 0 ? "/" + std::to_string(rep.block_j) : "")
                          << ")\n";
            }
            return rep.ok ? 0 : 1;
        }
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
