#pragma once

// Lower-bound certificate documents: a leg-disjoint incompatible quartet list,
// a two-state witness character, and the claimed bound, packaged as a single
// JSON document ("certificate_v1") that can be re-checked independently of the
// construction code.

#include "parsikern/tree.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace parsikern {

struct CertificateQuartet {
    std::array<std::string, 4> taxa;                          // sorted
    std::array<std::array<std::string, 2>, 2> split_t1;       // legs in T1
    std::array<std::array<std::string, 2>, 2> split_t2;       // legs in T2
};

struct CertificateDocument {
    std::string version = "certificate_v1";
    std::string tree1_hash, tree2_hash;
    bool swapped = false; // if true, the second input plays T1 (the legs tree)
    std::vector<CertificateQuartet> quartets;
    std::vector<std::pair<std::string, int>> character; // (taxon, state 0/1), sorted
    int claimed_bound = 0;
    int dtbr_upper_bound = 0;
    std::string tool = "parsikern";
    std::string tool_version = "0.1.0";
    uint64_t seed = 0;
    std::string note; // unknown top-level fields seen on read
};

namespace detail {

inline nlohmann::ordered_json split_to_json(const std::array<std::array<std::string, 2>, 2>& s) {
    return nlohmann::ordered_json::array(
        {nlohmann::ordered_json::array({s[0][0], s[0][1]}),
         nlohmann::ordered_json::array({s[1][0], s[1][1]})});
}

inline std::array<std::array<std::string, 2>, 2> split_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2)
        throw Error("certificate: malformed split");
    return {{{j[0][0].get<std::string>(), j[0][1].get<std::string>()},
             {j[1][0].get<std::string>(), j[1][1].get<std::string>()}}};
}

} // namespace detail

inline std::string write_certificate(const CertificateDocument& c) {
    nlohmann::ordered_json j;
    j["version"] = c.version;
    j["tree1_hash"] = c.tree1_hash;
    j["tree2_hash"] = c.tree2_hash;
    j["orientation"] = c.swapped ? "swapped" : "forward";
    j["quartets"] = nlohmann::ordered_json::array();
    for (const auto& q : c.quartets) {
        nlohmann::ordered_json qj;
        qj["taxa"] = nlohmann::ordered_json::array({q.taxa[0], q.taxa[1], q.taxa[2], q.taxa[3]});
        qj["t1"] = detail::split_to_json(q.split_t1);
        qj["t2"] = detail::split_to_json(q.split_t2);
        j["quartets"].push_back(qj);
    }
    nlohmann::ordered_json ch = nlohmann::ordered_json::object();
    for (const auto& [name, state] : c.character) ch[name] = state;
    j["character"] = ch;
    j["claimed_bound"] = c.claimed_bound;
    j["dtbr_upper_bound"] = c.dtbr_upper_bound;
    j["metadata"] = {{"tool", c.tool}, {"tool_version", c.tool_version}, {"seed", c.seed}};
    if (!c.note.empty()) j["metadata"]["note"] = c.note;
    return j.dump(2) + "\n";
}

inline CertificateDocument read_certificate(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(std::string("certificate: invalid JSON: ") + e.what());
    }
    CertificateDocument c;
    const std::vector<std::string> known = {"version",       "tree1_hash",      "tree2_hash",
                                            "orientation",   "quartets",        "character",
                                            "claimed_bound", "dtbr_upper_bound", "metadata"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            if (!c.note.empty()) c.note += ",";
            c.note += "ignored field '" + it.key() + "'";
        }
    }
    if (!j.contains("version") || j["version"] != "certificate_v1")
        throw Error("certificate: missing or unsupported version");
    c.version = j["version"].get<std::string>();
    c.tree1_hash = j.value("tree1_hash", "");
    c.tree2_hash = j.value("tree2_hash", "");
    std::string orient = j.value("orientation", "forward");
    if (orient != "forward" && orient != "swapped")
        throw Error("certificate: bad orientation '" + orient + "'");
    c.swapped = (orient == "swapped");
    if (!j.contains("quartets") || !j["quartets"].is_array())
        throw Error("certificate: missing quartet list");
    for (const auto& qj : j["quartets"]) {
        CertificateQuartet q;
        if (!qj.contains("taxa") || !qj["taxa"].is_array() || qj["taxa"].size() != 4)
            throw Error("certificate: quartet needs exactly 4 taxa");
        for (int i = 0; i < 4; ++i) q.taxa[i] = qj["taxa"][i].get<std::string>();
        if (!qj.contains("t1") || !qj.contains("t2"))
            throw Error("certificate: quartet missing topologies");
        q.split_t1 = detail::split_from_json(qj["t1"]);
        q.split_t2 = detail::split_from_json(qj["t2"]);
        c.quartets.push_back(q);
    }
    if (!j.contains("character") || !j["character"].is_object())
        throw Error("certificate: missing character");
    for (auto it = j["character"].begin(); it != j["character"].end(); ++it) {
        if (!it.value().is_number_integer()) throw Error("certificate: character state not an integer");
        c.character.push_back({it.key(), it.value().get<int>()});
    }
    std::sort(c.character.begin(), c.character.end());
    if (!j.contains("claimed_bound") || !j["claimed_bound"].is_number_integer())
        throw Error("certificate: missing claimed_bound");
    c.claimed_bound = j["claimed_bound"].get<int>();
    if (c.claimed_bound < 0) throw Error("certificate: claimed_bound is negative");
    c.dtbr_upper_bound = j.value("dtbr_upper_bound", 0);
    if (j.contains("metadata") && j["metadata"].is_object()) {
        c.tool = j["metadata"].value("tool", "");
        c.tool_version = j["metadata"].value("tool_version", "");
        c.seed = j["metadata"].value("seed", (uint64_t)0);
        if (c.note.empty()) c.note = j["metadata"].value("note", "");
    }
    return c;
}

} // namespace parsikern
