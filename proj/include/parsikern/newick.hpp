#pragma once

// Newick parsing/serialization and TSV character tables. Writing is canonical
// and byte-deterministic; parsing accepts branch lengths (discarded), skips
// [bracket] comments, drops internal labels with a warning, and unroots a
// degree-2 synthetic root.

#include "parsikern/tree.hpp"

#include <cstdlib>
#include <string>
#include <vector>

namespace parsikern {

class NewickParseError : public Error {
public:
    NewickParseError(const std::string& msg, size_t offset)
        : Error(msg + " at byte " + std::to_string(offset)), offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

namespace detail {

struct NewickParser {
    const std::string& s;
    size_t pos = 0;
    int next_id = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::pair<int, std::string>> labels;
    std::vector<std::string>* warnings;

    explicit NewickParser(const std::string& text, std::vector<std::string>* warn)
        : s(text), warnings(warn) {}

    void skip() {
        while (pos < s.size()) {
            char c = s[pos];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos;
            } else if (c == '[') {
                size_t close = s.find(']', pos);
                if (close == std::string::npos) throw NewickParseError("unterminated comment", pos);
                pos = close + 1;
            } else {
                break;
            }
        }
    }

    bool label_char(char c) const {
        return c != '(' && c != ')' && c != ',' && c != ';' && c != ':' && c != '[' && c != ']' &&
               c != ' ' && c != '\t' && c != '\n' && c != '\r';
    }

    std::string read_label() {
        std::string out;
        while (pos < s.size() && label_char(s[pos])) out += s[pos++];
        return out;
    }

    void read_branch_length() {
        skip();
        if (pos < s.size() && s[pos] == ':') {
            ++pos;
            skip();
            const char* start = s.c_str() + pos;
            char* end = nullptr;
            std::strtod(start, &end);
            if (end == start) throw NewickParseError("expected branch length", pos);
            pos += end - start;
        }
    }

    // Returns (vertex id, number of children).
    std::pair<int, int> subtree() {
        skip();
        if (pos >= s.size()) throw NewickParseError("unexpected end of input", pos);
        if (s[pos] == '(') {
            size_t open = pos;
            ++pos;
            int id = next_id++;
            int children = 0;
            while (true) {
                auto [cid, _] = subtree();
                edges.push_back({id, cid});
                ++children;
                skip();
                if (pos >= s.size()) throw NewickParseError("expected ',' or ')'", pos);
                if (s[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (s[pos] == ')') {
                    ++pos;
                    break;
                }
                throw NewickParseError("expected ',' or ')'", pos);
            }
            if (children < 1) throw NewickParseError("empty group", open);
            skip();
            std::string lbl = read_label();
            if (!lbl.empty() && warnings)
                warnings->push_back("internal label '" + lbl + "' dropped");
            read_branch_length();
            return {id, children};
        }
        size_t at = pos;
        std::string lbl = read_label();
        if (lbl.empty()) throw NewickParseError("expected leaf label", at);
        for (auto& [v, name] : labels)
            if (name == lbl) throw NewickParseError("duplicate leaf label '" + lbl + "'", at);
        int id = next_id++;
        labels.push_back({id, lbl});
        read_branch_length();
        return {id, 0};
    }
};

} // namespace detail

inline Tree parse_newick(const std::string& text, std::vector<std::string>* warnings = nullptr) {
    detail::NewickParser p(text, warnings);
    auto [root, children] = p.subtree();
    p.skip();
    if (p.pos >= p.s.size() || p.s[p.pos] != ';')
        throw NewickParseError("expected ';'", p.pos);
    ++p.pos;
    p.skip();
    if (p.pos != p.s.size()) throw NewickParseError("trailing characters after ';'", p.pos);

    auto edges = p.edges;
    int n = p.next_id;
    if (children == 1) throw NewickParseError("root with a single child", 0);
    if (children == 2) {
        // suppress the synthetic degree-2 root
        int c1 = -1, c2 = -1;
        std::vector<std::pair<int, int>> rest;
        for (auto& [u, v] : edges) {
            if (u == root) {
                (c1 < 0 ? c1 : c2) = v;
            } else {
                rest.push_back({u, v});
            }
        }
        rest.push_back({c1, c2});
        // compact ids (root was id 0 when the input is a group)
        std::vector<int> dense(n, -1);
        int m = 0;
        for (int v = 0; v < n; ++v)
            if (v != root) dense[v] = m++;
        for (auto& [u, v] : rest) {
            u = dense[u];
            v = dense[v];
        }
        std::vector<std::pair<int, std::string>> labels;
        for (auto& [v, name] : p.labels) labels.push_back({dense[v], name});
        return Tree(m, rest, labels);
    }
    return Tree(n, edges, p.labels);
}

// Canonical, deterministic Newick; parse(write(T)) is isomorphic to T.
inline std::string write_newick(const Tree& t) { return canonical_newick(t); }

// ---------------------------------------------------------------------------
// character tables: "taxon<TAB>state" per line, no header

struct CharacterTable {
    std::vector<std::pair<std::string, std::string>> rows; // (taxon, state token)
    std::vector<std::string> alphabet;                     // distinct tokens, sorted
    int declared_t = 0;                                    // 0 = none declared
};

inline CharacterTable parse_character_table(const std::string& text, int declared_t = 0) {
    CharacterTable tab;
    tab.declared_t = declared_t;
    size_t pos = 0, lineno = 0;
    std::set<std::string> seen, states;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line =
            (nl == std::string::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) {
            size_t tabpos = line.find('\t');
            if (tabpos == std::string::npos)
                throw Error("character table line " + std::to_string(lineno) + ": missing tab");
            std::string taxon = line.substr(0, tabpos);
            std::string state = line.substr(tabpos + 1);
            if (taxon.empty()) throw Error("character table line " + std::to_string(lineno) +
                                           ": empty taxon");
            if (state.empty()) throw Error("character table line " + std::to_string(lineno) +
                                           ": empty state token");
            if (!seen.insert(taxon).second)
                throw Error("character table: duplicate taxon '" + taxon + "'");
            states.insert(state);
            tab.rows.push_back({taxon, state});
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    tab.alphabet.assign(states.begin(), states.end());
    if (declared_t > 0 && (int)tab.alphabet.size() > declared_t)
        throw Error("character table: " + std::to_string(tab.alphabet.size()) +
                    " states exceed declared t=" + std::to_string(declared_t));
    return tab;
}

} // namespace parsikern
