#ifndef LEMMA_CORPUS_HPP
#define LEMMA_CORPUS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lemma/utf8.hpp"

namespace lemma {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Token {
    std::string form;
    std::string upos;
    std::vector<std::string> feats;  // "Key=Value", normalized to key order
    std::string lemma;               // may be empty before prediction

    bool operator==(const Token&) const = default;
};

struct Sentence {
    std::vector<Token> tokens;
    bool operator==(const Sentence&) const = default;
};

struct Corpus {
    std::vector<Sentence> sentences;
    std::string origin;

    size_t token_count() const {
        size_t n = 0;
        for (auto& s : sentences) n += s.tokens.size();
        return n;
    }
    bool operator==(const Corpus& o) const { return sentences == o.sentences; }
};

struct FreqList {
    std::vector<std::pair<std::string, uint64_t>> entries;  // count desc, first-occurrence asc
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view feat_key(std::string_view kv) {
    size_t eq = kv.find('=');
    return eq == std::string_view::npos ? kv : kv.substr(0, eq);
}

// Split FEATS on '|', sort by key, drop duplicate keys keeping first.
inline std::vector<std::string> normalize_feats(std::string_view raw) {
    if (raw.empty() || raw == "_") return {};
    auto parts = split(raw, '|');
    std::stable_sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
        return feat_key(a) < feat_key(b);
    });
    std::vector<std::string> out;
    for (auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty() && feat_key(out.back()) == feat_key(p)) continue;
        out.push_back(std::move(p));
    }
    return out;
}

inline bool has_whitespace(std::string_view s) {
    return s.find(' ') != std::string_view::npos || s.find('\t') != std::string_view::npos;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CoNLL-U

inline Corpus parse_conllu(std::string_view text, std::string origin = "") {
    Corpus corpus;
    corpus.origin = std::move(origin);
    Sentence current;
    size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!current.tokens.empty()) {
                corpus.sentences.push_back(std::move(current));
                current = {};
            }
            continue;
        }
        if (line[0] == '#') continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() != 10)
            throw ParseError("line " + std::to_string(line_no) + ": expected 10 columns, got " +
                             std::to_string(cols.size()));
        const std::string& id = cols[0];
        if (id.find('-') != std::string::npos || id.find('.') != std::string::npos)
            continue;  // multiword ranges and empty nodes
        Token t;
        t.form = cols[1];
        t.lemma = cols[2] == "_" ? "" : cols[2];
        t.upos = cols[3] == "_" ? "" : cols[3];
        t.feats = detail::normalize_feats(cols[5]);
        current.tokens.push_back(std::move(t));
    }
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    return corpus;
}

inline std::string write_conllu(const Corpus& corpus) {
    std::string out;
    for (auto& sent : corpus.sentences) {
        int id = 0;
        for (auto& t : sent.tokens) {
            if (t.form.empty()) throw std::invalid_argument("token with empty form");
            ++id;
            std::string feats;
            for (auto& f : t.feats) {
                if (!feats.empty()) feats += '|';
                feats += f;
            }
            out += std::to_string(id);
            out += '\t';
            out += t.form;
            out += '\t';
            out += t.lemma.empty() ? "_" : t.lemma;
            out += '\t';
            out += t.upos.empty() ? "_" : t.upos;
            out += "\t_\t";
            out += feats.empty() ? "_" : feats;
            out += "\t_\t_\t_\t_\n";
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Unimorph tables: lemma <TAB> form <TAB> features

struct UnimorphEntry {
    std::string lemma;
    std::string form;
    std::string features;
    bool operator==(const UnimorphEntry&) const = default;
};

struct UnimorphTable {
    std::vector<UnimorphEntry> entries;
    size_t skipped_short = 0;       // lines with fewer than 3 fields
    size_t discarded_multiword = 0; // form or lemma with internal whitespace
};

inline UnimorphTable parse_unimorph(std::string_view text) {
    UnimorphTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() < 3) {
            ++table.skipped_short;
            continue;
        }
        if (detail::has_whitespace(cols[0]) || detail::has_whitespace(cols[1])) {
            ++table.discarded_multiword;
            continue;
        }
        table.entries.push_back({cols[0], cols[1], cols[2]});
    }
    return table;
}

// ---------------------------------------------------------------------------
// Candidate TSV: form <TAB> [pos <TAB>] lemma1,lemma2,...

struct CandidateEntry {
    std::string form;
    std::optional<std::string> pos;
    std::vector<std::string> lemmas;  // source order, first-kept dedup
    bool operator==(const CandidateEntry&) const = default;
};

struct CandidateTable {
    std::vector<CandidateEntry> entries;
    size_t skipped_empty = 0;  // lines with an empty lemma field
};

inline CandidateTable parse_candidate_tsv(std::string_view text) {
    CandidateTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() < 2 || cols[0].empty()) {
            ++table.skipped_empty;
            continue;
        }
        CandidateEntry e;
        e.form = cols[0];
        const std::string* lemma_field = &cols[1];
        if (cols.size() >= 3) {
            e.pos = cols[1];
            lemma_field = &cols[2];
        }
        if (lemma_field->empty()) {
            ++table.skipped_empty;
            continue;
        }
        for (auto& lemma : detail::split(*lemma_field, ',')) {
            if (lemma.empty()) continue;
            if (std::find(e.lemmas.begin(), e.lemmas.end(), lemma) == e.lemmas.end())
                e.lemmas.push_back(lemma);
        }
        if (e.lemmas.empty()) {
            ++table.skipped_empty;
            continue;
        }
        table.entries.push_back(std::move(e));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Frequency lists

enum class FreqMode { Tsv, RawText };

inline FreqList parse_freq_list(std::string_view text, FreqMode mode) {
    std::vector<std::pair<std::string, uint64_t>> acc;  // first-occurrence order
    std::unordered_map<std::string, size_t> index;
    auto bump = [&](const std::string& word, uint64_t count) {
        auto it = index.find(word);
        if (it == index.end()) {
            index.emplace(word, acc.size());
            acc.emplace_back(word, count);
        } else {
            acc[it->second].second += count;
        }
    };
    std::istringstream in{std::string(text)};
    if (mode == FreqMode::RawText) {
        std::string word;
        while (in >> word) bump(word, 1);
    } else {
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto cols = detail::split(line, '\t');
            if (cols.size() != 2)
                throw ParseError("freq line " + std::to_string(line_no) + ": expected word<TAB>count");
            uint64_t count = 0;
            try {
                size_t pos = 0;
                long long v = std::stoll(cols[1], &pos);
                if (pos != cols[1].size() || v <= 0) throw std::invalid_argument("count");
                count = static_cast<uint64_t>(v);
            } catch (const std::exception&) {
                throw ParseError("freq line " + std::to_string(line_no) + ": bad count '" + cols[1] + "'");
            }
            bump(cols[0], count);
        }
    }
    // stable sort keeps first-occurrence order among equal counts
    std::stable_sort(acc.begin(), acc.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return FreqList{std::move(acc)};
}

}  // namespace lemma

#endif
