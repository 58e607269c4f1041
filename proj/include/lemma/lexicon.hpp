#ifndef LEMMA_LEXICON_HPP
#define LEMMA_LEXICON_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lemma/corpus.hpp"

namespace lemma {

namespace detail {
struct PairHash {
    size_t operator()(const std::pair<std::string, std::string>& p) const {
        return std::hash<std::string>{}(p.first) * 1000003u ^ std::hash<std::string>{}(p.second);
    }
};
}  // namespace detail

// Two-level lookup built from the training corpus: (form, upos) -> lemmas
// and form -> lemmas, lemma order = first occurrence in the corpus.
class TrainingLexicon {
public:
    void insert(const std::string& form, const std::string& upos, const std::string& lemma) {
        append_unique(by_form_pos_[{form, upos}], lemma);
        append_unique(by_form_[form], lemma);
    }

    const std::vector<std::string>* find_form_pos(const std::string& form,
                                                  const std::string& upos) const {
        auto it = by_form_pos_.find({form, upos});
        return it == by_form_pos_.end() ? nullptr : &it->second;
    }
    const std::vector<std::string>* find_form(const std::string& form) const {
        auto it = by_form_.find(form);
        return it == by_form_.end() ? nullptr : &it->second;
    }

    bool contains_form(const std::string& form) const { return by_form_.count(form) > 0; }
    size_t form_pos_size() const { return by_form_pos_.size(); }
    size_t form_size() const { return by_form_.size(); }

    // Sorted TSV (form, upos, comma-joined lemmas) for inspection.
    std::string to_tsv() const {
        std::map<std::pair<std::string, std::string>, const std::vector<std::string>*> sorted;
        for (auto& [key, lemmas] : by_form_pos_) sorted[key] = &lemmas;
        std::string out;
        for (auto& [key, lemmas] : sorted) {
            out += key.first;
            out += '\t';
            out += key.second;
            out += '\t';
            for (size_t i = 0; i < lemmas->size(); ++i) {
                if (i) out += ',';
                out += (*lemmas)[i];
            }
            out += '\n';
        }
        return out;
    }

private:
    static void append_unique(std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    }

    std::unordered_map<std::pair<std::string, std::string>, std::vector<std::string>,
                       detail::PairHash>
        by_form_pos_;
    std::unordered_map<std::string, std::vector<std::string>> by_form_;
};

inline TrainingLexicon build_training_lexicon(const Corpus& corpus) {
    TrainingLexicon lex;
    for (auto& sent : corpus.sentences)
        for (auto& tok : sent.tokens)
            if (!tok.lemma.empty()) lex.insert(tok.form, tok.upos, tok.lemma);
    return lex;
}

// (form, pos) first, then form alone, else empty.
inline std::vector<std::string> lookup_cascade(const TrainingLexicon& lex, const std::string& form,
                                               const std::string& upos) {
    if (auto* v = lex.find_form_pos(form, upos); v && !v->empty()) return *v;
    if (auto* v = lex.find_form(form); v && !v->empty()) return *v;
    return {};
}

// Strips Apertium-style annotation (<...> tag spans and the marker characters
// below), drops empties, dedups keeping first occurrence.
struct CandidateNormalizer {
    std::string marker_chars = "#+~";

    std::string strip(const std::string& raw) const {
        std::string out;
        bool in_tag = false;
        for (char c : raw) {
            if (in_tag) {
                if (c == '>') in_tag = false;
                continue;
            }
            if (c == '<') {
                in_tag = true;
                continue;
            }
            if (marker_chars.find(c) != std::string::npos) continue;
            out += c;
        }
        return out;
    }

    std::vector<std::string> operator()(const std::vector<std::string>& raw) const {
        std::vector<std::string> out;
        for (auto& r : raw) {
            std::string s = strip(r);
            if (s.empty()) continue;
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
        }
        return out;
    }
};

inline std::vector<std::string> normalize_candidates(const std::vector<std::string>& raw,
                                                     const CandidateNormalizer& norm = {}) {
    return norm(raw);
}

// ---------------------------------------------------------------------------
// Candidate providers

class CandidateProvider {
public:
    virtual ~CandidateProvider() = default;
    // Normalized, duplicate-free, deterministic candidate list.
    virtual std::vector<std::string> get(const std::string& form, const std::string& upos) const = 0;
    virtual std::string describe() const = 0;
};

class EmptyProvider final : public CandidateProvider {
public:
    std::vector<std::string> get(const std::string&, const std::string&) const override { return {}; }
    std::string describe() const override { return "none"; }
};

class TrainingLexiconProvider final : public CandidateProvider {
public:
    explicit TrainingLexiconProvider(TrainingLexicon lex, CandidateNormalizer norm = {})
        : lex_(std::move(lex)), norm_(std::move(norm)) {}

    std::vector<std::string> get(const std::string& form, const std::string& upos) const override {
        return norm_(lookup_cascade(lex_, form, upos));
    }
    std::string describe() const override { return "training-lexicon"; }

    const TrainingLexicon& lexicon() const { return lex_; }

private:
    TrainingLexicon lex_;
    CandidateNormalizer norm_;
};

// Exact surface-form match against a Unimorph table; POS is ignored.
class UnimorphProvider final : public CandidateProvider {
public:
    explicit UnimorphProvider(const UnimorphTable& table, CandidateNormalizer norm = {})
        : norm_(std::move(norm)) {
        for (auto& e : table.entries) {
            auto& v = by_form_[e.form];
            if (std::find(v.begin(), v.end(), e.lemma) == v.end()) v.push_back(e.lemma);
        }
    }

    std::vector<std::string> get(const std::string& form, const std::string&) const override {
        auto it = by_form_.find(form);
        if (it == by_form_.end()) return {};
        return norm_(it->second);
    }
    std::string describe() const override { return "unimorph-table"; }

private:
    std::unordered_map<std::string, std::vector<std::string>> by_form_;
    CandidateNormalizer norm_;
};

// Precompiled candidate file; entries with a POS column match (form, pos),
// entries without match any POS for that form.
class CandidateFileProvider final : public CandidateProvider {
public:
    explicit CandidateFileProvider(const CandidateTable& table, CandidateNormalizer norm = {})
        : norm_(std::move(norm)) {
        for (auto& e : table.entries) {
            if (e.pos)
                merge(by_form_pos_[{e.form, *e.pos}], e.lemmas);
            else
                merge(by_form_[e.form], e.lemmas);
        }
    }

    std::vector<std::string> get(const std::string& form, const std::string& upos) const override {
        if (auto it = by_form_pos_.find({form, upos}); it != by_form_pos_.end())
            return norm_(it->second);
        if (auto it = by_form_.find(form); it != by_form_.end()) return norm_(it->second);
        return {};
    }
    std::string describe() const override { return "candidate-file"; }

private:
    static void merge(std::vector<std::string>& v, const std::vector<std::string>& add) {
        for (auto& s : add)
            if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    }

    std::unordered_map<std::pair<std::string, std::string>, std::vector<std::string>,
                       detail::PairHash>
        by_form_pos_;
    std::unordered_map<std::string, std::vector<std::string>> by_form_;
    CandidateNormalizer norm_;
};

// Concatenates child results in configuration order, then dedups.
class CompositeProvider final : public CandidateProvider {
public:
    explicit CompositeProvider(std::vector<std::shared_ptr<CandidateProvider>> children)
        : children_(std::move(children)) {}

    std::vector<std::string> get(const std::string& form, const std::string& upos) const override {
        std::vector<std::string> out;
        for (auto& child : children_)
            for (auto& c : child->get(form, upos))
                if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        return out;
    }
    std::string describe() const override {
        std::string s = "composite(";
        for (size_t i = 0; i < children_.size(); ++i) {
            if (i) s += ',';
            s += children_[i]->describe();
        }
        return s + ")";
    }

private:
    std::vector<std::shared_ptr<CandidateProvider>> children_;
};

inline std::vector<std::string> get_candidates(const CandidateProvider& provider,
                                               const std::string& form, const std::string& upos) {
    return provider.get(form, upos);
}

// ---------------------------------------------------------------------------
// Unique lexicon (one lemma per (form, upos); first entry wins)

class UniqueLexicon {
public:
    const std::string* find(const std::string& form, const std::string& upos) const {
        auto it = map_.find({form, upos});
        return it == map_.end() ? nullptr : &it->second;
    }
    bool insert_if_absent(const std::string& form, const std::string& upos,
                          const std::string& lemma) {
        return map_.emplace(std::make_pair(form, upos), lemma).second;
    }
    size_t size() const { return map_.size(); }

    const std::unordered_map<std::pair<std::string, std::string>, std::string, detail::PairHash>&
    items() const {
        return map_;
    }

private:
    std::unordered_map<std::pair<std::string, std::string>, std::string, detail::PairHash> map_;
};

struct LexEntry {
    std::string form, upos, lemma;
};

// Existing keys are never overwritten; among new duplicate keys the first wins.
inline UniqueLexicon extend_unique(UniqueLexicon base, const std::vector<LexEntry>& entries) {
    for (auto& e : entries) base.insert_if_absent(e.form, e.upos, e.lemma);
    return base;
}

struct CandidateStats {
    double mean_per_token = 0.0;     // over all token instances
    double mean_per_covered = 0.0;   // over tokens with >= 1 candidate (0 if none)
    double coverage = 0.0;           // fraction of tokens with >= 1 candidate
};

inline CandidateStats candidate_stats(const Corpus& corpus, const CandidateProvider& provider) {
    size_t total = 0, covered = 0, candidates = 0;
    for (auto& sent : corpus.sentences)
        for (auto& tok : sent.tokens) {
            ++total;
            size_t n = provider.get(tok.form, tok.upos).size();
            candidates += n;
            if (n > 0) ++covered;
        }
    CandidateStats st;
    if (total > 0) {
        st.mean_per_token = double(candidates) / double(total);
        st.coverage = double(covered) / double(total);
    }
    if (covered > 0) st.mean_per_covered = double(candidates) / double(covered);
    return st;
}

}  // namespace lemma

#endif
