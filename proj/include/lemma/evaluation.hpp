#ifndef LEMMA_EVALUATION_HPP
#define LEMMA_EVALUATION_HPP

#include <cstdio>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lemma/model.hpp"

namespace lemma {

struct EvalReport {
    size_t total = 0;
    size_t correct = 0;
    size_t oov_total = 0;
    size_t oov_correct = 0;
    bool oov_undefined = false;  // no OOV tokens; oov accuracy reported as 1.0

    double accuracy() const { return total == 0 ? 0.0 : double(correct) / double(total); }
    double oov_accuracy() const {
        return oov_total == 0 ? 1.0 : double(oov_correct) / double(oov_total);
    }
    double oov_rate() const { return total == 0 ? 0.0 : double(oov_total) / double(total); }
};

struct PredictionLogEntry {
    std::string form, upos, gold, pred;
    bool oov = false;
};

namespace detail {
inline void check_aligned(const Corpus& pred, const Corpus& gold) {
    if (pred.sentences.size() != gold.sentences.size())
        throw std::invalid_argument("corpora differ in sentence count");
    for (size_t i = 0; i < pred.sentences.size(); ++i)
        if (pred.sentences[i].tokens.size() != gold.sentences[i].tokens.size())
            throw std::invalid_argument("corpora differ in sentence shape");
}
}  // namespace detail

inline double accuracy(const Corpus& pred, const Corpus& gold) {
    detail::check_aligned(pred, gold);
    size_t total = 0, correct = 0;
    for (size_t i = 0; i < pred.sentences.size(); ++i)
        for (size_t j = 0; j < pred.sentences[i].tokens.size(); ++j) {
            ++total;
            if (pred.sentences[i].tokens[j].lemma == gold.sentences[i].tokens[j].lemma) ++correct;
        }
    return total == 0 ? 0.0 : double(correct) / double(total);
}

// OOV tokens are those whose surface form never occurs in train_forms.
inline EvalReport evaluate(const Corpus& pred, const Corpus& gold,
                           const std::unordered_set<std::string>& train_forms,
                           std::vector<PredictionLogEntry>* log = nullptr) {
    detail::check_aligned(pred, gold);
    EvalReport r;
    for (size_t i = 0; i < pred.sentences.size(); ++i)
        for (size_t j = 0; j < pred.sentences[i].tokens.size(); ++j) {
            const Token& p = pred.sentences[i].tokens[j];
            const Token& g = gold.sentences[i].tokens[j];
            bool ok = p.lemma == g.lemma;
            bool oov = train_forms.find(g.form) == train_forms.end();
            ++r.total;
            if (ok) ++r.correct;
            if (oov) {
                ++r.oov_total;
                if (ok) ++r.oov_correct;
            }
            if (log) log->push_back({g.form, g.upos, g.lemma, p.lemma, oov});
        }
    r.oov_undefined = r.oov_total == 0;
    return r;
}

inline std::unordered_set<std::string> collect_forms(const Corpus& corpus) {
    std::unordered_set<std::string> forms;
    for (auto& sent : corpus.sentences)
        for (auto& tok : sent.tokens) forms.insert(tok.form);
    return forms;
}

// ---------------------------------------------------------------------------
// Lookup-first cascade: unique lexicon -> identity/lowercase rule -> decoder.

// Frequency rule fitted on training types per UPOS: identity when at least
// half of the types keep lemma == form, lowercase when lemma == lower(form)
// dominates, otherwise abstain and fall through to the decoder.
class CascadeHeuristic {
public:
    enum class Rule { Identity, Lowercase, Abstain };

    static CascadeHeuristic fit(const Corpus& train) {
        struct Counts {
            size_t total = 0, identity = 0, lowercase = 0;
        };
        std::unordered_map<std::string, Counts> by_pos;
        std::unordered_set<std::string> seen;  // type-level: (form,pos,lemma)
        for (auto& sent : train.sentences)
            for (auto& tok : sent.tokens) {
                if (tok.lemma.empty()) continue;
                std::string key = tok.form + "\x1f" + tok.upos + "\x1f" + tok.lemma;
                if (!seen.insert(key).second) continue;
                auto& c = by_pos[tok.upos];
                ++c.total;
                if (tok.lemma == tok.form) ++c.identity;
                else if (tok.lemma == to_lower(tok.form)) ++c.lowercase;
            }
        CascadeHeuristic h;
        for (auto& [pos, c] : by_pos) {
            if (c.total == 0) continue;
            if (2 * c.identity >= c.total) h.rules_[pos] = Rule::Identity;
            else if (2 * c.lowercase >= c.total) h.rules_[pos] = Rule::Lowercase;
        }
        return h;
    }

    Rule rule_for(const std::string& upos) const {
        auto it = rules_.find(upos);
        return it == rules_.end() ? Rule::Abstain : it->second;
    }

private:
    std::unordered_map<std::string, Rule> rules_;
};

struct CascadeStats {
    size_t lexicon_hits = 0;
    size_t heuristic_hits = 0;
    size_t decoder_calls = 0;
};

inline Corpus cascade_predict(const UniqueLexicon& unique_lex, const CascadeHeuristic& heuristic,
                              const EnhancedLemmatizer& fallback, const Corpus& corpus,
                              CascadeStats* stats = nullptr) {
    Corpus out = corpus;
    EmptyProvider empty;
    for (auto& sent : out.sentences)
        for (auto& tok : sent.tokens) {
            if (const std::string* lemma = unique_lex.find(tok.form, tok.upos)) {
                tok.lemma = *lemma;
                if (stats) ++stats->lexicon_hits;
                continue;
            }
            switch (heuristic.rule_for(tok.upos)) {
                case CascadeHeuristic::Rule::Identity:
                    tok.lemma = tok.form;
                    if (stats) ++stats->heuristic_hits;
                    break;
                case CascadeHeuristic::Rule::Lowercase:
                    tok.lemma = to_lower(tok.form);
                    if (stats) ++stats->heuristic_hits;
                    break;
                case CascadeHeuristic::Rule::Abstain:
                    tok.lemma = fallback.lemmatize(tok, empty);
                    if (stats) ++stats->decoder_calls;
                    break;
            }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Report rendering

struct NamedReport {
    std::string name;
    EvalReport report;
};

// Aligned table with accuracy, OOV accuracy, OOV rate and diffs vs the
// first system.
inline std::string compare_reports(const std::vector<NamedReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("compare_reports: no reports");
    std::string out = "system\tacc\toov_acc\toov_rate\td_acc\td_oov\n";
    char buf[160];
    const EvalReport& base = reports.front().report;
    for (auto& nr : reports) {
        std::snprintf(buf, sizeof(buf), "%s\t%.4f\t%.4f\t%.4f\t%+.4f\t%+.4f\n", nr.name.c_str(),
                      nr.report.accuracy(), nr.report.oov_accuracy(), nr.report.oov_rate(),
                      nr.report.accuracy() - base.accuracy(),
                      nr.report.oov_accuracy() - base.oov_accuracy());
        out += buf;
    }
    return out;
}

inline std::string format_report(const EvalReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "all-words accuracy: %.4f (%zu/%zu)\n"
                  "OOV accuracy:       %.4f (%zu/%zu)%s\n"
                  "OOV rate:           %.4f\n",
                  r.accuracy(), r.correct, r.total, r.oov_accuracy(), r.oov_correct, r.oov_total,
                  r.oov_undefined ? " [no OOV tokens; by convention]" : "", r.oov_rate());
    return buf;
}

}  // namespace lemma

#endif
