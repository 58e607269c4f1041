#ifndef LEMMA_AUGMENTATION_HPP
#define LEMMA_AUGMENTATION_HPP

#include <algorithm>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lemma/corpus.hpp"
#include "lemma/evaluation.hpp"
#include "lemma/lexicon.hpp"

namespace lemma {

struct Analysis {
    std::string lemma;
    std::string upos;
    std::vector<std::string> feats;  // normalized key order

    bool operator==(const Analysis&) const = default;
};

class AnalysisProvider {
public:
    virtual ~AnalysisProvider() = default;
    virtual std::vector<Analysis> analyses(const std::string& word) const = 0;
};

// Analysis TSV: form <TAB> lemma <TAB> upos <TAB> feats ("|"-joined or "_");
// multiple lines per form give multiple analyses.
class AnalysisFileProvider final : public AnalysisProvider {
public:
    static AnalysisFileProvider parse(std::string_view text) {
        AnalysisFileProvider p;
        std::istringstream in{std::string(text)};
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto cols = detail::split(line, '\t');
            if (cols.size() < 3)
                throw ParseError("analysis line " + std::to_string(line_no) +
                                 ": expected form<TAB>lemma<TAB>upos[<TAB>feats]");
            Analysis a{cols[1], cols[2],
                       cols.size() >= 4 ? detail::normalize_feats(cols[3]) : std::vector<std::string>{}};
            auto& v = p.by_form_[cols[0]];
            if (std::find(v.begin(), v.end(), a) == v.end()) v.push_back(std::move(a));
        }
        return p;
    }

    std::vector<Analysis> analyses(const std::string& word) const override {
        auto it = by_form_.find(word);
        return it == by_form_.end() ? std::vector<Analysis>{} : it->second;
    }

private:
    std::unordered_map<std::string, std::vector<Analysis>> by_form_;
};

// Lemma-only mode over a plain candidate provider, for candidate files that
// carry no tags. Ambiguity then reduces to >1 distinct lemma.
class LemmaOnlyAnalysisProvider final : public AnalysisProvider {
public:
    explicit LemmaOnlyAnalysisProvider(std::shared_ptr<const CandidateProvider> provider,
                                       std::string upos = "X")
        : provider_(std::move(provider)), upos_(std::move(upos)) {}

    std::vector<Analysis> analyses(const std::string& word) const override {
        std::vector<Analysis> out;
        for (auto& lemma : provider_->get(word, ""))
            out.push_back({lemma, upos_, {}});
        return out;
    }

private:
    std::shared_ptr<const CandidateProvider> provider_;
    std::string upos_;
};

struct AugmentConfig {
    size_t k = 8000;

    void validate() const {
        if (k < 1) throw std::invalid_argument("K must be >= 1");
    }
};

struct SelectionLogEntry {
    size_t rank = 0;  // 1-based position in the frequency list
    std::string word;
    std::string lemma;      // set when selected
    std::string skip_reason;  // "in-training-set" | "no-analysis" | "ambiguous"; empty when selected
};

struct AugmentResult {
    Corpus corpus;  // original sentences first, then one sentence per selected word
    std::vector<SelectionLogEntry> log;
    size_t selected = 0;

    std::string log_tsv() const {
        std::string out = "rank\tword\tlemma\treason\n";
        for (auto& e : log) {
            out += std::to_string(e.rank);
            out += '\t';
            out += e.word;
            out += '\t';
            out += e.lemma.empty() ? "-" : e.lemma;
            out += '\t';
            out += e.skip_reason.empty() ? "selected" : e.skip_reason;
            out += '\n';
        }
        return out;
    }
};

// Walks the frequency list in rank order, keeps the first K words that are
// unseen in training and have exactly one distinct analysis, and appends
// each as a single-token sentence.
inline AugmentResult augment(const FreqList& freq, const Corpus& train,
                             const AnalysisProvider& provider, const AugmentConfig& cfg) {
    cfg.validate();
    auto train_forms = collect_forms(train);
    AugmentResult result;
    result.corpus = train;
    for (size_t rank = 0; rank < freq.entries.size() && result.selected < cfg.k; ++rank) {
        const std::string& word = freq.entries[rank].first;
        SelectionLogEntry entry{rank + 1, word, "", ""};
        if (train_forms.count(word)) {
            entry.skip_reason = "in-training-set";
            result.log.push_back(std::move(entry));
            continue;
        }
        auto analyses = provider.analyses(word);
        std::vector<Analysis> distinct;
        for (auto& a : analyses)
            if (std::find(distinct.begin(), distinct.end(), a) == distinct.end())
                distinct.push_back(a);
        if (distinct.empty()) {
            entry.skip_reason = "no-analysis";
        } else if (distinct.size() > 1) {
            entry.skip_reason = "ambiguous";
        } else {
            const Analysis& a = distinct.front();
            entry.lemma = a.lemma;
            Sentence s;
            s.tokens.push_back({word, a.upos, a.feats, a.lemma});
            result.corpus.sentences.push_back(std::move(s));
            ++result.selected;
        }
        result.log.push_back(std::move(entry));
    }
    return result;
}

}  // namespace lemma

#endif
