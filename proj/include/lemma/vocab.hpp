#ifndef LEMMA_VOCAB_HPP
#define LEMMA_VOCAB_HPP

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "lemma/corpus.hpp"
#include "lemma/lexicon.hpp"

namespace lemma {

// Symbol inventory shared by source, candidate and target sequences.
// Characters are stored raw (one symbol per Unicode scalar); POS and feature
// symbols carry a '\t' prefix so they can never collide with characters.
class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kSos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;
    static constexpr int kSep = 4;
    static constexpr int kCsep = 5;
    static constexpr int kEmpty = 6;
    static constexpr int kNumSpecials = 7;

    Vocab() {
        for (const char* s : {"<pad>", "<s>", "</s>", "<unk>", "<sep>", "<csep>", "<empty>"})
            add(s);
    }

    int add(const std::string& symbol) {
        auto [it, inserted] = index_.emplace(symbol, static_cast<int>(symbols_.size()));
        if (inserted) symbols_.push_back(symbol);
        return it->second;
    }

    int id_or_unk(const std::string& symbol) const {
        auto it = index_.find(symbol);
        return it == index_.end() ? kUnk : it->second;
    }

    int char_id(const std::string& ch) const { return id_or_unk(ch); }
    int tag_id(const std::string& upos) const { return id_or_unk(tag_symbol(upos)); }
    int feat_id(const std::string& kv) const { return id_or_unk(feat_symbol(kv)); }

    static std::string tag_symbol(const std::string& upos) { return "\t" + upos; }
    static std::string feat_symbol(const std::string& kv) { return "\t" + kv; }

    const std::string& symbol(int id) const { return symbols_.at(static_cast<size_t>(id)); }
    int size() const { return static_cast<int>(symbols_.size()); }

    // True for symbols that may appear in a decoded lemma string.
    bool is_output_char(int id) const {
        return id >= kNumSpecials && symbols_[static_cast<size_t>(id)][0] != '\t';
    }

    bool operator==(const Vocab& o) const { return symbols_ == o.symbols_; }

    const std::vector<std::string>& symbols() const { return symbols_; }

    static Vocab from_symbols(const std::vector<std::string>& symbols) {
        Vocab v;
        if (symbols.size() < kNumSpecials) throw std::invalid_argument("vocab missing specials");
        for (int i = 0; i < kNumSpecials; ++i)
            if (symbols[static_cast<size_t>(i)] != v.symbols_[static_cast<size_t>(i)])
                throw std::invalid_argument("vocab specials out of order");
        for (size_t i = kNumSpecials; i < symbols.size(); ++i) v.add(symbols[i]);
        if (v.size() != static_cast<int>(symbols.size()))
            throw std::invalid_argument("duplicate vocab symbols");
        return v;
    }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, int> index_;
};

// Specials first, then characters, POS tags and feature symbols in sorted
// order, so ids are deterministic for a given corpus and provider set.
inline Vocab build_vocab(const Corpus& train,
                         const std::vector<const CandidateProvider*>& providers) {
    std::set<std::string> chars, tags, feats;
    auto add_chars = [&](const std::string& s) {
        for (auto& c : utf8_chars(s)) chars.insert(c);
    };
    for (auto& sent : train.sentences)
        for (auto& tok : sent.tokens) {
            add_chars(tok.form);
            add_chars(tok.lemma);
            tags.insert(tok.upos);
            for (auto& f : tok.feats) feats.insert(f);
            for (auto* p : providers)
                for (auto& cand : p->get(tok.form, tok.upos)) add_chars(cand);
        }
    Vocab v;
    for (auto& c : chars) v.add(c);
    for (auto& t : tags) v.add(Vocab::tag_symbol(t));
    for (auto& f : feats) v.add(Vocab::feat_symbol(f));
    return v;
}

}  // namespace lemma

#endif
