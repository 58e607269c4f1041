#ifndef LEMMA_MODEL_HPP
#define LEMMA_MODEL_HPP

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lemma/corpus.hpp"
#include "lemma/layers.hpp"
#include "lemma/lexicon.hpp"
#include "lemma/serialize.hpp"
#include "lemma/vocab.hpp"

namespace lemma {

struct ModelConfig {
    int emb_dim = 64;         // shared character/tag embedding size
    int enc_hidden = 128;     // per direction, both encoders
    int dec_hidden = 256;
    double encoder_dropout_p = 0.0;  // batch-level candidate drop probability
    double dropout = 0.3;            // standard dropout on embeddings / decoder output
    bool use_feats = true;
    int max_decode_extra = 20;
    uint64_t seed = 12345;

    void validate() const {
        if (emb_dim <= 0 || enc_hidden <= 0 || dec_hidden <= 0 || max_decode_extra < 0)
            throw std::invalid_argument("model dims must be positive");
        if (encoder_dropout_p < 0.0 || encoder_dropout_p > 1.0 || dropout < 0.0 || dropout >= 1.0)
            throw std::invalid_argument("dropout probabilities out of range");
    }
};

// One training/inference example: encoder-1 symbols (form + tag section),
// encoder-2 symbols (candidates or <empty>), target lemma in <s>...</s>.
struct Instance {
    std::vector<int> source;
    std::vector<int> candidates;
    std::vector<int> target;

    bool operator==(const Instance&) const = default;
};

inline std::vector<int> encode_source(const Token& tok, const Vocab& vocab, bool use_feats) {
    std::vector<int> ids;
    for (auto& c : utf8_chars(tok.form)) ids.push_back(vocab.char_id(c));
    ids.push_back(Vocab::kSep);
    ids.push_back(vocab.tag_id(tok.upos));
    if (use_feats)
        for (auto& f : tok.feats) ids.push_back(vocab.feat_id(f));
    return ids;
}

inline std::vector<int> encode_candidates(const std::vector<std::string>& cands,
                                          const Vocab& vocab) {
    if (cands.empty()) return {Vocab::kEmpty};
    std::vector<int> ids;
    for (size_t i = 0; i < cands.size(); ++i) {
        if (i) ids.push_back(Vocab::kCsep);
        for (auto& c : utf8_chars(cands[i])) ids.push_back(vocab.char_id(c));
    }
    return ids;
}

inline std::vector<int> encode_target(const std::string& lemma, const Vocab& vocab) {
    std::vector<int> ids{Vocab::kSos};
    for (auto& c : utf8_chars(lemma)) ids.push_back(vocab.char_id(c));
    ids.push_back(Vocab::kEos);
    return ids;
}

// One Bernoulli draw per batch; on a drop every instance's candidate
// sequence becomes [<empty>].
inline void apply_encoder_dropout(std::vector<Instance>& batch, double p, std::mt19937_64& rng) {
    if (p <= 0.0) return;
    std::bernoulli_distribution drop(p);
    if (!drop(rng)) return;
    for (auto& ins : batch) ins.candidates = {Vocab::kEmpty};
}

// Records attention weights per decode step, for invariant checks.
struct DecodeTrace {
    std::vector<std::vector<double>> source_attention;
    std::vector<std::vector<double>> candidate_attention;
};

class EnhancedLemmatizer {
public:
    EnhancedLemmatizer(Vocab vocab, ModelConfig cfg) : vocab_(std::move(vocab)), cfg_(cfg) {
        cfg_.validate();
        std::mt19937_64 rng(cfg_.seed);
        int V = vocab_.size(), De = cfg_.emb_dim, H = cfg_.enc_hidden, Hd = cfg_.dec_hidden;
        embedding_ = nn::Parameter("emb", {V, De});
        nn::init_uniform(embedding_.value, De, rng);
        enc1_fwd_ = nn::LstmCell("enc1.fwd", De, H, rng);
        enc1_bwd_ = nn::LstmCell("enc1.bwd", De, H, rng);
        enc2_fwd_ = nn::LstmCell("enc2.fwd", De, H, rng);
        enc2_bwd_ = nn::LstmCell("enc2.bwd", De, H, rng);
        init_combine_ = nn::Linear("init", 2 * Hd, 4 * H, rng);
        decoder_ = nn::LstmCell("dec", De, Hd, rng);
        attn1_ = nn::Parameter("attn1.Wa", {2 * H, Hd});
        nn::init_uniform(attn1_.value, Hd, rng);
        attn2_ = nn::Parameter("attn2.Wa", {2 * H, Hd});
        nn::init_uniform(attn2_.value, Hd, rng);
        ctx_combine_ = nn::Linear("ctx", Hd, Hd + 4 * H, rng);
        out_proj_ = nn::Linear("out", V, Hd, rng);
    }

    const Vocab& vocab() const { return vocab_; }
    const ModelConfig& config() const { return cfg_; }

    std::vector<nn::Parameter*> params() {
        std::vector<nn::Parameter*> out{&embedding_};
        for (auto* cell : {&enc1_fwd_, &enc1_bwd_, &enc2_fwd_, &enc2_bwd_, &decoder_})
            for (auto* p : cell->params()) out.push_back(p);
        for (auto* p : init_combine_.params()) out.push_back(p);
        out.push_back(&attn1_);
        out.push_back(&attn2_);
        for (auto* p : ctx_combine_.params()) out.push_back(p);
        for (auto* p : out_proj_.params()) out.push_back(p);
        return out;
    }

    Instance make_instance(const Token& tok, const CandidateProvider& provider) const {
        Instance ins;
        ins.source = encode_source(tok, vocab_, cfg_.use_feats);
        ins.candidates = encode_candidates(provider.get(tok.form, tok.upos), vocab_);
        if (!tok.lemma.empty()) ins.target = encode_target(tok.lemma, vocab_);
        return ins;
    }

    // Mean per-target-symbol cross-entropy, averaged per instance then over
    // the batch. rng enables standard dropout (training mode).
    nn::Var forward_loss_var(nn::Graph& g, const std::vector<Instance>& batch,
                             std::mt19937_64* rng = nullptr) {
        if (batch.empty()) throw std::invalid_argument("forward_loss: empty batch");
        std::vector<nn::Var> losses;
        losses.reserve(batch.size());
        for (auto& ins : batch) {
            if (ins.target.size() < 2) throw std::invalid_argument("instance without target");
            Encoded enc = encode_instance(g, ins, rng);
            nn::LstmState s = enc.initial;
            std::vector<nn::Var> steps;
            for (size_t t = 0; t + 1 < ins.target.size(); ++t) {
                StepOut out = decode_step(g, enc, s, ins.target[t], rng);
                s = out.state;
                steps.push_back(g.softmax_xent(out.logits, ins.target[t + 1]));
            }
            losses.push_back(g.mean(steps));
        }
        return g.mean(losses);
    }

    double forward_loss(const std::vector<Instance>& batch, std::mt19937_64* rng = nullptr) {
        nn::Graph g;
        return g.value(forward_loss_var(g, batch, rng))(0);
    }

    // Greedy argmax decoding (ties broken toward the lowest symbol id).
    // Stops at </s> or after form_length + max_decode_extra steps.
    std::string greedy_decode(const std::vector<int>& source, const std::vector<int>& candidates,
                              DecodeTrace* trace = nullptr) const {
        nn::Graph g;
        auto* self = const_cast<EnhancedLemmatizer*>(this);
        Instance ins{source, candidates.empty() ? std::vector<int>{Vocab::kEmpty} : candidates, {}};
        Encoded enc = self->encode_instance(g, ins, nullptr);
        size_t form_len = 0;
        while (form_len < source.size() && source[form_len] != Vocab::kSep) ++form_len;
        size_t max_steps = form_len + static_cast<size_t>(cfg_.max_decode_extra);
        nn::LstmState s = enc.initial;
        int prev = Vocab::kSos;
        std::string out;
        for (size_t step = 0; step < max_steps; ++step) {
            StepOut so = self->decode_step(g, enc, s, prev, nullptr);
            s = so.state;
            if (trace) {
                trace->source_attention.push_back(g.value(so.w1).data);
                trace->candidate_attention.push_back(g.value(so.w2).data);
            }
            const auto& logits = g.value(so.logits);
            int best = 0;
            for (int i = 1; i < static_cast<int>(logits.size()); ++i)
                if (logits(i) > logits(best)) best = i;
            if (best == Vocab::kEos) break;
            if (vocab_.is_output_char(best)) out += vocab_.symbol(best);
            prev = best;
        }
        return out;
    }

    std::string lemmatize(const Token& tok, const CandidateProvider& provider,
                          DecodeTrace* trace = nullptr) const {
        return greedy_decode(encode_source(tok, vocab_, cfg_.use_feats),
                             encode_candidates(provider.get(tok.form, tok.upos), vocab_), trace);
    }

    // ------------------------------------------------------------------
    // Serialization: magic + version + config + vocab + parameters + FNV
    // checksum; parameters round-trip bit-exactly.

    static constexpr uint32_t kFormatVersion = 1;

    std::string serialize() {
        io::ByteWriter w;
        w.raw("LFGE");
        w.u32(kFormatVersion);
        w.i32(cfg_.emb_dim);
        w.i32(cfg_.enc_hidden);
        w.i32(cfg_.dec_hidden);
        w.i32(cfg_.max_decode_extra);
        w.f64(cfg_.encoder_dropout_p);
        w.f64(cfg_.dropout);
        w.u8(cfg_.use_feats ? 1 : 0);
        w.u64(cfg_.seed);
        w.u32(static_cast<uint32_t>(vocab_.size()));
        for (auto& s : vocab_.symbols()) w.str(s);
        auto ps = params();
        w.u32(static_cast<uint32_t>(ps.size()));
        for (auto* p : ps) {
            w.str(p->name);
            w.u32(static_cast<uint32_t>(p->value.shape.size()));
            for (int d : p->value.shape) w.i32(d);
            for (double v : p->value.data) w.f64(v);
        }
        uint64_t checksum = io::fnv1a64(w.bytes());
        w.u64(checksum);
        return w.bytes();
    }

    void save(const std::filesystem::path& path) { io::atomic_write_file(path, serialize()); }

    static EnhancedLemmatizer deserialize(std::string_view bytes) {
        if (bytes.size() < 12) throw io::SerializationError("model file too short");
        uint64_t stored = 0;
        for (int i = 0; i < 8; ++i)
            stored |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[bytes.size() - 8 + i]))
                      << (8 * i);
        if (io::fnv1a64(bytes.substr(0, bytes.size() - 8)) != stored)
            throw io::SerializationError("model file checksum mismatch");
        io::ByteReader r(bytes.substr(0, bytes.size() - 8));
        char magic[4];
        for (auto& c : magic) c = static_cast<char>(r.u8());
        if (std::string_view(magic, 4) != "LFGE") throw io::SerializationError("bad magic bytes");
        if (r.u32() != kFormatVersion) throw io::SerializationError("unsupported format version");
        ModelConfig cfg;
        cfg.emb_dim = r.i32();
        cfg.enc_hidden = r.i32();
        cfg.dec_hidden = r.i32();
        cfg.max_decode_extra = r.i32();
        cfg.encoder_dropout_p = r.f64();
        cfg.dropout = r.f64();
        cfg.use_feats = r.u8() != 0;
        cfg.seed = r.u64();
        uint32_t vsize = r.u32();
        std::vector<std::string> symbols(vsize);
        for (auto& s : symbols) s = r.str();
        EnhancedLemmatizer model(Vocab::from_symbols(symbols), cfg);
        auto ps = model.params();
        uint32_t pcount = r.u32();
        if (pcount != ps.size()) throw io::SerializationError("parameter count mismatch");
        for (auto* p : ps) {
            if (r.str() != p->name) throw io::SerializationError("parameter name mismatch");
            uint32_t ndims = r.u32();
            std::vector<int> shape(ndims);
            for (auto& d : shape) d = r.i32();
            if (shape != p->value.shape) throw io::SerializationError("parameter shape mismatch");
            for (double& v : p->value.data) v = r.f64();
        }
        return model;
    }

    static EnhancedLemmatizer load(const std::filesystem::path& path) {
        return deserialize(io::read_file(path));
    }

private:
    struct Encoded {
        nn::Var mem1;  // [S x 2H]
        nn::Var mem2;  // [C x 2H]
        nn::LstmState initial;
    };

    struct StepOut {
        nn::LstmState state;
        nn::Var logits;
        nn::Var w1, w2;
    };

    std::vector<nn::Var> embed_sequence(nn::Graph& g, const std::vector<int>& ids,
                                        std::mt19937_64* rng) {
        nn::Var mat = g.dropout(nn::embed(g, embedding_, ids), cfg_.dropout, rng);
        std::vector<nn::Var> out(ids.size());
        for (size_t t = 0; t < ids.size(); ++t) out[t] = g.pick_row(mat, static_cast<int>(t));
        return out;
    }

    Encoded encode_instance(nn::Graph& g, const Instance& ins, std::mt19937_64* rng) {
        if (ins.source.empty()) throw std::invalid_argument("empty source sequence");
        auto src = embed_sequence(g, ins.source, rng);
        auto cand = embed_sequence(g, ins.candidates, rng);
        auto e1 = nn::bilstm_encode(g, enc1_fwd_, enc1_bwd_, src);
        auto e2 = nn::bilstm_encode(g, enc2_fwd_, enc2_bwd_, cand);
        nn::Var init = g.tanh_(init_combine_.apply(g, g.concat({e1.final, e2.final})));
        int Hd = cfg_.dec_hidden;
        return {e1.memory, e2.memory, {g.slice(init, 0, Hd), g.slice(init, Hd, Hd)}};
    }

    StepOut decode_step(nn::Graph& g, const Encoded& enc, nn::LstmState s, int prev_symbol,
                        std::mt19937_64* rng) {
        nn::Var x = g.dropout(g.pick_row(nn::embed(g, embedding_, {prev_symbol}), 0), cfg_.dropout, rng);
        nn::LstmState next = nn::lstm_step(g, decoder_, x, s);
        auto a1 = nn::soft_dot_attention(g, attn1_, next.h, enc.mem1);
        auto a2 = nn::soft_dot_attention(g, attn2_, next.h, enc.mem2);
        nn::Var comb = g.tanh_(ctx_combine_.apply(g, g.concat({next.h, a1.context, a2.context})));
        comb = g.dropout(comb, cfg_.dropout, rng);
        return {next, out_proj_.apply(g, comb), a1.weights, a2.weights};
    }

    Vocab vocab_;
    ModelConfig cfg_;
    nn::Parameter embedding_;
    nn::LstmCell enc1_fwd_, enc1_bwd_, enc2_fwd_, enc2_bwd_, decoder_;
    nn::Linear init_combine_, ctx_combine_, out_proj_;
    nn::Parameter attn1_, attn2_;
};

// Replaces every token's lemma with a greedy decode. Candidates come from
// the provider; decoding is parallelized across tokens but order-stable.
inline Corpus predict_corpus(const EnhancedLemmatizer& model, const Corpus& corpus,
                             const CandidateProvider& provider, unsigned threads = 1) {
    Corpus out = corpus;
    std::vector<Token*> tokens;
    for (auto& sent : out.sentences)
        for (auto& tok : sent.tokens) tokens.push_back(&tok);
    unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tokens.size())));
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i)
            tokens[i]->lemma = model.lemmatize(*tokens[i], provider);
    };
    if (n == 1) {
        work(0, tokens.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (tokens.size() + n - 1) / n;
        for (unsigned t = 0; t < n; ++t) {
            size_t begin = t * chunk;
            size_t end = std::min(tokens.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace lemma

#endif
