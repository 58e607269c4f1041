#ifndef LEMMA_GRADCHECK_HPP
#define LEMMA_GRADCHECK_HPP

#include <string>
#include <vector>

#include "lemma/model.hpp"

namespace lemma {

struct GradSuiteEntry {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool ok() const { return max_rel_error < tolerance; }
};

struct GradSuiteReport {
    std::vector<GradSuiteEntry> entries;
    bool all_ok() const {
        for (auto& e : entries)
            if (!e.ok()) return false;
        return true;
    }
};

namespace detail {

inline nn::Parameter random_param(const std::string& name, std::vector<int> shape,
                                  std::mt19937_64& rng) {
    nn::Parameter p(name, std::move(shape));
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (double& v : p.value.data) v = dist(rng);
    return p;
}

inline nn::Var flatten(nn::Graph& g, nn::Var y);

// scalar = w . flatten(y), with fixed weights; keeps every output coordinate
// in the loss so the check covers the whole Jacobian.
inline nn::Var weighted_sum(nn::Graph& g, nn::Var y, const std::vector<double>& w) {
    int n = static_cast<int>(w.size());
    return g.matvec(g.input(nn::Tensor({1, n}, std::vector<double>(w))), flatten(g, y));
}

inline std::vector<double> fixed_weights(size_t n) {
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) w[i] = 0.3 + 0.1 * double(i % 7) - 0.25 * double(i % 3);
    return w;
}

}  // namespace detail

inline nn::Var detail::flatten(nn::Graph& g, nn::Var y) {
    // copy the shape: adding nodes below may reallocate the graph's storage
    std::vector<int> shape = g.value(y).shape;
    if (shape.size() == 1) return y;
    std::vector<nn::Var> rows;
    for (int r = 0; r < shape[0]; ++r) rows.push_back(g.pick_row(y, r));
    return g.concat(rows);
}

inline EnhancedLemmatizer make_toy_model(uint64_t seed) {
    Corpus corpus = parse_conllu(
        "1\tab\ta\tN\t_\tF=1\t_\t_\t_\t_\n"
        "2\tba\tb\tV\t_\t_\t_\t_\t_\t_\n\n");
    EmptyProvider none;
    Vocab vocab = build_vocab(corpus, {&none});
    ModelConfig cfg;
    cfg.emb_dim = 4;
    cfg.enc_hidden = 3;
    cfg.dec_hidden = 4;
    cfg.dropout = 0.0;
    cfg.max_decode_extra = 4;
    cfg.seed = seed;
    return EnhancedLemmatizer(vocab, cfg);
}

inline std::vector<Instance> toy_batch(const EnhancedLemmatizer& model) {
    Corpus corpus = parse_conllu(
        "1\tab\ta\tN\t_\tF=1\t_\t_\t_\t_\n"
        "2\tba\tb\tV\t_\t_\t_\t_\t_\t_\n\n");
    std::vector<Instance> batch;
    CandidateTable ct = parse_candidate_tsv("ab\ta,ba\nba\tb\n");
    CandidateFileProvider provider(ct);
    for (auto& tok : corpus.sentences[0].tokens) batch.push_back(model.make_instance(tok, provider));
    return batch;
}

// Analytic vs. central finite-difference gradients for every layer and for
// the full dual-encoder loss at toy dimensions, across `seeds` random seeds.
inline GradSuiteReport run_gradient_suite(int seeds = 20) {
    using namespace detail;
    GradSuiteReport report;
    auto track = [&report](const std::string& name, double tol, double err) {
        for (auto& e : report.entries)
            if (e.name == name) {
                e.max_rel_error = std::max(e.max_rel_error, err);
                return;
            }
        report.entries.push_back({name, err, tol});
    };

    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(static_cast<uint64_t>(seed) * 7919 + 17);

        {  // linear layer
            auto W = random_param("W", {3, 4}, rng);
            auto b = random_param("b", {3}, rng);
            auto x = random_param("x", {4}, rng);
            auto w = fixed_weights(3);
            auto build = [&](nn::Graph& g) {
                return weighted_sum(g, nn::linear(g, W, b, g.param(x)), w);
            };
            track("linear", 1e-7, nn::grad_check(build, {&W, &b, &x}).max_rel_error);
        }
        {  // embedding lookup (repeated id accumulates)
            auto table = random_param("table", {5, 3}, rng);
            auto w = fixed_weights(9);
            auto build = [&](nn::Graph& g) {
                return weighted_sum(g, g.rows(g.param(table), {0, 2, 2}), w);
            };
            track("embed", 1e-6, nn::grad_check(build, {&table}).max_rel_error);
        }
        {  // softmax cross-entropy
            auto logits = random_param("logits", {6}, rng);
            auto build = [&](nn::Graph& g) { return g.softmax_xent(g.param(logits), 2); };
            track("softmax_xent", 1e-7, nn::grad_check(build, {&logits}).max_rel_error);
        }
        {  // single LSTM step
            std::mt19937_64 cell_rng(rng());
            nn::LstmCell cell("cell", 3, 4, cell_rng);
            auto x = random_param("x", {3}, rng);
            auto h = random_param("h", {4}, rng);
            auto c = random_param("c", {4}, rng);
            auto w = fixed_weights(8);
            auto build = [&](nn::Graph& g) {
                auto s = nn::lstm_step(g, cell, g.param(x), {g.param(h), g.param(c)});
                return weighted_sum(g, g.concat({s.h, s.c}), w);
            };
            std::vector<nn::Parameter*> ps = cell.params();
            ps.push_back(&x);
            ps.push_back(&h);
            ps.push_back(&c);
            track("lstm_step", 1e-4, nn::grad_check(build, ps).max_rel_error);
        }
        {  // bidirectional encoder over 3 steps
            std::mt19937_64 cell_rng(rng());
            nn::LstmCell fwd("fwd", 3, 2, cell_rng), bwd("bwd", 3, 2, cell_rng);
            auto x0 = random_param("x0", {3}, rng);
            auto x1 = random_param("x1", {3}, rng);
            auto x2 = random_param("x2", {3}, rng);
            auto w = fixed_weights(12 + 4);
            auto build = [&](nn::Graph& g) {
                auto out = nn::bilstm_encode(g, fwd, bwd, {g.param(x0), g.param(x1), g.param(x2)});
                return weighted_sum(g, g.concat({flatten(g, out.memory), out.final}), w);
            };
            std::vector<nn::Parameter*> ps = fwd.params();
            for (auto* p : bwd.params()) ps.push_back(p);
            ps.push_back(&x0);
            ps.push_back(&x1);
            ps.push_back(&x2);
            track("bilstm_encode", 1e-4, nn::grad_check(build, ps).max_rel_error);
        }
        {  // soft dot attention over query, memory and Wa
            auto Wa = random_param("Wa", {3, 4}, rng);
            auto query = random_param("q", {4}, rng);
            auto memory = random_param("mem", {5, 3}, rng);
            auto w = fixed_weights(3 + 5);
            auto build = [&](nn::Graph& g) {
                auto att = nn::soft_dot_attention(g, Wa, g.param(query), g.param(memory));
                return weighted_sum(g, g.concat({att.context, att.weights}), w);
            };
            track("soft_dot_attention", 1e-4,
                  nn::grad_check(build, {&Wa, &query, &memory}).max_rel_error);
        }
        {  // full dual-encoder loss at toy dims
            auto model = make_toy_model(static_cast<uint64_t>(seed) + 1);
            auto batch = toy_batch(model);
            auto build = [&](nn::Graph& g) { return model.forward_loss_var(g, batch, nullptr); };
            track("full_model_loss", 1e-3, nn::grad_check(build, model.params()).max_rel_error);
        }
    }
    return report;
}

}  // namespace lemma

#endif
