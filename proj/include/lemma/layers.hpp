#ifndef LEMMA_LAYERS_HPP
#define LEMMA_LAYERS_HPP

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lemma/graph.hpp"

namespace lemma::nn {

inline Var embed(Graph& g, Parameter& table, const std::vector<int>& ids) {
    return g.rows(g.param(table), ids);
}

struct Linear {
    Parameter W;  // [out x in]
    Parameter b;  // [out]

    Linear() = default;
    Linear(const std::string& name, int out_dim, int in_dim, std::mt19937_64& rng)
        : W(name + ".W", {out_dim, in_dim}), b(name + ".b", {out_dim}) {
        init_uniform(W.value, in_dim, rng);
    }

    Var apply(Graph& g, Var x) { return g.add(g.matvec(g.param(W), x), g.param(b)); }

    std::vector<Parameter*> params() { return {&W, &b}; }
};

inline Var linear(Graph& g, Parameter& W, Parameter& b, Var x) {
    return g.add(g.matvec(g.param(W), x), g.param(b));
}

// Standard LSTM cell with separate input/forget/cell/output gate parameters.
// Each gate weight is [H x (D + H)] over the concatenated [x; h].
struct LstmCell {
    int input_dim = 0;
    int hidden_dim = 0;
    Parameter Wi, Wf, Wg, Wo;
    Parameter bi, bf, bg, bo;

    LstmCell() = default;
    LstmCell(const std::string& name, int in_dim, int hid_dim, std::mt19937_64& rng)
        : input_dim(in_dim),
          hidden_dim(hid_dim),
          Wi(name + ".Wi", {hid_dim, in_dim + hid_dim}),
          Wf(name + ".Wf", {hid_dim, in_dim + hid_dim}),
          Wg(name + ".Wg", {hid_dim, in_dim + hid_dim}),
          Wo(name + ".Wo", {hid_dim, in_dim + hid_dim}),
          bi(name + ".bi", {hid_dim}),
          bf(name + ".bf", {hid_dim}),
          bg(name + ".bg", {hid_dim}),
          bo(name + ".bo", {hid_dim}) {
        int fan_in = in_dim + hid_dim;
        init_uniform(Wi.value, fan_in, rng);
        init_uniform(Wf.value, fan_in, rng);
        init_uniform(Wg.value, fan_in, rng);
        init_uniform(Wo.value, fan_in, rng);
        for (double& v : bf.value.data) v = 1.0;  // forget-gate bias
    }

    std::vector<Parameter*> params() {
        return {&Wi, &Wf, &Wg, &Wo, &bi, &bf, &bg, &bo};
    }
};

struct LstmState {
    Var h;
    Var c;
};

inline LstmState lstm_zero_state(Graph& g, const LstmCell& cell) {
    return {g.input(Tensor({cell.hidden_dim})), g.input(Tensor({cell.hidden_dim}))};
}

inline LstmState lstm_step(Graph& g, LstmCell& cell, Var x, LstmState s) {
    Var z = g.concat({x, s.h});
    Var i = g.sigmoid_(linear(g, cell.Wi, cell.bi, z));
    Var f = g.sigmoid_(linear(g, cell.Wf, cell.bf, z));
    Var gate = g.tanh_(linear(g, cell.Wg, cell.bg, z));
    Var o = g.sigmoid_(linear(g, cell.Wo, cell.bo, z));
    Var c = g.add(g.emul(f, s.c), g.emul(i, gate));
    Var h = g.emul(o, g.tanh_(c));
    return {h, c};
}

struct BiLstmOutput {
    Var memory;  // [T x 2H]
    Var final;   // [2H] = [fwd h_T ; bwd h_1]
};

// xs: one Var [D] per position. Position t of the memory concatenates the
// forward state after x_1..x_t with the backward state after x_T..x_t.
inline BiLstmOutput bilstm_encode(Graph& g, LstmCell& fwd, LstmCell& bwd,
                                  const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("bilstm_encode: empty sequence");
    size_t T = xs.size();
    std::vector<Var> fwd_h(T), bwd_h(T);
    LstmState s = lstm_zero_state(g, fwd);
    for (size_t t = 0; t < T; ++t) {
        s = lstm_step(g, fwd, xs[t], s);
        fwd_h[t] = s.h;
    }
    Var fwd_last = s.h;
    s = lstm_zero_state(g, bwd);
    for (size_t t = T; t-- > 0;) {
        s = lstm_step(g, bwd, xs[t], s);
        bwd_h[t] = s.h;
    }
    Var bwd_last = s.h;
    std::vector<Var> rows(T);
    for (size_t t = 0; t < T; ++t) rows[t] = g.concat({fwd_h[t], bwd_h[t]});
    return {g.stack_rows(rows), g.concat({fwd_last, bwd_last})};
}

struct AttentionOutput {
    Var context;  // [M]
    Var weights;  // [T]
};

// Bilinear soft dot attention: scores = memory . (Wa query); Wa [M x Q].
inline AttentionOutput soft_dot_attention(Graph& g, Parameter& Wa, Var query, Var memory) {
    Var projected = g.matvec(g.param(Wa), query);
    Var scores = g.matvec(memory, projected);
    Var weights = g.softmax(scores);
    Var context = g.matvec_t(memory, weights);
    return {context, weights};
}

// ---------------------------------------------------------------------------
// Optimization

inline double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
    double sq = 0.0;
    for (auto* p : params)
        for (double v : p->grad.data) sq += v * v;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (auto* p : params)
            for (double& v : p->grad.data) v *= s;
    }
    return norm;
}

class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
    }

    // Bias-corrected moment update over all parameters; zeroes gradients.
    void step(const std::vector<Parameter*>& params) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (auto* p : params) {
            auto& st = state_[p];
            if (st.m.data.empty()) {
                st.m = Tensor(p->value.shape);
                st.v = Tensor(p->value.shape);
            }
            for (size_t i = 0; i < p->value.data.size(); ++i) {
                double grad = p->grad.data[i];
                st.m.data[i] = beta1_ * st.m.data[i] + (1.0 - beta1_) * grad;
                st.v.data[i] = beta2_ * st.v.data[i] + (1.0 - beta2_) * grad * grad;
                double mhat = st.m.data[i] / bc1;
                double vhat = st.v.data[i] / bc2;
                p->value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
            p->zero_grad();
        }
    }

    int64_t steps() const { return t_; }

private:
    struct Moments {
        Tensor m, v;
    };
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::unordered_map<Parameter*, Moments> state_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checking

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
};

// forward must rebuild the same deterministic computation each call and
// return the scalar loss value. Analytic gradients come from one graph
// backward; each parameter component is then perturbed by +-step.
inline GradCheckReport grad_check(const std::function<double(Graph&)>& forward,
                                  const std::function<Var(Graph&)>& forward_var,
                                  const std::vector<Parameter*>& params, double step = 1e-5) {
    for (auto* p : params) p->zero_grad();
    {
        Graph g;
        Var loss = forward_var(g);
        g.backward(loss);
    }
    GradCheckReport report;
    for (auto* p : params) {
        GradCheckEntry entry{p->name, 0.0};
        for (size_t i = 0; i < p->value.data.size(); ++i) {
            double saved = p->value.data[i];
            p->value.data[i] = saved + step;
            Graph gp;
            double up = forward(gp);
            p->value.data[i] = saved - step;
            Graph gm;
            double down = forward(gm);
            p->value.data[i] = saved;
            double numeric = (up - down) / (2.0 * step);
            double analytic = p->grad.data[i];
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1.0});
            entry.max_rel_error = std::max(entry.max_rel_error, std::abs(numeric - analytic) / denom);
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    for (auto* p : params) p->zero_grad();
    return report;
}

// Convenience overload: one builder used for both value and gradient passes.
inline GradCheckReport grad_check(const std::function<Var(Graph&)>& build,
                                  const std::vector<Parameter*>& params, double step = 1e-5) {
    auto forward = [&build](Graph& g) { return g.value(build(g))(0); };
    return grad_check(forward, build, params, step);
}

}  // namespace lemma::nn

#endif
