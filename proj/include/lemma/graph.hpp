#ifndef LEMMA_GRAPH_HPP
#define LEMMA_GRAPH_HPP

#include <cmath>
#include <functional>
#include <random>
#include <unordered_map>
#include <vector>

#include "lemma/tensor.hpp"

namespace lemma::nn {

// Dynamic computation graph. Build forward with the ops below, then call
// backward(loss) once; parameter gradients accumulate into Parameter::grad.
class Graph {
public:
    using Var = int;

    Var input(Tensor t) {
        return push(std::move(t), {});
    }

    // Parameter leaf; reused if the same parameter enters the graph twice.
    Var param(Parameter& p) {
        auto it = param_nodes_.find(&p);
        if (it != param_nodes_.end()) return it->second;
        Var v = push(p.value, [&p](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            for (size_t i = 0; i < gr.data.size(); ++i) p.grad.data[i] += gr.data[i];
        });
        param_nodes_.emplace(&p, v);
        return v;
    }

    // Row gather: [V x D] table, T ids -> [T x D].
    Var rows(Var table, std::vector<int> ids) {
        const Tensor& tv = value(table);
        int V = tv.shape[0], D = tv.shape[1];
        Tensor out({static_cast<int>(ids.size()), D});
        for (size_t t = 0; t < ids.size(); ++t) {
            if (ids[t] < 0 || ids[t] >= V) throw std::out_of_range("embedding id out of range");
            for (int j = 0; j < D; ++j) out(static_cast<int>(t), j) = tv(ids[t], j);
        }
        return push(std::move(out), [table, ids = std::move(ids)](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            auto& tg = g.nodes_[table].grad;
            int D = tg.shape[1];
            for (size_t t = 0; t < ids.size(); ++t)
                for (int j = 0; j < D; ++j) tg(ids[t], j) += gr(static_cast<int>(t), j);
        });
    }

    Var pick_row(Var m, int r) {
        const Tensor& mv = value(m);
        int C = mv.shape[1];
        Tensor out({C});
        for (int j = 0; j < C; ++j) out(j) = mv(r, j);
        return push(std::move(out), [m, r](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            auto& mg = g.nodes_[m].grad;
            int C = mg.shape[1];
            for (int j = 0; j < C; ++j) mg(r, j) += gr(j);
        });
    }

    // y = A x, A [m x n], x [n]
    Var matvec(Var A, Var x) {
        const Tensor& av = value(A);
        const Tensor& xv = value(x);
        int m = av.shape[0], n = av.shape[1];
        if (xv.shape != std::vector<int>{n}) throw std::invalid_argument("matvec shape mismatch");
        Tensor out({m});
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            const double* arow = &av.data[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) s += arow[j] * xv(j);
            out(i) = s;
        }
        return push(std::move(out), [A, x](Graph& g, Var self) {
            auto& gy = g.nodes_[self].grad;
            const auto& av = g.nodes_[A].value;
            const auto& xv = g.nodes_[x].value;
            auto& ga = g.nodes_[A].grad;
            auto& gx = g.nodes_[x].grad;
            int m = av.shape[0], n = av.shape[1];
            for (int i = 0; i < m; ++i) {
                double gyi = gy(i);
                if (gyi == 0.0) continue;
                double* garow = &ga.data[static_cast<size_t>(i) * n];
                const double* arow = &av.data[static_cast<size_t>(i) * n];
                for (int j = 0; j < n; ++j) {
                    garow[j] += gyi * xv(j);
                    gx(j) += gyi * arow[j];
                }
            }
        });
    }

    // y = A^T x, A [m x n], x [m] -> [n]
    Var matvec_t(Var A, Var x) {
        const Tensor& av = value(A);
        const Tensor& xv = value(x);
        int m = av.shape[0], n = av.shape[1];
        if (xv.shape != std::vector<int>{m}) throw std::invalid_argument("matvec_t shape mismatch");
        Tensor out({n});
        for (int i = 0; i < m; ++i) {
            double xi = xv(i);
            const double* arow = &av.data[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) out(j) += xi * arow[j];
        }
        return push(std::move(out), [A, x](Graph& g, Var self) {
            auto& gy = g.nodes_[self].grad;
            const auto& av = g.nodes_[A].value;
            const auto& xv = g.nodes_[x].value;
            auto& ga = g.nodes_[A].grad;
            auto& gx = g.nodes_[x].grad;
            int m = av.shape[0], n = av.shape[1];
            for (int i = 0; i < m; ++i) {
                double xi = xv(i);
                double acc = 0.0;
                double* garow = &ga.data[static_cast<size_t>(i) * n];
                const double* arow = &av.data[static_cast<size_t>(i) * n];
                for (int j = 0; j < n; ++j) {
                    garow[j] += xi * gy(j);
                    acc += arow[j] * gy(j);
                }
                gx(i) += acc;
            }
        });
    }

    Var add(Var a, Var b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (!av.same_shape(bv)) throw std::invalid_argument("add shape mismatch");
        Tensor out(av.shape);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = av.data[i] + bv.data[i];
        return push(std::move(out), [a, b](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            for (size_t i = 0; i < gr.data.size(); ++i) {
                g.nodes_[a].grad.data[i] += gr.data[i];
                g.nodes_[b].grad.data[i] += gr.data[i];
            }
        });
    }

    Var emul(Var a, Var b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (!av.same_shape(bv)) throw std::invalid_argument("emul shape mismatch");
        Tensor out(av.shape);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = av.data[i] * bv.data[i];
        return push(std::move(out), [a, b](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            const auto& av = g.nodes_[a].value;
            const auto& bv = g.nodes_[b].value;
            for (size_t i = 0; i < gr.data.size(); ++i) {
                g.nodes_[a].grad.data[i] += gr.data[i] * bv.data[i];
                g.nodes_[b].grad.data[i] += gr.data[i] * av.data[i];
            }
        });
    }

    Var tanh_(Var a) {
        const Tensor& av = value(a);
        Tensor out(av.shape);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::tanh(av.data[i]);
        return push(std::move(out), [a](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            const auto& y = g.nodes_[self].value;
            for (size_t i = 0; i < gr.data.size(); ++i)
                g.nodes_[a].grad.data[i] += gr.data[i] * (1.0 - y.data[i] * y.data[i]);
        });
    }

    Var sigmoid_(Var a) {
        const Tensor& av = value(a);
        Tensor out(av.shape);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = 1.0 / (1.0 + std::exp(-av.data[i]));
        return push(std::move(out), [a](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            const auto& y = g.nodes_[self].value;
            for (size_t i = 0; i < gr.data.size(); ++i)
                g.nodes_[a].grad.data[i] += gr.data[i] * y.data[i] * (1.0 - y.data[i]);
        });
    }

    Var concat(const std::vector<Var>& parts) {
        int n = 0;
        for (Var p : parts) n += static_cast<int>(value(p).size());
        Tensor out({n});
        int off = 0;
        for (Var p : parts) {
            const auto& pv = value(p);
            for (size_t i = 0; i < pv.data.size(); ++i) out(off + static_cast<int>(i)) = pv.data[i];
            off += static_cast<int>(pv.size());
        }
        return push(std::move(out), [parts](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            int off = 0;
            for (Var p : parts) {
                auto& pg = g.nodes_[p].grad;
                for (size_t i = 0; i < pg.data.size(); ++i) pg.data[i] += gr(off + static_cast<int>(i));
                off += static_cast<int>(pg.size());
            }
        });
    }

    Var slice(Var a, int start, int len) {
        const Tensor& av = value(a);
        Tensor out({len});
        for (int i = 0; i < len; ++i) out(i) = av(start + i);
        return push(std::move(out), [a, start, len](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            for (int i = 0; i < len; ++i) g.nodes_[a].grad.data[static_cast<size_t>(start + i)] += gr(i);
        });
    }

    // Stack T vectors [n] into [T x n].
    Var stack_rows(const std::vector<Var>& rows_in) {
        if (rows_in.empty()) throw std::invalid_argument("stack_rows: empty");
        int n = static_cast<int>(value(rows_in[0]).size());
        Tensor out({static_cast<int>(rows_in.size()), n});
        for (size_t t = 0; t < rows_in.size(); ++t) {
            const auto& rv = value(rows_in[t]);
            for (int j = 0; j < n; ++j) out(static_cast<int>(t), j) = rv(j);
        }
        return push(std::move(out), [rows_in, n](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            for (size_t t = 0; t < rows_in.size(); ++t) {
                auto& rg = g.nodes_[rows_in[t]].grad;
                for (int j = 0; j < n; ++j) rg(j) += gr(static_cast<int>(t), j);
            }
        });
    }

    Var softmax(Var a) {
        const Tensor& av = value(a);
        Tensor out(av.shape);
        double mx = av.data[0];
        for (double v : av.data) mx = std::max(mx, v);
        double z = 0.0;
        for (size_t i = 0; i < av.data.size(); ++i) {
            out.data[i] = std::exp(av.data[i] - mx);
            z += out.data[i];
        }
        for (double& v : out.data) v /= z;
        return push(std::move(out), [a](Graph& g, Var self) {
            const auto& y = g.nodes_[self].value;
            auto& gy = g.nodes_[self].grad;
            double dot = 0.0;
            for (size_t i = 0; i < y.data.size(); ++i) dot += y.data[i] * gy.data[i];
            for (size_t i = 0; i < y.data.size(); ++i)
                g.nodes_[a].grad.data[i] += y.data[i] * (gy.data[i] - dot);
        });
    }

    // Cross-entropy of softmax(logits) against one target id; scalar output.
    Var softmax_xent(Var logits, int target) {
        const Tensor& lv = value(logits);
        if (target < 0 || target >= static_cast<int>(lv.size()))
            throw std::out_of_range("xent target out of range");
        double mx = lv.data[0];
        for (double v : lv.data) mx = std::max(mx, v);
        double z = 0.0;
        for (double v : lv.data) z += std::exp(v - mx);
        double logz = std::log(z) + mx;
        Tensor out({1});
        out(0) = logz - lv(target);
        return push(std::move(out), [logits, target, logz](Graph& g, Var self) {
            double gy = g.nodes_[self].grad(0);
            const auto& lv = g.nodes_[logits].value;
            auto& lg = g.nodes_[logits].grad;
            for (size_t i = 0; i < lv.data.size(); ++i) {
                double p = std::exp(lv.data[i] - logz);
                lg.data[i] += gy * (p - (static_cast<int>(i) == target ? 1.0 : 0.0));
            }
        });
    }

    Var mean(const std::vector<Var>& scalars) {
        if (scalars.empty()) throw std::invalid_argument("mean: empty");
        Tensor out({1});
        for (Var s : scalars) out(0) += value(s)(0);
        out(0) /= static_cast<double>(scalars.size());
        double inv = 1.0 / static_cast<double>(scalars.size());
        return push(std::move(out), [scalars, inv](Graph& g, Var self) {
            double gy = g.nodes_[self].grad(0) * inv;
            for (Var s : scalars) g.nodes_[s].grad(0) += gy;
        });
    }

    Var scale(Var a, double k) {
        const Tensor& av = value(a);
        Tensor out(av.shape);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = av.data[i] * k;
        return push(std::move(out), [a, k](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            for (size_t i = 0; i < gr.data.size(); ++i) g.nodes_[a].grad.data[i] += gr.data[i] * k;
        });
    }

    // Inverted dropout; identity when rate == 0 or rng is null (inference).
    Var dropout(Var a, double rate, std::mt19937_64* rng) {
        if (rate <= 0.0 || rng == nullptr) return a;
        const Tensor& av = value(a);
        std::bernoulli_distribution keep(1.0 - rate);
        std::vector<double> mask(av.data.size());
        double inv = 1.0 / (1.0 - rate);
        for (double& m : mask) m = keep(*rng) ? inv : 0.0;
        Tensor out(av.shape);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = av.data[i] * mask[i];
        return push(std::move(out), [a, mask = std::move(mask)](Graph& g, Var self) {
            auto& gr = g.nodes_[self].grad;
            for (size_t i = 0; i < gr.data.size(); ++i)
                g.nodes_[a].grad.data[i] += gr.data[i] * mask[i];
        });
    }

    const Tensor& value(Var v) const { return nodes_[static_cast<size_t>(v)].value; }

    void backward(Var loss) {
        if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be scalar");
        nodes_[static_cast<size_t>(loss)].grad(0) = 1.0;
        for (size_t i = nodes_.size(); i-- > 0;)
            if (nodes_[i].back) nodes_[i].back(*this, static_cast<Var>(i));
    }

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Graph&, Var)> back;
    };

    Var push(Tensor value, std::function<void(Graph&, Var)> back) {
        Node n;
        n.grad = Tensor(value.shape);
        n.value = std::move(value);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return static_cast<Var>(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, Var> param_nodes_;
};

using Var = Graph::Var;

}  // namespace lemma::nn

#endif
