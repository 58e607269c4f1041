#ifndef LEMMA_TENSOR_HPP
#define LEMMA_TENSOR_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lemma::nn {

// Dense row-major tensor of 64-bit floats.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel(shape)), 0.0);
    }
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != static_cast<size_t>(numel(shape)))
            throw std::invalid_argument("tensor data/shape mismatch");
    }

    static int64_t numel(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("non-positive dimension");
            n *= d;
        }
        return n;
    }

    size_t size() const { return data.size(); }
    int rows() const { return shape.size() == 2 ? shape[0] : (shape.empty() ? 1 : shape[0]); }
    int cols() const { return shape.size() == 2 ? shape[1] : 1; }

    double& operator()(int i) { return data[static_cast<size_t>(i)]; }
    double operator()(int i) const { return data[static_cast<size_t>(i)]; }
    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline Tensor vector_of(std::vector<double> d) {
    int n = static_cast<int>(d.size());
    return Tensor({n}, std::move(d));
}

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, std::vector<int> shape) : name(std::move(n)), value(shape), grad(shape) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
inline void init_uniform(Tensor& t, int fan_in, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.data) v = dist(rng);
}

}  // namespace lemma::nn

#endif
