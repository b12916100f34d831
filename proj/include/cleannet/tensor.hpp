#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cleannet/error.hpp"

namespace cleannet {

/// Dense row-major tensor of 64-bit reals. An empty shape denotes a scalar.
/// Every op in this library checks its outputs for NaN/Inf, so a Tensor in
/// circulation holds finite values only.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != shape_numel(shape))
            throw DimensionError("Tensor: data length does not match shape");
    }

    static std::size_t shape_numel(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        const std::size_t n = shape_numel(s);
        return Tensor(std::move(s), std::vector<double>(n, 0.0));
    }

    static Tensor scalar(double v) { return Tensor({}, {v}); }

    static Tensor vector(std::vector<double> v) {
        const std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> v) {
        return Tensor({r, c}, std::move(v));
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    std::size_t rows() const {
        if (rank() != 2) throw DimensionError("Tensor::rows: rank-2 required, got " + shape_str());
        return shape[0];
    }
    std::size_t cols() const {
        if (rank() != 2) throw DimensionError("Tensor::cols: rank-2 required, got " + shape_str());
        return shape[1];
    }

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }
    double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    /// Value of a single-element tensor.
    double item() const {
        if (numel() != 1) throw ContractError("Tensor::item: tensor has " + std::to_string(numel()) + " elements");
        return data[0];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::span<const double> row(std::size_t i) const {
        const std::size_t c = cols();
        return {data.data() + i * c, c};
    }

    Tensor row_copy(std::size_t i) const {
        const auto r = row(i);
        return Tensor({r.size()}, std::vector<double>(r.begin(), r.end()));
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
        os << ']';
        return os.str();
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

/// Cosine similarity of two equal-length vectors, clamped to [-1, 1].
/// Rejects zero-norm inputs.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw NumericError("cosine: zero-norm input");
    double c = dot(a, b) / (na * nb);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

/// Scales every row of a matrix to unit L2 norm. Zero rows are left as-is.
inline void l2_normalize_rows(Tensor& m) {
    const std::size_t r = m.rows(), c = m.cols();
    for (std::size_t i = 0; i < r; ++i) {
        double n = norm(m.row(i));
        if (n == 0.0) continue;
        for (std::size_t j = 0; j < c; ++j) m.at(i, j) /= n;
    }
}

}  // namespace cleannet
