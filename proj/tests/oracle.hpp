#pragma once

// Test-side oracles. The finite-difference helpers here evaluate the model
// function forward-only, so they are independent of the tape's backward
// implementation that the tests check.

#include <cmath>
#include <functional>
#include <vector>

#include "cleannet/autodiff.hpp"
#include "cleannet/rng.hpp"

namespace oracle {

inline std::vector<double> flatten_values(const cleannet::ParamStore& store) {
    std::vector<double> out;
    for (const auto& p : store) out.insert(out.end(), p.value.data.begin(), p.value.data.end());
    return out;
}

inline void unflatten_values(cleannet::ParamStore& store, const std::vector<double>& flat) {
    std::size_t k = 0;
    for (auto& p : store)
        for (double& v : p.value.data) v = flat[k++];
}

inline std::vector<double> flatten_grads(const cleannet::ParamStore& store) {
    std::vector<double> out;
    for (const auto& p : store) out.insert(out.end(), p.grad.data.begin(), p.grad.data.end());
    return out;
}

/// Central-difference gradient of eval() w.r.t. every coordinate in `store`.
inline std::vector<double> numeric_gradient(cleannet::ParamStore& store, const std::function<double()>& eval,
                                            double step) {
    std::vector<double> grad;
    for (auto& p : store) {
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double saved = p.value.at(i);
            p.value.at(i) = saved + step;
            const double fp = eval();
            p.value.at(i) = saved - step;
            const double fm = eval();
            p.value.at(i) = saved;
            grad.push_back((fp - fm) / (2.0 * step));
        }
    }
    return grad;
}

/// max over coordinates of |a - b| / max(1e-8, |a| + |b|).
inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1e-8, std::abs(a[i]) + std::abs(b[i])));
    return worst;
}

inline cleannet::Tensor random_tensor(std::vector<std::size_t> shape, cleannet::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
    cleannet::Tensor t = cleannet::Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

}  // namespace oracle
