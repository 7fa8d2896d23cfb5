#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "skycast/core/hash.hpp"
#include "skycast/nn/autograd.hpp"
#include "skycast/nn/ops.hpp"

namespace skycast::testing {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

/// Central differences against reverse mode for every element (or an evenly
/// spaced subset of at most `max_per_var`) of each variable in `vars`.
inline GradCheckResult grad_check(const std::function<nn::Var()>& f, std::vector<nn::Var> vars, double eps = 1e-6,
                                  std::size_t max_per_var = 200) {
    for (auto& v : vars) v.zero_grad();
    nn::Var root = f();
    nn::backward(root);
    std::vector<nn::Tensor> analytic;
    for (auto& v : vars) analytic.push_back(v.grad().size() ? v.grad() : nn::Tensor(v.shape(), 0.0));

    GradCheckResult r;
    for (std::size_t k = 0; k < vars.size(); ++k) {
        nn::Tensor& value = vars[k].mutable_value();
        const std::size_t n = value.size();
        const std::size_t stride = std::max<std::size_t>(1, n / max_per_var);
        for (std::size_t i = 0; i < n; i += stride) {
            const double saved = value[i];
            value[i] = saved + eps;
            const double up = f().value()[0];
            value[i] = saved - eps;
            const double down = f().value()[0];
            value[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[k][i];
            const double scale = std::max({std::abs(a), std::abs(numeric), 1e-4});
            r.max_rel_error = std::max(r.max_rel_error, std::abs(a - numeric) / scale);
            ++r.checked;
        }
    }
    return r;
}

/// Deterministic values in [lo, hi).
inline nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    nn::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double u = static_cast<double>(stable_hash({seed, i}) >> 11) * 0x1.0p-53;
        t[i] = lo + (hi - lo) * u;
    }
    return t;
}

/// Scalar probe sum(w * out) with fixed random weights.
inline nn::Var probe(const nn::Var& out, std::uint64_t seed = 99) {
    return nn::weighted_sum(out, random_tensor(out.shape(), seed));
}

}  // namespace skycast::testing
