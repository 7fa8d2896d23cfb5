#include "skycast/nn/adam.hpp"

#include <cmath>

namespace skycast::nn {

Adam::Adam(ParamStore& params, double learning_rate, double beta1, double beta2, double eps)
    : params_(params), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& [name, p] : params_.entries()) {
        m_.emplace_back(p.shape(), 0.0);
        v_.emplace_back(p.shape(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    auto& entries = params_.entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
        Var& p = entries[k].second;
        if (p.grad().size() != p.value().size()) continue;  // untouched this step
        Tensor& value = p.mutable_value();
        const Tensor& g = p.grad();
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

}  // namespace skycast::nn
