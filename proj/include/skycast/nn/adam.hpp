#pragma once

#include <vector>

#include "skycast/nn/model.hpp"

namespace skycast::nn {

/// Adam with bias correction over every parameter of a store.
class Adam {
public:
    explicit Adam(ParamStore& params, double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    void step();
    void set_learning_rate(double lr) { lr_ = lr; }
    int steps() const { return t_; }

private:
    ParamStore& params_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace skycast::nn
