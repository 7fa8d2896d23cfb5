#pragma once

#include <vector>

#include "skycast/nn/autograd.hpp"

namespace skycast::nn {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);

Var reshape(const Var& a, Shape shape);
Var concat(const std::vector<Var>& parts, int axis);
Var slice(const Var& a, int axis, int start, int length);

/// x (B, C, H, W) times s (C) broadcast over batch and space.
Var channel_scale(const Var& x, const Var& s);

/// Stride-1 convolution with "same" zero padding; odd square kernels.
/// x (B, C, H, W), w (O, C, k, k), b (O) or empty.
Var conv2d(const Var& x, const Var& w, const Var& b);

/// x (B, C, Z, H, W), w (O, C, kz, k, k): valid along Z, same along (H, W).
Var conv3d(const Var& x, const Var& w, const Var& b);

/// Mean over axis 2 of a (B, C, Z, H, W) tensor.
Var mean_depth(const Var& x);

/// x (B, C, h, w) -> (B, C, H, W) by nearest-neighbour replication.
Var upsample_nearest(const Var& x, int height, int width);

/// Transposed convolution, w (C_in, C_out, k, k). Output extent per axis
/// (in - 1) * stride - 2 * pad + k + output_pad.
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int output_pad_h,
                     int output_pad_w);

/// x (B, N), w (M, N), b (M).
Var linear(const Var& x, const Var& w, const Var& b);

struct BatchNormStats {
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;
    double eps = 1e-5;
};

/// Per-channel normalization over (B, H, W) of a (B, C, H, W) input. Training
/// mode uses batch statistics and updates `stats`; inference mode uses the
/// running averages. Throws FitError for a training batch of size 1.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats, bool training);

/// Mean of squared differences against a constant target of equal size.
Var mse_loss(const Var& prediction, const Tensor& target);

/// sum_i a_i * weights_i; a scalar probe for gradient checks.
Var weighted_sum(const Var& a, const Tensor& weights);

}  // namespace skycast::nn
