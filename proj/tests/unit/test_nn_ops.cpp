#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "skycast/core/error.hpp"
#include "skycast/nn/ops.hpp"

using namespace skycast;
using namespace skycast::nn;
using skycast::testing::grad_check;
using skycast::testing::probe;
using skycast::testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

Var param(Shape s, std::uint64_t seed) { return Var::parameter(random_tensor(std::move(s), seed)); }

}  // namespace

TEST(Ops, ElementwiseGradients) {
    Var a = param({2, 3}, 1), b = param({2, 3}, 2);
    auto r = grad_check([&] { return probe(add(mul(sigmoid(a), tanh(b)), sub(scale(a, 0.5), relu(b)))); }, {a, b});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, ConcatSliceReshapeGradients) {
    Var a = param({2, 3, 4}, 3), b = param({2, 2, 4}, 4);
    auto r = grad_check(
        [&] {
            Var c = concat({a, b}, 1);
            return probe(reshape(slice(c, 1, 1, 3), {6, 4}));
        },
        {a, b});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, ConcatOnLastAxisInterleaves) {
    Var a = Var::constant(Tensor({2, 1}, std::vector<double>{1, 2}));
    Var b = Var::constant(Tensor({2, 1}, std::vector<double>{3, 4}));
    const Tensor c = concat({a, b}, 1).value();
    EXPECT_EQ(std::vector<double>(c.data(), c.data() + c.size()), (std::vector<double>{1, 3, 2, 4}));
}

TEST(Ops, Conv2dMatchesDirectSum) {
    Tensor x = random_tensor({2, 3, 4, 5}, 5);
    Tensor w = random_tensor({2, 3, 3, 3}, 6);
    Tensor b = random_tensor({2}, 7);
    Var out = conv2d(Var::constant(x), Var::constant(w), Var::constant(b));
    for (int n = 0; n < 2; ++n)
        for (int o = 0; o < 2; ++o)
            for (int y = 0; y < 4; ++y)
                for (int xx = 0; xx < 5; ++xx) {
                    double s = b[static_cast<std::size_t>(o)];
                    for (int c = 0; c < 3; ++c)
                        for (int ky = 0; ky < 3; ++ky)
                            for (int kx = 0; kx < 3; ++kx) {
                                const int iy = y + ky - 1, ix = xx + kx - 1;
                                if (iy < 0 || iy >= 4 || ix < 0 || ix >= 5) continue;
                                s += w[static_cast<std::size_t>(((o * 3 + c) * 3 + ky) * 3 + kx)] *
                                     x[static_cast<std::size_t>(((n * 3 + c) * 4 + iy) * 5 + ix)];
                            }
                    EXPECT_NEAR(out.value()[static_cast<std::size_t>(((n * 2 + o) * 4 + y) * 5 + xx)], s, 1e-12);
                }
}

TEST(Ops, Conv2dGradients) {
    Var x = param({2, 3, 4, 5}, 8), w = param({4, 3, 3, 3}, 9), b = param({4}, 10);
    auto r = grad_check([&] { return probe(conv2d(x, w, b)); }, {x, w, b});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, Conv2dRejectsChannelMismatch) {
    Var x = param({1, 3, 4, 4}, 1), w = param({2, 2, 3, 3}, 2);
    EXPECT_THROW(conv2d(x, w, Var()), ShapeError);
}

TEST(Ops, Conv3dGradients) {
    Var x = param({2, 1, 3, 3, 4}, 11), w = param({2, 1, 2, 3, 3}, 12), b = param({2}, 13);
    auto r = grad_check([&] { return probe(conv3d(x, w, b)); }, {x, w, b});
    EXPECT_LT(r.max_rel_error, kTol);
    EXPECT_EQ(conv3d(x, w, b).shape(), (Shape{2, 2, 2, 3, 4}));
}

TEST(Ops, PoolingAndUpsampleGradients) {
    Var x = param({2, 2, 3, 2, 3}, 14);
    Var y = param({1, 2, 2, 3}, 15);
    auto r = grad_check([&] { return add(probe(mean_depth(x)), probe(upsample_nearest(y, 5, 7), 3)); }, {x, y});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, TransposeConvShapeAndGradients) {
    Var x = param({2, 3, 3, 3}, 16), w = param({3, 2, 3, 3}, 17), b = param({2}, 18);
    EXPECT_EQ(conv_transpose2d(x, w, b, 2, 1, 0, 1).shape(), (Shape{2, 2, 5, 6}));
    auto r = grad_check([&] { return probe(conv_transpose2d(x, w, b, 2, 1, 1, 0)); }, {x, w, b});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, TransposeConvMatchesScatterSum) {
    Tensor x = random_tensor({1, 1, 2, 2}, 19);
    Tensor w = random_tensor({1, 1, 3, 3}, 20);
    Var out = conv_transpose2d(Var::constant(x), Var::constant(w), Var(), 2, 1, 0, 0);
    ASSERT_EQ(out.shape(), (Shape{1, 1, 3, 3}));
    // out[2y - 1 + ky][2x - 1 + kx] += x[y][x] * w[ky][kx]
    Tensor expect({1, 1, 3, 3});
    for (int y = 0; y < 2; ++y)
        for (int xx = 0; xx < 2; ++xx)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    const int oy = 2 * y - 1 + ky, ox = 2 * xx - 1 + kx;
                    if (oy < 0 || oy >= 3 || ox < 0 || ox >= 3) continue;
                    expect[static_cast<std::size_t>(oy * 3 + ox)] +=
                        x[static_cast<std::size_t>(y * 2 + xx)] * w[static_cast<std::size_t>(ky * 3 + kx)];
                }
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(out.value()[i], expect[i], 1e-12);
}

TEST(Ops, LinearAndChannelScaleGradients) {
    Var x = param({3, 4}, 21), w = param({2, 4}, 22), b = param({2}, 23);
    auto r = grad_check([&] { return probe(linear(x, w, b)); }, {x, w, b});
    EXPECT_LT(r.max_rel_error, kTol);
    Var m = param({2, 3, 2, 2}, 24), s = param({3}, 25);
    r = grad_check([&] { return probe(channel_scale(m, s)); }, {m, s});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, BatchNormTrainingGradients) {
    Var x = param({3, 2, 2, 3}, 26), g = param({2}, 27), b = param({2}, 28);
    BatchNormStats stats;
    auto r = grad_check([&] { return probe(batch_norm(x, g, b, stats, true)); }, {x, g, b});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, BatchNormInferenceUsesRunningStats) {
    Var x = param({2, 1, 1, 2}, 29), g = Var::constant(Tensor({1}, 2.0)), b = Var::constant(Tensor({1}, 0.5));
    BatchNormStats stats{Tensor({1}, 0.25), Tensor({1}, 4.0)};
    Var out = batch_norm(x, g, b, stats, false);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(out.value()[i], 2.0 * (x.value()[i] - 0.25) / std::sqrt(4.0 + 1e-5) + 0.5, 1e-12);
    EXPECT_EQ(stats.running_mean[0], 0.25);
    auto r = grad_check([&] { return probe(batch_norm(x, g, b, stats, false)); }, {x});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, BatchNormRunningStatsUpdate) {
    Tensor xv({2, 1, 1, 2}, std::vector<double>{1, 2, 3, 4});
    BatchNormStats stats;
    batch_norm(Var::constant(xv), Var::constant(Tensor({1}, 1.0)), Var::constant(Tensor({1}, 0.0)), stats, true);
    EXPECT_NEAR(stats.running_mean[0], 0.1 * 2.5, 1e-12);
    EXPECT_NEAR(stats.running_var[0], 0.9 + 0.1 * (5.0 / 3.0), 1e-12);
}

TEST(Ops, BatchNormTrainingRejectsSingleExample) {
    BatchNormStats stats;
    EXPECT_THROW(batch_norm(param({1, 2, 2, 2}, 1), param({2}, 2), param({2}, 3), stats, true), FitError);
}

TEST(Ops, MseLossDefinitionAndGradient) {
    Tensor label = random_tensor({2, 3}, 30);
    EXPECT_EQ(mse_loss(Var::constant(label), label).value()[0], 0.0);
    Tensor shifted = label;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 1.0;
    EXPECT_NEAR(mse_loss(Var::constant(shifted), label).value()[0], 1.0, 1e-12);
    Var p = param({2, 3}, 31);
    auto r = grad_check([&] { return mse_loss(p, label); }, {p});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Ops, NoGradGuardRecordsNothing) {
    Var a = param({2}, 1);
    NoGradGuard guard;
    Var b = sigmoid(a);
    EXPECT_FALSE(b.requires_grad());
    EXPECT_TRUE(b.node()->parents.empty());
}
