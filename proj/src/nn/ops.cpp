#include "skycast/nn/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "skycast/core/error.hpp"

namespace skycast::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeError(what);
}

void require_same(const Var& a, const Var& b, const char* op) {
    require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                        shape_string(b.shape()));
}

template <typename F, typename G>
Var unary(const Var& a, F f, G df_from_y) {
    Tensor out(a.shape());
    const auto& x = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
    return make_result(std::move(out), {a}, [df_from_y](Node& self) {
        Node& p = *self.parents[0];
        for (std::size_t i = 0; i < self.value.size(); ++i)
            p.grad[i] += self.grad[i] * df_from_y(self.value[i], p.value[i]);
    });
}

// Geometry shared by conv2d and conv3d: valid along depth, same in plane.
struct ConvGeometry {
    int batch, channels, depth, height, width;
    int kd, k, out_depth;

    int pad() const { return k / 2; }
    std::size_t rows() const { return static_cast<std::size_t>(channels) * kd * k * k; }
    std::size_t cols() const { return static_cast<std::size_t>(batch) * out_depth * height * width; }
};

void im2col(const ConvGeometry& g, const double* x, RowMat& cols) {
    cols.resize(static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
    const int P = g.pad();
    const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
    Eigen::Index r = 0;
    for (int c = 0; c < g.channels; ++c)
        for (int dz = 0; dz < g.kd; ++dz)
            for (int ky = 0; ky < g.k; ++ky)
                for (int kx = 0; kx < g.k; ++kx, ++r) {
                    double* row = cols.row(r).data();
                    std::size_t col = 0;
                    for (int b = 0; b < g.batch; ++b)
                        for (int z = 0; z < g.out_depth; ++z) {
                            const double* src = x + ((static_cast<std::size_t>(b) * g.channels + c) * g.depth + z + dz) * plane;
                            for (int y = 0; y < g.height; ++y) {
                                const int iy = y + ky - P;
                                if (iy < 0 || iy >= g.height) {
                                    for (int xx = 0; xx < g.width; ++xx) row[col++] = 0.0;
                                    continue;
                                }
                                const double* line = src + static_cast<std::size_t>(iy) * g.width;
                                for (int xx = 0; xx < g.width; ++xx) {
                                    const int ix = xx + kx - P;
                                    row[col++] = (ix >= 0 && ix < g.width) ? line[ix] : 0.0;
                                }
                            }
                        }
                }
}

void col2im(const ConvGeometry& g, const RowMat& cols, double* dx) {
    const int P = g.pad();
    const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
    Eigen::Index r = 0;
    for (int c = 0; c < g.channels; ++c)
        for (int dz = 0; dz < g.kd; ++dz)
            for (int ky = 0; ky < g.k; ++ky)
                for (int kx = 0; kx < g.k; ++kx, ++r) {
                    const double* row = cols.row(r).data();
                    std::size_t col = 0;
                    for (int b = 0; b < g.batch; ++b)
                        for (int z = 0; z < g.out_depth; ++z) {
                            double* dst = dx + ((static_cast<std::size_t>(b) * g.channels + c) * g.depth + z + dz) * plane;
                            for (int y = 0; y < g.height; ++y) {
                                const int iy = y + ky - P;
                                if (iy < 0 || iy >= g.height) {
                                    col += static_cast<std::size_t>(g.width);
                                    continue;
                                }
                                double* line = dst + static_cast<std::size_t>(iy) * g.width;
                                for (int xx = 0; xx < g.width; ++xx, ++col) {
                                    const int ix = xx + kx - P;
                                    if (ix >= 0 && ix < g.width) line[ix] += row[col];
                                }
                            }
                        }
                }
}

// Output (B, O, Zo, H, W) <-> matrix (O, B * Zo * H * W).
void matrix_to_output(const RowMat& m, const Tensor* bias, int batch, int out_ch, std::size_t spatial, double* out) {
    for (int b = 0; b < batch; ++b)
        for (int o = 0; o < out_ch; ++o) {
            const double* src = m.row(o).data() + static_cast<std::size_t>(b) * spatial;
            double* dst = out + (static_cast<std::size_t>(b) * out_ch + o) * spatial;
            const double add = bias ? (*bias)[static_cast<std::size_t>(o)] : 0.0;
            for (std::size_t p = 0; p < spatial; ++p) dst[p] = src[p] + add;
        }
}

RowMat output_to_matrix(const double* g, int batch, int out_ch, std::size_t spatial) {
    RowMat m(out_ch, static_cast<Eigen::Index>(static_cast<std::size_t>(batch) * spatial));
    for (int b = 0; b < batch; ++b)
        for (int o = 0; o < out_ch; ++o) {
            const double* src = g + (static_cast<std::size_t>(b) * out_ch + o) * spatial;
            double* dst = m.row(o).data() + static_cast<std::size_t>(b) * spatial;
            std::copy(src, src + spatial, dst);
        }
    return m;
}

Var conv_general(const Var& x, const Var& w, const Var& b, const ConvGeometry& g, Shape out_shape) {
    const int out_ch = w.shape()[0];
    const std::size_t spatial = static_cast<std::size_t>(g.out_depth) * g.height * g.width;
    if (b) require(b.shape() == Shape{out_ch}, "conv bias must have shape (O)");

    RowMat cols;
    im2col(g, x.value().data(), cols);
    ConstMapMat wm(w.value().data(), out_ch, static_cast<Eigen::Index>(g.rows()));
    RowMat om = wm * cols;
    Tensor out(std::move(out_shape));
    matrix_to_output(om, b ? &b.value() : nullptr, g.batch, out_ch, spatial, out.data());

    std::vector<Var> inputs{x, w};
    const bool has_bias = static_cast<bool>(b);
    if (has_bias) inputs.push_back(b);
    return make_result(std::move(out), inputs, [g, out_ch, spatial, has_bias](Node& self) {
        Node& px = *self.parents[0];
        Node& pw = *self.parents[1];
        const RowMat gm = output_to_matrix(self.grad.data(), g.batch, out_ch, spatial);
        if (has_bias && self.parents[2]->requires_grad) {
            Node& pb = *self.parents[2];
            for (int o = 0; o < out_ch; ++o) pb.grad[static_cast<std::size_t>(o)] += gm.row(o).sum();
        }
        ConstMapMat wm(pw.value.data(), out_ch, static_cast<Eigen::Index>(g.rows()));
        if (pw.requires_grad) {
            RowMat cols;
            im2col(g, px.value.data(), cols);
            MapMat dw(pw.grad.data(), out_ch, static_cast<Eigen::Index>(g.rows()));
            dw.noalias() += gm * cols.transpose();
        }
        if (px.requires_grad) {
            RowMat dcols = wm.transpose() * gm;
            col2im(g, dcols, px.grad.data());
        }
    });
}

}  // namespace

Var add(const Var& a, const Var& b) {
    require_same(a, b, "add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
    return make_result(std::move(out), {a, b}, [](Node& self) {
        for (auto& p : self.parents)
            if (p->requires_grad)
                for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    });
}

Var sub(const Var& a, const Var& b) {
    require_same(a, b, "sub");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
    return make_result(std::move(out), {a, b}, [](Node& self) {
        if (self.parents[0]->requires_grad)
            for (std::size_t i = 0; i < self.grad.size(); ++i) self.parents[0]->grad[i] += self.grad[i];
        if (self.parents[1]->requires_grad)
            for (std::size_t i = 0; i < self.grad.size(); ++i) self.parents[1]->grad[i] -= self.grad[i];
    });
}

Var mul(const Var& a, const Var& b) {
    require_same(a, b, "mul");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
    return make_result(std::move(out), {a, b}, [](Node& self) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad)
            for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.value[i];
        if (pb.requires_grad)
            for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.value[i];
    });
}

Var scale(const Var& a, double factor) {
    return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var sigmoid(const Var& a) {
    return unary(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double y, double) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
    return unary(a, [](double x) { return std::tanh(x); }, [](double y, double) { return 1.0 - y * y; });
}

Var relu(const Var& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double, double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var reshape(const Var& a, Shape shape) {
    Tensor out = a.value().reshaped(std::move(shape));
    return make_result(std::move(out), {a}, [](Node& self) {
        Node& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
    });
}

Var concat(const std::vector<Var>& parts, int axis) {
    require(!parts.empty(), "concat of nothing");
    const Shape& first = parts.front().shape();
    require(axis >= 0 && static_cast<std::size_t>(axis) < first.size(), "concat axis out of range");
    Shape out_shape = first;
    out_shape[static_cast<std::size_t>(axis)] = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        require(s.size() == first.size(), "concat rank mismatch");
        for (std::size_t d = 0; d < s.size(); ++d)
            if (static_cast<int>(d) != axis)
                require(s[d] == first[d], "concat extent mismatch: " + shape_string(s) + " vs " + shape_string(first));
        out_shape[static_cast<std::size_t>(axis)] += s[static_cast<std::size_t>(axis)];
    }
    std::size_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(first[static_cast<std::size_t>(d)]);
    for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < first.size(); ++d) inner *= static_cast<std::size_t>(first[d]);

    std::vector<std::size_t> block;
    for (const auto& p : parts) block.push_back(static_cast<std::size_t>(p.shape()[static_cast<std::size_t>(axis)]) * inner);
    std::size_t out_block = 0;
    for (std::size_t bl : block) out_block += bl;

    Tensor out(out_shape);
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t at = o * out_block;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            const double* src = parts[k].value().data() + o * block[k];
            std::copy(src, src + block[k], out.data() + at);
            at += block[k];
        }
    }
    return make_result(std::move(out), parts, [outer, block, out_block](Node& self) {
        for (std::size_t o = 0; o < outer; ++o) {
            std::size_t at = o * out_block;
            for (std::size_t k = 0; k < self.parents.size(); ++k) {
                Node& p = *self.parents[k];
                if (p.requires_grad) {
                    double* dst = p.grad.data() + o * block[k];
                    const double* src = self.grad.data() + at;
                    for (std::size_t i = 0; i < block[k]; ++i) dst[i] += src[i];
                }
                at += block[k];
            }
        }
    });
}

Var slice(const Var& a, int axis, int start, int length) {
    const Shape& s = a.shape();
    require(axis >= 0 && static_cast<std::size_t>(axis) < s.size(), "slice axis out of range");
    const int extent = s[static_cast<std::size_t>(axis)];
    require(start >= 0 && length >= 0 && start + length <= extent, "slice out of range");
    std::size_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(s[static_cast<std::size_t>(d)]);
    for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < s.size(); ++d) inner *= static_cast<std::size_t>(s[d]);
    Shape out_shape = s;
    out_shape[static_cast<std::size_t>(axis)] = length;
    Tensor out(out_shape);
    const std::size_t in_block = static_cast<std::size_t>(extent) * inner;
    const std::size_t out_block = static_cast<std::size_t>(length) * inner;
    const std::size_t offset = static_cast<std::size_t>(start) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
        const double* src = a.value().data() + o * in_block + offset;
        std::copy(src, src + out_block, out.data() + o * out_block);
    }
    return make_result(std::move(out), {a}, [outer, in_block, out_block, offset](Node& self) {
        Node& p = *self.parents[0];
        for (std::size_t o = 0; o < outer; ++o) {
            double* dst = p.grad.data() + o * in_block + offset;
            const double* src = self.grad.data() + o * out_block;
            for (std::size_t i = 0; i < out_block; ++i) dst[i] += src[i];
        }
    });
}

Var channel_scale(const Var& x, const Var& s) {
    const Shape& xs = x.shape();
    require(xs.size() == 4, "channel_scale expects (B, C, H, W)");
    require(s.shape() == Shape{xs[1]}, "channel_scale factor must have shape (C)");
    const int batch = xs[0], ch = xs[1];
    const std::size_t plane = static_cast<std::size_t>(xs[2]) * xs[3];
    Tensor out(xs);
    for (int b = 0; b < batch; ++b)
        for (int c = 0; c < ch; ++c) {
            const std::size_t base = (static_cast<std::size_t>(b) * ch + c) * plane;
            for (std::size_t p = 0; p < plane; ++p) out[base + p] = x.value()[base + p] * s.value()[static_cast<std::size_t>(c)];
        }
    return make_result(std::move(out), {x, s}, [batch, ch, plane](Node& self) {
        Node& px = *self.parents[0];
        Node& ps = *self.parents[1];
        for (int b = 0; b < batch; ++b)
            for (int c = 0; c < ch; ++c) {
                const std::size_t base = (static_cast<std::size_t>(b) * ch + c) * plane;
                double acc = 0.0;
                for (std::size_t p = 0; p < plane; ++p) {
                    if (px.requires_grad) px.grad[base + p] += self.grad[base + p] * ps.value[static_cast<std::size_t>(c)];
                    acc += self.grad[base + p] * px.value[base + p];
                }
                if (ps.requires_grad) ps.grad[static_cast<std::size_t>(c)] += acc;
            }
    });
}

Var conv2d(const Var& x, const Var& w, const Var& b) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    require(xs.size() == 4, "conv2d input must be (B, C, H, W), got " + shape_string(xs));
    require(ws.size() == 4, "conv2d kernel must be (O, C, k, k), got " + shape_string(ws));
    require(ws[1] == xs[1], "conv2d channel mismatch: input " + shape_string(xs) + ", kernel " + shape_string(ws));
    require(ws[2] == ws[3] && ws[2] % 2 == 1, "conv2d kernels must be square and odd");
    ConvGeometry g{xs[0], xs[1], 1, xs[2], xs[3], 1, ws[2], 1};
    return conv_general(x, w, b, g, {xs[0], ws[0], xs[2], xs[3]});
}

Var conv3d(const Var& x, const Var& w, const Var& b) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    require(xs.size() == 5, "conv3d input must be (B, C, Z, H, W), got " + shape_string(xs));
    require(ws.size() == 5, "conv3d kernel must be (O, C, kz, k, k), got " + shape_string(ws));
    require(ws[1] == xs[1], "conv3d channel mismatch");
    require(ws[3] == ws[4] && ws[3] % 2 == 1, "conv3d plane kernels must be square and odd");
    require(ws[2] >= 1 && ws[2] <= xs[2], "conv3d depth kernel exceeds input depth");
    const int out_depth = xs[2] - ws[2] + 1;
    ConvGeometry g{xs[0], xs[1], xs[2], xs[3], xs[4], ws[2], ws[3], out_depth};
    return conv_general(x, w, b, g, {xs[0], ws[0], out_depth, xs[3], xs[4]});
}

Var mean_depth(const Var& x) {
    const Shape& xs = x.shape();
    require(xs.size() == 5, "mean_depth expects (B, C, Z, H, W)");
    const int bc = xs[0] * xs[1], depth = xs[2];
    const std::size_t plane = static_cast<std::size_t>(xs[3]) * xs[4];
    Tensor out({xs[0], xs[1], xs[3], xs[4]});
    for (int n = 0; n < bc; ++n)
        for (int z = 0; z < depth; ++z) {
            const double* src = x.value().data() + (static_cast<std::size_t>(n) * depth + z) * plane;
            double* dst = out.data() + static_cast<std::size_t>(n) * plane;
            for (std::size_t p = 0; p < plane; ++p) dst[p] += src[p] / depth;
        }
    return make_result(std::move(out), {x}, [bc, depth, plane](Node& self) {
        Node& p = *self.parents[0];
        for (int n = 0; n < bc; ++n)
            for (int z = 0; z < depth; ++z) {
                double* dst = p.grad.data() + (static_cast<std::size_t>(n) * depth + z) * plane;
                const double* src = self.grad.data() + static_cast<std::size_t>(n) * plane;
                for (std::size_t q = 0; q < plane; ++q) dst[q] += src[q] / depth;
            }
    });
}

Var upsample_nearest(const Var& x, int height, int width) {
    const Shape& xs = x.shape();
    require(xs.size() == 4, "upsample expects (B, C, h, w)");
    require(height >= xs[2] && width >= xs[3], "upsample target smaller than input");
    const int bc = xs[0] * xs[1], h = xs[2], w = xs[3];
    std::vector<std::size_t> src_index(static_cast<std::size_t>(height) * width);
    for (int y = 0; y < height; ++y)
        for (int xx = 0; xx < width; ++xx)
            src_index[static_cast<std::size_t>(y) * width + xx] =
                static_cast<std::size_t>(y * h / height) * w + static_cast<std::size_t>(xx * w / width);
    const std::size_t in_plane = static_cast<std::size_t>(h) * w;
    const std::size_t out_plane = src_index.size();
    Tensor out({xs[0], xs[1], height, width});
    for (int n = 0; n < bc; ++n)
        for (std::size_t p = 0; p < out_plane; ++p)
            out[static_cast<std::size_t>(n) * out_plane + p] = x.value()[static_cast<std::size_t>(n) * in_plane + src_index[p]];
    return make_result(std::move(out), {x}, [bc, in_plane, out_plane, src_index](Node& self) {
        Node& p = *self.parents[0];
        for (int n = 0; n < bc; ++n)
            for (std::size_t q = 0; q < out_plane; ++q)
                p.grad[static_cast<std::size_t>(n) * in_plane + src_index[q]] += self.grad[static_cast<std::size_t>(n) * out_plane + q];
    });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int output_pad_h,
                     int output_pad_w) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    require(xs.size() == 4 && ws.size() == 4, "conv_transpose2d expects 4-d input and kernel");
    require(ws[0] == xs[1], "conv_transpose2d channel mismatch");
    require(ws[2] == ws[3], "conv_transpose2d kernels must be square");
    require(stride >= 1 && pad >= 0 && output_pad_h >= 0 && output_pad_w >= 0 && output_pad_h < stride &&
                output_pad_w < stride,
            "invalid transpose-convolution geometry");
    const int batch = xs[0], cin = xs[1], h = xs[2], wd = xs[3];
    const int cout = ws[1], k = ws[2];
    const int out_h = (h - 1) * stride - 2 * pad + k + output_pad_h;
    const int out_w = (wd - 1) * stride - 2 * pad + k + output_pad_w;
    require(out_h > 0 && out_w > 0, "transpose convolution produces an empty map");
    if (b) require(b.shape() == Shape{cout}, "conv_transpose2d bias must have shape (O)");

    const std::size_t in_plane = static_cast<std::size_t>(h) * wd;
    const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
    const Eigen::Index okk = static_cast<Eigen::Index>(cout) * k * k;
    const Eigen::Index ncols = static_cast<Eigen::Index>(batch * in_plane);

    // Input as (C_in, B * h * w).
    auto input_matrix = [=](const double* src) {
        RowMat m(cin, ncols);
        for (int bb = 0; bb < batch; ++bb)
            for (int c = 0; c < cin; ++c)
                std::copy(src + (static_cast<std::size_t>(bb) * cin + c) * in_plane,
                          src + (static_cast<std::size_t>(bb) * cin + c + 1) * in_plane,
                          m.row(c).data() + static_cast<std::size_t>(bb) * in_plane);
        return m;
    };
    // Visits every (kernel tap, input pixel) pair that lands inside the output.
    auto for_each_tap = [=](auto&& fn) {
        Eigen::Index r = 0;
        for (int o = 0; o < cout; ++o)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx, ++r)
                    for (int bb = 0; bb < batch; ++bb)
                        for (int y = 0; y < h; ++y) {
                            const int oy = y * stride - pad + ky;
                            if (oy < 0 || oy >= out_h) continue;
                            for (int xx = 0; xx < wd; ++xx) {
                                const int ox = xx * stride - pad + kx;
                                if (ox < 0 || ox >= out_w) continue;
                                const Eigen::Index col = static_cast<Eigen::Index>(bb * in_plane + static_cast<std::size_t>(y) * wd + xx);
                                const std::size_t out_idx =
                                    (static_cast<std::size_t>(bb) * cout + o) * out_plane + static_cast<std::size_t>(oy) * out_w + ox;
                                fn(r, col, out_idx);
                            }
                        }
    };

    const RowMat xm = input_matrix(x.value().data());
    ConstMapMat wm(w.value().data(), cin, okk);
    const RowMat cols = wm.transpose() * xm;
    Tensor out({batch, cout, out_h, out_w});
    for_each_tap([&](Eigen::Index r, Eigen::Index col, std::size_t out_idx) { out[out_idx] += cols(r, col); });
    if (b)
        for (int bb = 0; bb < batch; ++bb)
            for (int o = 0; o < cout; ++o)
                for (std::size_t p = 0; p < out_plane; ++p)
                    out[(static_cast<std::size_t>(bb) * cout + o) * out_plane + p] += b.value()[static_cast<std::size_t>(o)];

    std::vector<Var> inputs{x, w};
    const bool has_bias = static_cast<bool>(b);
    if (has_bias) inputs.push_back(b);
    return make_result(std::move(out), inputs,
                       [=](Node& self) {
                           Node& px = *self.parents[0];
                           Node& pw = *self.parents[1];
                           RowMat dcols = RowMat::Zero(okk, ncols);
                           for_each_tap([&](Eigen::Index r, Eigen::Index col, std::size_t out_idx) {
                               dcols(r, col) = self.grad[out_idx];
                           });
                           if (pw.requires_grad) {
                               const RowMat xm2 = input_matrix(px.value.data());
                               MapMat dw(pw.grad.data(), cin, okk);
                               dw.noalias() += xm2 * dcols.transpose();
                           }
                           if (px.requires_grad) {
                               ConstMapMat wm2(pw.value.data(), cin, okk);
                               const RowMat dx = wm2 * dcols;
                               for (int bb = 0; bb < batch; ++bb)
                                   for (int c = 0; c < cin; ++c) {
                                       double* dst = px.grad.data() + (static_cast<std::size_t>(bb) * cin + c) * in_plane;
                                       const double* src = dx.row(c).data() + static_cast<std::size_t>(bb) * in_plane;
                                       for (std::size_t p = 0; p < in_plane; ++p) dst[p] += src[p];
                                   }
                           }
                           if (has_bias && self.parents[2]->requires_grad) {
                               Node& pb = *self.parents[2];
                               for (int bb = 0; bb < batch; ++bb)
                                   for (int o = 0; o < cout; ++o)
                                       for (std::size_t p = 0; p < out_plane; ++p)
                                           pb.grad[static_cast<std::size_t>(o)] +=
                                               self.grad[(static_cast<std::size_t>(bb) * cout + o) * out_plane + p];
                           }
                       });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    require(xs.size() == 2 && ws.size() == 2 && ws[1] == xs[1], "linear shape mismatch: " + shape_string(xs) +
                                                                     " x " + shape_string(ws));
    const int batch = xs[0], n = xs[1], m = ws[0];
    if (b) require(b.shape() == Shape{m}, "linear bias must have shape (M)");
    ConstMapMat xm(x.value().data(), batch, n);
    ConstMapMat wm(w.value().data(), m, n);
    Tensor out({batch, m});
    MapMat om(out.data(), batch, m);
    om.noalias() = xm * wm.transpose();
    if (b)
        for (int r = 0; r < batch; ++r)
            for (int c = 0; c < m; ++c) om(r, c) += b.value()[static_cast<std::size_t>(c)];
    std::vector<Var> inputs{x, w};
    const bool has_bias = static_cast<bool>(b);
    if (has_bias) inputs.push_back(b);
    return make_result(std::move(out), inputs, [batch, n, m, has_bias](Node& self) {
        Node& px = *self.parents[0];
        Node& pw = *self.parents[1];
        ConstMapMat gm(self.grad.data(), batch, m);
        if (px.requires_grad) {
            MapMat dx(px.grad.data(), batch, n);
            dx.noalias() += gm * ConstMapMat(pw.value.data(), m, n);
        }
        if (pw.requires_grad) {
            MapMat dw(pw.grad.data(), m, n);
            dw.noalias() += gm.transpose() * ConstMapMat(px.value.data(), batch, n);
        }
        if (has_bias && self.parents[2]->requires_grad) {
            Node& pb = *self.parents[2];
            for (int c = 0; c < m; ++c) pb.grad[static_cast<std::size_t>(c)] += gm.col(c).sum();
        }
    });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats, bool training) {
    const Shape& xs = x.shape();
    require(xs.size() == 4, "batch_norm expects (B, C, H, W)");
    const int batch = xs[0], ch = xs[1];
    require(gamma.shape() == Shape{ch} && beta.shape() == Shape{ch}, "batch_norm affine parameters must be (C)");
    if (stats.running_mean.size() != static_cast<std::size_t>(ch)) {
        stats.running_mean = Tensor({ch}, 0.0);
        stats.running_var = Tensor({ch}, 1.0);
    }
    if (training && batch < 2)
        throw FitError("batch normalization needs at least two examples per training batch",
                       "batch size " + std::to_string(batch));

    const std::size_t plane = static_cast<std::size_t>(xs[2]) * xs[3];
    const double count = static_cast<double>(batch) * static_cast<double>(plane);
    std::vector<double> mean(static_cast<std::size_t>(ch)), inv_std(static_cast<std::size_t>(ch));
    auto at = [&](int b, int c) { return (static_cast<std::size_t>(b) * ch + c) * plane; };

    for (int c = 0; c < ch; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (training) {
            double s = 0.0;
            for (int b = 0; b < batch; ++b)
                for (std::size_t p = 0; p < plane; ++p) s += x.value()[at(b, c) + p];
            const double mu = s / count;
            double v = 0.0;
            for (int b = 0; b < batch; ++b)
                for (std::size_t p = 0; p < plane; ++p) {
                    const double d = x.value()[at(b, c) + p] - mu;
                    v += d * d;
                }
            v /= count;
            mean[uc] = mu;
            inv_std[uc] = 1.0 / std::sqrt(v + stats.eps);
            stats.running_mean[uc] = (1.0 - stats.momentum) * stats.running_mean[uc] + stats.momentum * mu;
            stats.running_var[uc] =
                (1.0 - stats.momentum) * stats.running_var[uc] + stats.momentum * v * count / (count - 1.0);
        } else {
            mean[uc] = stats.running_mean[uc];
            inv_std[uc] = 1.0 / std::sqrt(stats.running_var[uc] + stats.eps);
        }
    }

    Tensor xhat(xs);
    Tensor out(xs);
    for (int b = 0; b < batch; ++b)
        for (int c = 0; c < ch; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            for (std::size_t p = 0; p < plane; ++p) {
                const std::size_t i = at(b, c) + p;
                xhat[i] = (x.value()[i] - mean[uc]) * inv_std[uc];
                out[i] = gamma.value()[uc] * xhat[i] + beta.value()[uc];
            }
        }

    return make_result(std::move(out), {x, gamma, beta},
                       [batch, ch, plane, count, training, inv_std, xhat = std::move(xhat)](Node& self) {
                           Node& px = *self.parents[0];
                           Node& pg = *self.parents[1];
                           Node& pb = *self.parents[2];
                           auto at = [&](int b, int c) { return (static_cast<std::size_t>(b) * ch + c) * plane; };
                           for (int c = 0; c < ch; ++c) {
                               const auto uc = static_cast<std::size_t>(c);
                               double sum_g = 0.0, sum_gx = 0.0;
                               for (int b = 0; b < batch; ++b)
                                   for (std::size_t p = 0; p < plane; ++p) {
                                       const std::size_t i = at(b, c) + p;
                                       sum_g += self.grad[i];
                                       sum_gx += self.grad[i] * xhat[i];
                                   }
                               if (pg.requires_grad) pg.grad[uc] += sum_gx;
                               if (pb.requires_grad) pb.grad[uc] += sum_g;
                               if (!px.requires_grad) continue;
                               const double g = pg.value[uc];
                               for (int b = 0; b < batch; ++b)
                                   for (std::size_t p = 0; p < plane; ++p) {
                                       const std::size_t i = at(b, c) + p;
                                       if (training) {
                                           px.grad[i] += g * inv_std[uc] / count *
                                                         (count * self.grad[i] - sum_g - xhat[i] * sum_gx);
                                       } else {
                                           px.grad[i] += g * inv_std[uc] * self.grad[i];
                                       }
                                   }
                           }
                       });
}

Var mse_loss(const Var& prediction, const Tensor& target) {
    require(prediction.value().size() == target.size(), "mse_loss size mismatch");
    const std::size_t n = target.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = prediction.value()[i] - target[i];
        s += d * d;
    }
    Tensor out({1}, s / static_cast<double>(n));
    return make_result(std::move(out), {prediction}, [target, n](Node& self) {
        Node& p = *self.parents[0];
        const double g = self.grad[0] * 2.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) p.grad[i] += g * (p.value[i] - target[i]);
    });
}

Var weighted_sum(const Var& a, const Tensor& weights) {
    require(a.value().size() == weights.size(), "weighted_sum size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += a.value()[i] * weights[i];
    return make_result(Tensor({1}, s), {a}, [weights](Node& self) {
        Node& p = *self.parents[0];
        for (std::size_t i = 0; i < weights.size(); ++i) p.grad[i] += self.grad[0] * weights[i];
    });
}

}  // namespace skycast::nn
