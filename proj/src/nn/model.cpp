#include "skycast/nn/model.hpp"

#include <cmath>
#include <sstream>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"

namespace skycast::nn {

namespace {

struct VariantInfo {
    ModelVariant variant;
    const char* name;
    const char* label;
};

constexpr VariantInfo kVariants[] = {
    {ModelVariant::kCnnBaseline, "CNN_BASELINE", "CNN"},
    {ModelVariant::kConvLstmFlat, "CONVLSTM_FLAT", "ConvLSTM"},
    {ModelVariant::kConvLstmSpatial, "CONVLSTM_SPATIAL", "+Spatial"},
    {ModelVariant::kPlusShallowCnn, "PLUS_SHALLOW_CNN", "+Shallow"},
    {ModelVariant::kDeepShallow, "DEEPSHALLOW", "+DeepShallow"},
    {ModelVariant::kDeepShallowShared, "DEEPSHALLOW_SHARED", "+SharedWeights"},
};

const VariantInfo& info(ModelVariant v) {
    for (const auto& i : kVariants)
        if (i.variant == v) return i;
    throw DomainError("unknown model variant");
}

// Counter-based uniform draws in [-limit, limit].
Tensor glorot(const Shape& shape, double fan_in, double fan_out, std::uint64_t seed, const std::string& name) {
    Tensor t(shape);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    const std::uint64_t key = stable_hash({seed, hash_string(name)});
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double u = static_cast<double>(stable_hash({key, i}) >> 11) * 0x1.0p-53;
        t[i] = (2.0 * u - 1.0) * limit;
    }
    return t;
}

void check_positive(int v, const char* field) {
    if (v <= 0) throw ConfigError(std::string("hyperparameter ") + field + " must be positive, got " + std::to_string(v));
}

void check_odd(int v, const char* field) {
    check_positive(v, field);
    if (v % 2 == 0) throw ConfigError(std::string("hyperparameter ") + field + " must be odd, got " + std::to_string(v));
}

}  // namespace

const char* variant_name(ModelVariant v) { return info(v).name; }
const char* variant_label(ModelVariant v) { return info(v).label; }

ModelVariant parse_variant(const std::string& text) {
    for (const auto& i : kVariants)
        if (text == i.name || text == i.label) return i.variant;
    throw ConfigError("unknown model variant '" + text + "'");
}

const std::vector<ModelVariant>& all_variants() {
    static const std::vector<ModelVariant> v = {ModelVariant::kCnnBaseline,    ModelVariant::kConvLstmFlat,
                                                ModelVariant::kConvLstmSpatial, ModelVariant::kPlusShallowCnn,
                                                ModelVariant::kDeepShallow,    ModelVariant::kDeepShallowShared};
    return v;
}

bool uses_temporal(ModelVariant v) { return v != ModelVariant::kCnnBaseline; }

int shallow_steps(ModelVariant v, int configured) {
    switch (v) {
        case ModelVariant::kPlusShallowCnn: return 1;
        case ModelVariant::kDeepShallow:
        case ModelVariant::kDeepShallowShared: return configured;
        default: return 0;
    }
}

void HyperParams::validate() const {
    check_positive(window_size, "window_size");
    check_positive(temporal_channels, "temporal_channels");
    check_positive(closure_channels, "closure_channels");
    check_positive(season_channels, "season_channels");
    check_positive(decoder_channels, "decoder_channels");
    check_odd(temporal_kernel, "temporal_kernel");
    check_odd(closure_kernel, "closure_kernel");
    check_odd(season_kernel, "season_kernel");
    check_odd(decoder_kernel, "decoder_kernel");
    check_positive(deep_layers, "deep_layers");
    check_positive(decoder_layers, "decoder_layers");
    check_positive(season_layers, "season_layers");
    check_positive(shallow_steps, "shallow_steps");
    check_positive(batch_size, "batch_size");
    if (season_base_h < 0 || season_base_w < 0) throw ConfigError("season base size must be non-negative");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("hyperparameter learning_rate must be positive");
    if (epochs < 0) throw ConfigError("hyperparameter epochs must be non-negative");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
        throw ConfigError("hyperparameter final_lr_fraction must lie in (0, 1]");
}

nlohmann::json HyperParams::to_json() const {
    return {{"window_size", window_size},         {"temporal_channels", temporal_channels},
            {"closure_channels", closure_channels}, {"season_channels", season_channels},
            {"decoder_channels", decoder_channels}, {"temporal_kernel", temporal_kernel},
            {"closure_kernel", closure_kernel},   {"season_kernel", season_kernel},
            {"decoder_kernel", decoder_kernel},   {"deep_layers", deep_layers},
            {"decoder_layers", decoder_layers},   {"season_layers", season_layers},
            {"shallow_steps", shallow_steps},     {"season_base_h", season_base_h},
            {"season_base_w", season_base_w},     {"learning_rate", learning_rate},
            {"final_lr_fraction", final_lr_fraction},
            {"batch_size", batch_size},           {"epochs", epochs},
            {"seed", seed}};
}

HyperParams HyperParams::from_json(const nlohmann::json& j) {
    HyperParams hp;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("window_size", hp.window_size);
    get("temporal_channels", hp.temporal_channels);
    get("closure_channels", hp.closure_channels);
    get("season_channels", hp.season_channels);
    get("decoder_channels", hp.decoder_channels);
    get("temporal_kernel", hp.temporal_kernel);
    get("closure_kernel", hp.closure_kernel);
    get("season_kernel", hp.season_kernel);
    get("decoder_kernel", hp.decoder_kernel);
    get("deep_layers", hp.deep_layers);
    get("decoder_layers", hp.decoder_layers);
    get("season_layers", hp.season_layers);
    get("shallow_steps", hp.shallow_steps);
    get("season_base_h", hp.season_base_h);
    get("season_base_w", hp.season_base_w);
    get("learning_rate", hp.learning_rate);
    get("final_lr_fraction", hp.final_lr_fraction);
    get("batch_size", hp.batch_size);
    get("epochs", hp.epochs);
    get("seed", hp.seed);
    return hp;
}

Var& ParamStore::add(const std::string& name, Tensor value) {
    if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    index_[name] = entries_.size();
    entries_.emplace_back(name, Var::parameter(std::move(value)));
    return entries_.back().second;
}

Var& ParamStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("no parameter named '" + name + "'");
    return entries_[it->second].second;
}

const Var& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("no parameter named '" + name + "'");
    return entries_[it->second].second;
}

std::size_t ParamStore::count() const {
    std::size_t n = 0;
    for (const auto& [name, v] : entries_) n += v.value().size();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& [name, v] : entries_) v.zero_grad();
}

CellState convlstm_cell_step(const Var& x, const CellState& state, const Var& wx, const Var& wh, const Var& b) {
    const Shape& xs = x.shape();
    const Shape& hs = state.h.shape();
    if (xs.size() != 4 || hs.size() != 4 || xs[0] != hs[0] || xs[2] != hs[2] || xs[3] != hs[3] ||
        state.c.shape() != hs)
        throw ShapeError("convlstm cell: input " + shape_string(xs) + " and state " + shape_string(hs) +
                         " are inconsistent");
    const int ch = hs[1];
    if (wx.shape().size() != 4 || wx.shape()[0] != 4 * ch || wx.shape()[1] != xs[1] || wh.shape().size() != 4 ||
        wh.shape()[0] != 4 * ch || wh.shape()[1] != ch)
        throw ShapeError("convlstm cell: kernels " + shape_string(wx.shape()) + ", " + shape_string(wh.shape()) +
                         " do not match input " + shape_string(xs) + " and hidden width " + std::to_string(ch));
    const Var gates = conv2d(concat({x, state.h}, 1), concat({wx, wh}, 1), b);
    const Var i = sigmoid(slice(gates, 1, 0, ch));
    const Var f = sigmoid(slice(gates, 1, ch, ch));
    const Var g = tanh(slice(gates, 1, 2 * ch, ch));
    const Var o = sigmoid(slice(gates, 1, 3 * ch, ch));
    const Var c = add(mul(f, state.c), mul(i, g));
    return {mul(o, tanh(c)), c};
}

std::pair<int, int> season_reachable(int base, int layers) {
    const int scale = 1 << layers;
    return {scale * (base - 1) + 1, scale * base};
}

Model::Model(ModelVariant variant, HyperParams hp, ModelGeometry geometry)
    : variant_(variant), hp_(hp), geometry_(geometry) {
    hp_.validate();
    if (geometry_.fares <= 0 || geometry_.intervals <= 0 || geometry_.closure_depth <= 0 || geometry_.season_length <= 0)
        throw ConfigError("model geometry must be positive");
    const int s = shallow_steps(variant_, hp_.shallow_steps);
    if (hp_.window_size + 1 < s)
        throw ConfigError("shallow branch needs " + std::to_string(s) + " sequence elements but the window has " +
                          std::to_string(hp_.window_size + 1));
    build();
}

int Model::decoder_input_channels() const {
    return (uses_temporal(variant_) ? hp_.temporal_channels : 0) + hp_.closure_channels + hp_.season_channels;
}

void Model::build() {
    const std::uint64_t seed = hp_.seed;
    auto conv_param = [&](const std::string& name, Shape shape, double fan_in, double fan_out) {
        params_.add(name, glorot(shape, fan_in, fan_out, seed, name));
    };

    if (uses_temporal(variant_)) {
        const int ch = hp_.temporal_channels;
        const int k = hp_.temporal_kernel;
        for (int l = 0; l < hp_.deep_layers; ++l) {
            const int cin = l == 0 ? 2 : ch;
            const std::string p = "deep." + std::to_string(l) + ".";
            conv_param(p + "wx", {4 * ch, cin, k, k}, (cin + ch) * k * k, 4 * ch * k * k);
            conv_param(p + "wh", {4 * ch, ch, k, k}, (cin + ch) * k * k, 4 * ch * k * k);
            Tensor b({4 * ch}, 0.0);
            for (int c = ch; c < 2 * ch; ++c) b[static_cast<std::size_t>(c)] = 1.0;
            params_.add(p + "b", std::move(b));
        }
        const int s = shallow_steps(variant_, hp_.shallow_steps);
        if (s > 0) {
            if (variant_ != ModelVariant::kDeepShallowShared)
                conv_param("shallow.w", {ch, 2 * s, k, k}, 2 * s * k * k, ch * k * k);
            params_.add("shallow.b", Tensor({ch}, 0.0));
            params_.add("gate.a", Tensor({ch}, 0.0));
        }
    }

    {
        const int cf = hp_.closure_channels;
        const int k = hp_.closure_kernel;
        const int depth = variant_ == ModelVariant::kCnnBaseline ? 1 : geometry_.closure_depth;
        conv_param("closure.w", {cf, 1, depth, k, k}, depth * k * k, cf * depth * k * k);
        params_.add("closure.b", Tensor({cf}, 0.0));
        params_.add("closure.gamma", Tensor({cf}, 1.0));
        params_.add("closure.beta", Tensor({cf}, 0.0));
        norm_stats_["closure"] = BatchNormStats{Tensor({cf}, 0.0), Tensor({cf}, 1.0)};
    }

    {
        const int L = hp_.season_layers;
        int th = geometry_.fares, tw = geometry_.intervals;
        std::vector<std::pair<int, int>> pads(static_cast<std::size_t>(L));
        for (int l = L - 1; l >= 0; --l) {
            const int ih = (th + 1) / 2, iw = (tw + 1) / 2;
            pads[static_cast<std::size_t>(l)] = {th - (2 * ih - 1), tw - (2 * iw - 1)};
            th = ih;
            tw = iw;
        }
        auto check_base = [&](int requested, int derived, int target, const char* axis) {
            if (requested == 0 || requested == derived) return;
            std::ostringstream msg;
            msg << "season map base " << axis << "=" << requested << " cannot reach " << target << " through " << L
                << " stride-2 transposed convolutions; achievable sizes are " << season_reachable(requested, L).first
                << ".." << season_reachable(requested, L).second << " (base " << derived << " reaches " << target
                << ")";
            throw ConfigError(msg.str());
        };
        check_base(hp_.season_base_h, th, geometry_.fares, "height");
        check_base(hp_.season_base_w, tw, geometry_.intervals, "width");
        ladder_ = {th, tw, pads};

        const int cs = hp_.season_channels;
        const int k = hp_.season_kernel;
        for (int l = 0; l < L; ++l) {
            const int cin = l == 0 ? geometry_.season_length : cs;
            const std::string p = "season." + std::to_string(l) + ".";
            conv_param(p + "w", {cin, cs, k, k}, cin * k * k, cs * k * k);
            params_.add(p + "b", Tensor({cs}, 0.0));
        }
    }

    const int cin = decoder_input_channels();
    if (variant_ == ModelVariant::kConvLstmFlat) {
        const int plane = geometry_.fares * geometry_.intervals;
        conv_param("flat.w", {2 * plane, cin * plane}, cin * plane, 2 * plane);
        params_.add("flat.b", Tensor({2 * plane}, 0.0));
    } else {
        const int cd = hp_.decoder_channels;
        const int k = hp_.decoder_kernel;
        for (int l = 0; l < hp_.decoder_layers; ++l) {
            const int in = l == 0 ? cin : cd;
            const std::string p = "dec." + std::to_string(l) + ".";
            conv_param(p + "w", {cd, in, k, k}, in * k * k, cd * k * k);
            params_.add(p + "b", Tensor({cd}, 0.0));
        }
        conv_param("head.w", {2, cd, 1, 1}, cd, 2);
        params_.add("head.b", Tensor({2}, 0.0));
    }
}

Var Model::deep_branch(const Var& window) {
    const int B = window.shape()[0];
    const int steps = window.shape()[1];
    const int F = geometry_.fares, D = geometry_.intervals;
    const int ch = hp_.temporal_channels;
    std::vector<Var> seq;
    seq.reserve(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) seq.push_back(reshape(slice(window, 1, t, 1), {B, 2, F, D}));
    for (int l = 0; l < hp_.deep_layers; ++l) {
        const std::string p = "deep." + std::to_string(l) + ".";
        const Var& wx = params_.get(p + "wx");
        const Var& wh = params_.get(p + "wh");
        const Var& b = params_.get(p + "b");
        CellState state{Var::constant(Tensor({B, ch, F, D})), Var::constant(Tensor({B, ch, F, D}))};
        for (auto& x : seq) {
            state = convlstm_cell_step(x, state, wx, wh, b);
            x = state.h;
        }
    }
    return seq.back();
}

Var Model::shallow_kernel() {
    if (variant_ != ModelVariant::kDeepShallowShared) return params_.get("shallow.w");
    // First-layer candidate-gate input kernel, tiled over the shallow steps.
    const int ch = hp_.temporal_channels;
    const Var g = slice(params_.get("deep.0.wx"), 0, 2 * ch, ch);
    std::vector<Var> tiles(static_cast<std::size_t>(shallow_steps(variant_, hp_.shallow_steps)), g);
    return tiles.size() == 1 ? g : concat(tiles, 1);
}

Var Model::temporal_encode(const Var& window) {
    if (!uses_temporal(variant_)) throw ConfigError(std::string(variant_name(variant_)) + " has no temporal encoder");
    const Shape& ws = window.shape();
    if (ws.size() != 5 || ws[2] != 2 || ws[3] != geometry_.fares || ws[4] != geometry_.intervals)
        throw ShapeError("temporal input must be (B, n + 1, 2, F, D), got " + shape_string(ws));
    const int s = shallow_steps(variant_, hp_.shallow_steps);
    if (ws[1] < s)
        throw ConfigError("window of " + std::to_string(ws[1]) + " elements is shorter than the shallow branch (" +
                          std::to_string(s) + ")");
    Var deep = deep_branch(window);
    if (s == 0 || force_gate_) return deep;
    const int B = ws[0];
    const Var recent = reshape(slice(window, 1, ws[1] - s, s), {B, 2 * s, geometry_.fares, geometry_.intervals});
    const Var shallow = conv2d(recent, shallow_kernel(), params_.get("shallow.b"));
    return add(deep, channel_scale(shallow, sigmoid(params_.get("gate.a"))));
}

Var Model::closure_encode(const Var& closure, bool training) {
    const Shape& cs = closure.shape();
    if (cs.size() != 5 || cs[1] != 1 || cs[3] != geometry_.fares || cs[4] != geometry_.intervals)
        throw ShapeError("closure input must be (B, 1, depth, F, D), got " + shape_string(cs));
    Var input = closure;
    const int depth = params_.get("closure.w").shape()[2];
    if (cs[2] != depth) {
        if (variant_ == ModelVariant::kCnnBaseline)
            input = slice(closure, 2, cs[2] - 1, 1);
        else
            throw ShapeError("closure depth " + std::to_string(cs[2]) + " does not match the model's " +
                             std::to_string(depth));
    }
    const int B = cs[0];
    Var h = conv3d(input, params_.get("closure.w"), params_.get("closure.b"));
    h = reshape(h, {B, hp_.closure_channels, geometry_.fares, geometry_.intervals});
    return batch_norm(h, params_.get("closure.gamma"), params_.get("closure.beta"), norm_stats_.at("closure"), training);
}

Var Model::season_encode(const Var& season) {
    const Shape& ss = season.shape();
    if (ss.size() != 2 || ss[1] != geometry_.season_length)
        throw ShapeError("season input must be (B, " + std::to_string(geometry_.season_length) + "), got " +
                         shape_string(ss));
    Var h = reshape(season, {ss[0], ss[1], 1, 1});
    h = upsample_nearest(h, ladder_.base_h, ladder_.base_w);
    const int L = hp_.season_layers;
    const int pad = hp_.season_kernel / 2;
    for (int l = 0; l < L; ++l) {
        const std::string p = "season." + std::to_string(l) + ".";
        const auto [ph, pw] = ladder_.output_pad[static_cast<std::size_t>(l)];
        h = conv_transpose2d(h, params_.get(p + "w"), params_.get(p + "b"), 2, pad, ph, pw);
        if (l + 1 < L) h = relu(h);
    }
    return h;
}

Var Model::decode(const Var& maps) {
    const Shape& ms = maps.shape();
    const int cin = decoder_input_channels();
    if (ms.size() != 4 || ms[1] != cin || ms[2] != geometry_.fares || ms[3] != geometry_.intervals)
        throw ShapeError("decoder expects (B, " + std::to_string(cin) + ", F, D), got " + shape_string(ms));
    const int B = ms[0];
    const int F = geometry_.fares, D = geometry_.intervals;
    if (variant_ == ModelVariant::kConvLstmFlat) {
        const Var flat = linear(reshape(maps, {B, cin * F * D}), params_.get("flat.w"), params_.get("flat.b"));
        return reshape(flat, {B, 2, F, D});
    }
    Var h = maps;
    for (int l = 0; l < hp_.decoder_layers; ++l) {
        const std::string p = "dec." + std::to_string(l) + ".";
        h = relu(conv2d(h, params_.get(p + "w"), params_.get(p + "b")));
    }
    return conv2d(h, params_.get("head.w"), params_.get("head.b"));
}

Var Model::forward(const ModelInput& input, bool training) {
    std::vector<Var> maps;
    if (uses_temporal(variant_)) maps.push_back(temporal_encode(Var::constant(input.window)));
    maps.push_back(closure_encode(Var::constant(input.closure), training));
    maps.push_back(season_encode(Var::constant(input.season)));
    return decode(concat(maps, 1));
}

}  // namespace skycast::nn
