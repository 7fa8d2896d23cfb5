#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skycast/nn/ops.hpp"

namespace skycast::nn {

enum class ModelVariant {
    kCnnBaseline,
    kConvLstmFlat,
    kConvLstmSpatial,
    kPlusShallowCnn,
    kDeepShallow,
    kDeepShallowShared,
};

const char* variant_name(ModelVariant v);  // CNN_BASELINE, ...
const char* variant_label(ModelVariant v);  // CNN, ConvLSTM, +Spatial, ...
ModelVariant parse_variant(const std::string& text);
const std::vector<ModelVariant>& all_variants();

bool uses_temporal(ModelVariant v);
/// Shallow branch length for the variant, 0 when there is none.
int shallow_steps(ModelVariant v, int configured);

struct HyperParams {
    int window_size = 5;
    int temporal_channels = 16;
    int closure_channels = 16;
    int season_channels = 16;
    int decoder_channels = 16;
    int temporal_kernel = 3;
    int closure_kernel = 3;
    int season_kernel = 3;
    int decoder_kernel = 3;
    int deep_layers = 2;
    int decoder_layers = 2;
    int season_layers = 2;
    int shallow_steps = 2;
    // Explicit (h, w) of the upsampled season map; 0 derives it from the grid.
    int season_base_h = 0;
    int season_base_w = 0;
    double learning_rate = 1e-3;
    // Cosine decay over the epoch budget ends at learning_rate * final_lr_fraction; 1 keeps it constant.
    double final_lr_fraction = 1.0;
    int batch_size = 16;
    int epochs = 30;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    nlohmann::json to_json() const;
    static HyperParams from_json(const nlohmann::json& j);
    bool operator==(const HyperParams&) const = default;
};

struct ModelGeometry {
    int fares = 10;
    int intervals = 12;
    int closure_depth = 6;
    int season_length = 14;

    bool operator==(const ModelGeometry&) const = default;
};

/// Named parameters in creation order.
class ParamStore {
public:
    Var& add(const std::string& name, Tensor value);
    Var& get(const std::string& name);
    const Var& get(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::vector<std::pair<std::string, Var>>& entries() { return entries_; }
    const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
    std::size_t count() const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, Var>> entries_;
    std::map<std::string, std::size_t> index_;
};

struct CellState {
    Var h;
    Var c;
};

/// One ConvLSTM step. wx (4c_h, c_in, k, k), wh (4c_h, c_h, k, k), b (4c_h);
/// gate order along the output channels is i, f, g, o.
CellState convlstm_cell_step(const Var& x, const CellState& state, const Var& wx, const Var& wh, const Var& b);

/// Network inputs for a batch, already masked and normalized.
struct ModelInput {
    Tensor window;   // (B, n + 1, 2, F, D)
    Tensor closure;  // (B, 1, depth, F, D)
    Tensor season;   // (B, season_length)

    int batch() const { return window.empty() ? season.dim(0) : window.dim(0); }
};

class Model {
public:
    Model(ModelVariant variant, HyperParams hp, ModelGeometry geometry);

    ModelVariant variant() const { return variant_; }
    const HyperParams& hyperparams() const { return hp_; }
    const ModelGeometry& geometry() const { return geometry_; }

    /// Normalized prediction (B, 2, F, D).
    Var forward(const ModelInput& input, bool training);

    Var temporal_encode(const Var& window);
    Var closure_encode(const Var& closure, bool training);
    Var season_encode(const Var& season);
    Var decode(const Var& maps);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::size_t parameter_count() const { return params_.count(); }

    std::map<std::string, BatchNormStats>& norm_stats() { return norm_stats_; }
    const std::map<std::string, BatchNormStats>& norm_stats() const { return norm_stats_; }

    /// Pins the shallow-branch gate to exactly 0.
    void set_force_gate(bool on) { force_gate_ = on; }

    /// Season ladder: upsampled base size and per-layer output padding.
    struct SeasonLadder {
        int base_h = 1, base_w = 1;
        std::vector<std::pair<int, int>> output_pad;
    };
    const SeasonLadder& season_ladder() const { return ladder_; }

    int decoder_input_channels() const;

private:
    void build();
    Var deep_branch(const Var& window);
    Var shallow_kernel();

    ModelVariant variant_;
    HyperParams hp_;
    ModelGeometry geometry_;
    ParamStore params_;
    std::map<std::string, BatchNormStats> norm_stats_;
    SeasonLadder ladder_;
    bool force_gate_ = false;
};

/// Sizes reachable on one axis from `base` through `layers` stride-2 transposes.
std::pair<int, int> season_reachable(int base, int layers);

}  // namespace skycast::nn
