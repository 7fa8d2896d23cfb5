#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skycast/core/types.hpp"
#include "skycast/prep/prepared.hpp"
#include "skycast/synth/generator.hpp"
#include "skycast/train/checkpoint.hpp"
#include "skycast/train/trainer.hpp"

namespace skycast::train {

/// One departure-date offset of a per-day analysis series, in passengers
/// averaged across markets.
struct DayPoint {
    int offset = 0;
    Date date;
    double value = 0.0;
    int flights = 0;
};

struct TrendResult {
    std::vector<DayPoint> series;  // |predicted total - observed total|
    std::string warning;           // set when the test span is shorter than the horizon
};

/// Absolute total error by departure offset from the test start, with every
/// test input masked at the test start.
TrendResult trend_analysis(const Checkpoint& ck, const prep::PreparedDataset& prepared, int horizon_days = 100);

struct SensitivityOptions {
    int horizon_days = 100;
    /// Forecast lead: each flight is masked as of `lead_days` before its own
    /// departure, so realized predecessors roll into the window as the test
    /// period advances. 0 masks everything at the test start instead.
    int lead_days = 7;
};

struct SensitivityResult {
    Date test_start;
    Date shock_date;
    int shock_offset = 0;
    std::vector<DayPoint> model;           // observed - predicted
    std::vector<DayPoint> seasonal_naive;  // observed - frozen seasonal-naive forecast
    std::vector<DayPoint> observed;        // mean observed total
    std::string warning;
};

/// Runs a frozen checkpoint over a dataset generated with `shock`. The data is
/// prepared with the checkpoint's normalizer. Throws ConfigError when the shock
/// lies outside the test span.
SensitivityResult sensitivity_run(const Checkpoint& ck, const synth::ShockConfig& shock, const synth::Dataset& data,
                                  const SensitivityOptions& options = {});

/// Mean of a per-day series over offsets in [first, last].
double mean_over(const std::vector<DayPoint>& series, int first, int last, bool absolute = false);

struct WhatIfResult {
    TrafficTensor baseline;  // passengers
    TrafficTensor scenario;
    TrafficTensor delta;     // scenario - baseline
    double baseline_total = 0.0;
    double scenario_total = 0.0;
    double total_delta = 0.0;
};

/// Two forward passes differing only in the target's closure grid; results
/// are denormalized to passengers.
WhatIfResult whatif(const Checkpoint& ck, const prep::Example& example, Date reference,
                    const ClosureMatrix& alternative);

/// Target closure with every bracket closed on the intervals still unrealized
/// at `reference`.
ClosureMatrix close_future_intervals(const prep::Example& example, Date reference, const GridSpec& grids);

/// The example's own target closure grid.
ClosureMatrix target_closure(const prep::Example& example, const GridSpec& grids);

struct SweepPoint {
    int window_size = 0;
    bool skipped = false;
    std::string reason;
    double val_mse = 0.0;
    double test_mse = 0.0;
};

using TrialRunner = std::function<void(std::size_t count, const std::function<void(std::size_t)>& body)>;

/// Runs every body in turn; the CLI substitutes a thread pool.
void run_sequential(std::size_t count, const std::function<void(std::size_t)>& body);

/// One full training run per window size with all seeds held fixed.
std::vector<SweepPoint> window_sweep(const std::vector<int>& n_values, const TrainConfig& config,
                                     const prep::PreparedDataset& prepared, const TrialRunner& runner = run_sequential);

template <typename T>
struct Range {
    T lo;
    T hi;
};

struct SearchSpace {
    Range<int> channels{4, 16};
    Range<int> deep_layers{1, 3};
    Range<int> decoder_layers{1, 3};
    std::vector<int> kernels{1, 3, 5};
    Range<double> learning_rate{3e-4, 3e-3};  // log-uniform
    Range<int> window_size{1, 5};

    /// Throws ConfigError for empty or inverted ranges.
    void validate() const;
};

struct Trial {
    int index = 0;
    nn::HyperParams hyperparams;
    double val_mse = 0.0;
};

/// Trial 0 is the base configuration; trials 1.. sample the space. Results are
/// ranked by validation MSE.
std::vector<Trial> random_search(const SearchSpace& space, int budget, std::uint64_t seed, const TrainConfig& base,
                                 const prep::PreparedDataset& prepared, const TrialRunner& runner = run_sequential);

/// The hyperparameters random_search would try, without training.
std::vector<nn::HyperParams> sample_trials(const SearchSpace& space, int budget, std::uint64_t seed,
                                           const nn::HyperParams& base);

}  // namespace skycast::train
