#pragma once

#include <span>
#include <string>
#include <vector>

#include "skycast/nn/model.hpp"
#include "skycast/prep/prepared.hpp"
#include "skycast/stats/arima.hpp"
#include "skycast/train/checkpoint.hpp"

namespace skycast::train {

/// One forecast in normalized units.
struct FlightPrediction {
    const prep::Example* example = nullptr;
    Date reference;
    std::vector<double> predicted;  // (F, D, C)
    double predicted_total = 0.0;
    double observed_total = 0.0;
};

std::vector<FlightPrediction> predict(nn::Model& model, const InputLayout& layout,
                                      std::span<const prep::Example* const> examples, std::span<const Date> references,
                                      const IntervalGrid& grid, int batch_size = 64);

struct SplitMetrics {
    double tensor_mse = 0.0;  // NaN for scalar baselines
    double totals_mse = 0.0;
    std::size_t flights = 0;
};

/// Tensor MSE over every cell and totals MSE over per-flight sums.
SplitMetrics score(std::span<const FlightPrediction> predictions);

struct ModelReport {
    std::string model;  // table label: ARIMA, SARIMA, CNN, ConvLSTM, +Spatial, ...
    SplitMetrics val;
    SplitMetrics test;
    std::string prepared_hash;
};

/// Validation and test metrics with each split masked at its start date.
/// Throws LookupError when the checkpoint's normalizer differs from the
/// prepared dataset's.
ModelReport evaluate(const Checkpoint& ck, const prep::PreparedDataset& prepared);

/// Predictions for one split of a prepared dataset, masked at the split start.
std::vector<FlightPrediction> predict_split(const Checkpoint& ck, const prep::PreparedDataset& prepared, mask::Split split);

enum class Baseline { kArima, kSarima, kSeasonalNaive, kNaive };

const char* baseline_label(Baseline b);

struct BaselineOrders {
    stats::ArimaOrder arima{1, 1, 1};
    stats::ArimaOrder sarima{1, 1, 1};
    stats::SeasonalOrder seasonal{1, 0, 1, 7};
};

/// Per-flight totals forecast by a baseline frozen at `origin`: fitted on each
/// market's history before it, then run forward over every example on or after
/// it. Returned in the order of `examples`.
std::vector<double> baseline_totals(Baseline b, const prep::PreparedDataset& prepared,
                                    std::span<const prep::Example* const> examples, Date origin,
                                    const BaselineOrders& orders = {});

/// Totals-only report; the validation forecast is frozen at the validation
/// start and the test forecast at the test start.
ModelReport evaluate_baseline(Baseline b, const prep::PreparedDataset& prepared, const BaselineOrders& orders = {});

struct TableRow {
    std::string model;
    double mse = 0.0;
    double improvement = 0.0;  // percent over the reference row
};

/// (reference - mse) / reference * 100.
double improvement_percent(double reference_mse, double mse);

/// Table rows in the paper's model order, unknown labels after them in input
/// order. Throws ConfigError when `reference` is absent.
std::vector<TableRow> mse_table(std::span<const std::pair<std::string, double>> entries,
                                const std::string& reference = "ConvLSTM");

}  // namespace skycast::train
