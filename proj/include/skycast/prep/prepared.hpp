#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skycast/core/types.hpp"
#include "skycast/mask/split.hpp"
#include "skycast/prep/normalizer.hpp"
#include "skycast/synth/generator.hpp"

namespace skycast::prep {

/// One model-ready learning example. Traffic arrays are normalized but not
/// masked; masks depend on the split's reference date or the epoch plan.
struct Example {
    std::uint64_t id = 0;
    std::string market_id;
    Date departure;
    mask::Split split = mask::Split::kTrain;
    std::vector<Date> member_dates;               // n + 1, oldest first
    std::vector<double> window;                   // (n + 1) x (F, D, C)
    std::vector<double> closure;                  // depth x (F, D)
    std::array<double, SeasonalityVector::kLength> season{};
    std::vector<double> label;                    // (F, D, C), never masked
    double traffic_scale = 1.0;

    int window_size() const { return static_cast<int>(member_dates.size()) - 1; }
};

std::uint64_t example_id(const std::string& market_id, Date departure);

struct PrepareOptions {
    int window_size = 5;
    int test_months = 3;
    double val_fraction = 0.10;
    bool stack_closure = true;  // false: only the target's closure grid
};

struct SkipRecord {
    std::string market_id;
    Date departure;
    std::string reason;
};

/// Raw per-flight total, kept for every flight (including warm-up days) so the
/// statistical baselines see contiguous series.
struct FlightTotal {
    std::string market_id;
    Date departure;
    double passengers = 0.0;
};

struct PreparedDataset {
    GridSpec grids;
    PrepareOptions options;
    mask::SplitPlan plan;
    Normalizer normalizer;
    std::vector<Example> examples;
    std::vector<SkipRecord> skipped;
    std::vector<FlightTotal> totals;
    std::string source_hash;

    std::vector<const Example*> split(mask::Split s) const;
    const Example& find(std::uint64_t id) const;
    int closure_depth() const { return options.stack_closure ? options.window_size + 1 : 1; }
};

/// Builds windows, splits chronologically and fits the normalizer on the
/// training split. `fixed_normalizer` reuses an existing fit instead, which is
/// how a frozen model is evaluated on freshly generated data.
PreparedDataset prepare(const synth::Dataset& dataset, const PrepareOptions& options,
                        const std::optional<Normalizer>& fixed_normalizer = std::nullopt);

void save_prepared(const PreparedDataset& prepared, const std::filesystem::path& dir);
PreparedDataset load_prepared(const std::filesystem::path& dir);

/// Content hash over the prepared manifest; identical inputs give identical hashes.
std::string prepared_hash(const PreparedDataset& prepared);

}  // namespace skycast::prep
