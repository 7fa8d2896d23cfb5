#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skycast/core/grid.hpp"
#include "skycast/prep/prepared.hpp"
#include "skycast/synth/generator.hpp"
#include "skycast/train/analysis.hpp"
#include "skycast/train/evaluate.hpp"
#include "skycast/train/trainer.hpp"

namespace skycast::config {

struct GeneratorSection {
    std::uint64_t seed = 1;
    Date first = make_date(2021, 12, 1);
    Date last = make_date(2023, 5, 31);
    int markets = 5;  // leading entries of the built-in market table
};

struct GridSection {
    int fare_brackets = 10;
    double bracket_width = 100.0;
    int intervals = 12;
    int interval_width = 5;
};

struct SensitivitySection {
    int shock_day = 20;
    double shock_multiplier = 1.3;
    int horizon_days = 100;
    int lead_days = 7;
};

struct SweepSection {
    std::vector<int> windows{1, 2, 3, 4, 5};
    int search_budget = 8;
    std::uint64_t search_seed = 1;
};

/// Everything a pipeline run needs. Loaded from an INI-style file with
/// [section] headers and `key = value` lines; `#` and `;` start comments.
struct RunConfig {
    GeneratorSection generator;
    GridSection grids;
    prep::PrepareOptions prepare;
    train::TrainConfig train;
    train::BaselineOrders baselines;
    std::string reference_model = "auto";  // ConvLSTM when evaluated, else the first table row
    int trend_horizon = 100;
    SensitivitySection sensitivity;
    SweepSection sweep;
    std::filesystem::path output_dir = "runs";

    /// Throws ConfigError on the first inconsistent field.
    void validate() const;

    GridSpec grid_spec() const;
    synth::DateRange date_range() const;
    std::vector<synth::MarketConfig> markets() const;
    synth::ShockConfig shock() const;

    /// Sets every seed that derives from the global seed: generator, model
    /// init and epoch masks.
    void set_seed(std::uint64_t seed);

    /// Canonical text that parses back to an equal configuration. Without
    /// `include_output` the [output] section is left out.
    std::string echo(bool include_output = true) const;
};

/// Parses `text`; unknown sections or keys and malformed values raise
/// ConfigError. The result is validated.
RunConfig parse_config(const std::string& text);

/// Reads and parses a file; a missing file is an InputError.
RunConfig load_config(const std::filesystem::path& path);

/// SKYCAST_SEED from the environment, if set. Malformed values raise ConfigError.
std::optional<std::uint64_t> env_seed();

}  // namespace skycast::config
