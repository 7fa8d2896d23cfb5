#pragma once

#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "skycast/core/types.hpp"
#include "skycast/prep/tensorize.hpp"

namespace skycast::prep {

/// Per-market max-scaling for traffic plus fixed ranges for the seasonality
/// features. Fitted on the training split only.
class Normalizer {
public:
    double traffic_scale(const std::string& market_id) const;
    const std::map<std::string, double>& traffic_scales() const { return traffic_scale_; }

    /// Non-sentinel entries divided by the market scale; -1 passes through.
    TrafficTensor normalize(const TrafficTensor& t, const std::string& market_id) const;
    TrafficTensor denormalize(const TrafficTensor& t, const std::string& market_id) const;
    HistoricalWindow normalize(const HistoricalWindow& w) const;

    SeasonalityVector seasonality(const FlightInstance& flight) const;

    nlohmann::json to_json() const;
    static Normalizer from_json(const nlohmann::json& j);

    bool operator==(const Normalizer&) const = default;

private:
    friend Normalizer fit_normalizer(std::span<const FlightInstance* const> training);

    std::map<std::string, double> traffic_scale_;
    double id_scale_ = 1.0;        // max route id seen in training, floor 1
    double capacity_ref_ = 1.0;    // headroom above the largest training capacity
    double rasm_min_ = 0.0;
    double rasm_max_ = 1.0;
};

/// Capacity reference is this multiple of the largest training capacity, so
/// up-gauged aircraft remain representable inside (0, 1].
inline constexpr double kCapacityHeadroom = 2.0;

/// Throws ConfigError on an empty training split.
Normalizer fit_normalizer(std::span<const FlightInstance* const> training);

}  // namespace skycast::prep
