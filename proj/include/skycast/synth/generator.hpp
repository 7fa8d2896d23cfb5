#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skycast/core/date.hpp"
#include "skycast/core/grid.hpp"
#include "skycast/core/types.hpp"

namespace skycast::synth {

struct HolidaySpike {
    Date date;
    double multiplier = 1.0;
};

/// Beta-like arrival profile over the booking horizon, x = 0 at booking open
/// and x = 1 at departure.
struct CurveShape {
    double a = 1.0;
    double b = 1.0;
};

struct MarketConfig {
    std::string market_id;
    int origin_id = 0;
    int destination_id = 1;
    double base_daily_demand = 100.0;
    std::array<double, 7> dow_multipliers{1, 1, 1, 1, 1, 1, 1};  // Monday first
    double annual_amplitude = 0.0;
    std::vector<HolidaySpike> holidays;
    double local_share = 0.6;
    double fare_sensitivity = 0.3;
    CurveShape curve_shape;
    int capacity = 160;
    double recapture_prob = 0.3;
    double base_rasm = 0.12;
    // Latent log-demand AR(1) drift shared by consecutive departures.
    double level_persistence = 0.0;
    double level_volatility = 0.0;

    void validate() const;
    double holiday_multiplier(Date date) const;
};

struct ShockConfig {
    int shock_date_offset = 20;
    double capacity_multiplier = 1.3;

    void validate() const;
};

struct DateRange {
    Date first;
    Date last;  // inclusive

    int days() const { return days_between(last, first) + 1; }
};

/// Probability that a booking falls in each interval; sums to 1.
std::vector<double> booking_curve(const CurveShape& shape, const IntervalGrid& grid);

/// Share of demand per fare bracket: proportional to exp(-sensitivity * i).
std::vector<double> bracket_mixture(double fare_sensitivity, int fares);

double expected_demand(const MarketConfig& market, Date date);

/// Expected bookings per (i, j, k) cell after closure and recapture, before the
/// capacity limit. Row-major (F, D, C) like TrafficTensor.
TrafficTensor expected_cell_means(const MarketConfig& market, Date date,
                                  const ClosureMatrix& closure, const GridSpec& grids,
                                  double demand_factor = 1.0);

/// Draws one flight. Every cell uses its own stream derived from `seed`, so
/// changing one cell's rate never perturbs the draws of another cell.
FlightInstance simulate_flight(const MarketConfig& market, Date date, const ClosureMatrix& closure,
                               std::uint64_t seed, const GridSpec& grids,
                               double demand_factor = 1.0);

/// Produces the closure plan for one flight from a deterministic seed.
using ClosurePolicySampler =
    std::function<ClosureMatrix(const MarketConfig&, Date, std::uint64_t seed, const GridSpec&)>;

/// Random staircase: cheap brackets close progressively as departure nears.
struct StaircaseClosurePolicy {
    double start_min = 0.3;   // fraction of D where closing may begin
    double start_max = 0.7;
    double rate_min = 0.4;    // brackets closed per interval
    double rate_max = 1.2;
    int keep_open = 2;        // most expensive brackets never close

    ClosureMatrix operator()(const MarketConfig& market, Date date, std::uint64_t seed,
                             const GridSpec& grids) const;
};

struct Dataset {
    GridSpec grids;
    DateRange range;
    std::uint64_t seed = 0;
    std::vector<MarketConfig> markets;
    std::optional<ShockConfig> shock;
    std::vector<FlightInstance> flights;  // sorted by (market order, date)

    const MarketConfig& market(const std::string& id) const;
};

struct SplitRequirements {
    int test_months = 3;
    int warmup_weeks = 5;
    int min_train_days = 28;
};

/// First departure date of the test period: the last `test_months` months.
Date test_period_start(const DateRange& range, int test_months);

/// Derived per-flight seed; stable under any subsetting of the dataset.
std::uint64_t flight_seed(std::uint64_t seed, const std::string& market_id, Date date);

Dataset generate_dataset(const std::vector<MarketConfig>& markets, const DateRange& range,
                         const ClosurePolicySampler& sampler, const std::optional<ShockConfig>& shock,
                         std::uint64_t seed, const GridSpec& grids = {},
                         const SplitRequirements& requirements = {});

/// Five heterogeneous markets with a strong weekly cycle.
std::vector<MarketConfig> default_markets(const DateRange& range);

/// 18 months ending 2023-05-31.
DateRange default_date_range();

}  // namespace skycast::synth
