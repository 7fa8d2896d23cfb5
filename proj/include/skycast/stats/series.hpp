#pragma once

#include <span>
#include <string>
#include <vector>

#include "skycast/core/date.hpp"
#include "skycast/prep/normalizer.hpp"
#include "skycast/prep/prepared.hpp"

namespace skycast::stats {

/// Gap-free daily series of normalized per-flight totals for one market.
struct DailySeries {
    std::string market_id;
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Normalized sum over every tensor cell, one value per flight. Flights must
/// belong to one market and cover consecutive days; throws GapError otherwise.
DailySeries totals_series(std::span<const prep::FlightTotal> flights, const prep::Normalizer& normalizer);

/// Series per market from a prepared dataset, restricted to departures before `end`.
std::vector<DailySeries> market_series(const prep::PreparedDataset& prepared, Date end);

std::vector<double> naive_forecast(std::span<const double> series, int horizon);

/// forecast[h] = series[T - season + (h mod season)]
std::vector<double> seasonal_naive_forecast(std::span<const double> series, int season, int horizon);

double mean_squared_error(std::span<const double> a, std::span<const double> b);

}  // namespace skycast::stats
