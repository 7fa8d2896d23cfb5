#include "skycast/stats/series.hpp"

#include <algorithm>
#include <map>

#include "skycast/core/error.hpp"

namespace skycast::stats {

DailySeries totals_series(std::span<const prep::FlightTotal> flights, const prep::Normalizer& normalizer) {
    DailySeries s;
    if (flights.empty()) return s;
    s.market_id = flights.front().market_id;
    const double scale = normalizer.traffic_scale(s.market_id);
    std::vector<prep::FlightTotal> sorted(flights.begin(), flights.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.departure < b.departure; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].market_id != s.market_id) throw DomainError("totals_series expects a single market");
        if (i > 0 && days_between(sorted[i].departure, sorted[i - 1].departure) != 1)
            throw GapError(s.market_id + ": series gap between " + format_date(sorted[i - 1].departure) + " and " +
                           format_date(sorted[i].departure));
        s.dates.push_back(sorted[i].departure);
        s.values.push_back(sorted[i].passengers / scale);
    }
    return s;
}

std::vector<DailySeries> market_series(const prep::PreparedDataset& prepared, Date end) {
    std::map<std::string, std::vector<prep::FlightTotal>> by_market;
    std::vector<std::string> order;
    for (const auto& t : prepared.totals) {
        if (t.departure >= end) continue;
        auto [it, inserted] = by_market.try_emplace(t.market_id);
        if (inserted) order.push_back(t.market_id);
        it->second.push_back(t);
    }
    std::vector<DailySeries> out;
    for (const auto& m : order) out.push_back(totals_series(by_market[m], prepared.normalizer));
    return out;
}

std::vector<double> naive_forecast(std::span<const double> series, int horizon) {
    if (series.empty()) throw DomainError("naive forecast needs at least one observation");
    return std::vector<double>(static_cast<std::size_t>(std::max(horizon, 0)), series.back());
}

std::vector<double> seasonal_naive_forecast(std::span<const double> series, int season, int horizon) {
    if (season <= 0) throw DomainError("season must be positive");
    if (series.size() < static_cast<std::size_t>(season))
        throw DomainError("series shorter than one season");
    const std::size_t base = series.size() - static_cast<std::size_t>(season);
    std::vector<double> out(static_cast<std::size_t>(std::max(horizon, 0)));
    for (std::size_t h = 0; h < out.size(); ++h) out[h] = series[base + h % static_cast<std::size_t>(season)];
    return out;
}

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("mse operands differ in length");
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

}  // namespace skycast::stats
