#include "skycast/synth/generator.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"

namespace skycast::synth {

namespace {

constexpr std::uint64_t kClosureSalt = 0xc105edULL;
constexpr std::uint64_t kLevelSalt = 0x1e7e1ULL;
constexpr std::uint64_t kRasmSalt = 0x7a53ULL;
constexpr std::uint64_t kRecaptureSalt = 0x7ecaULL;

std::uint64_t date_word(Date date) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(date.time_since_epoch().count()));
}

// Cheap per-cell stream; a Mersenne Twister seed costs more than the draw.
struct SplitMix64 {
    using result_type = std::uint64_t;
    std::uint64_t state;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return mix64(state += 0x9e3779b97f4a7c15ULL); }
};

int poisson_draw(double mean, std::uint64_t seed) {
    if (mean <= 0.0) return 0;
    SplitMix64 rng{seed};
    std::poisson_distribution<int> dist(mean);
    return dist(rng);
}

// Drops bookings from the latest interval backwards until the flight fits.
void truncate_to_capacity(TrafficTensor& t, int capacity) {
    double excess = t.total() - capacity;
    for (int j = t.intervals() - 1; j >= 0 && excess > 0.0; --j) {
        for (int i = t.fares() - 1; i >= 0 && excess > 0.0; --i) {
            for (int k = kChannelCount - 1; k >= 0 && excess > 0.0; --k) {
                double take = std::min(t.at(i, j, k), excess);
                t.at(i, j, k) -= take;
                excess -= take;
            }
        }
    }
}

}  // namespace

void MarketConfig::validate() const {
    if (market_id.empty()) throw ConfigError("market_id must be set");
    if (!(base_daily_demand > 0.0)) throw ConfigError(market_id + ": base_daily_demand must be positive");
    for (double m : dow_multipliers)
        if (!(m > 0.0)) throw ConfigError(market_id + ": day-of-week multipliers must be positive");
    if (!(annual_amplitude >= 0.0 && annual_amplitude < 1.0))
        throw ConfigError(market_id + ": annual_amplitude must lie in [0, 1)");
    for (const auto& h : holidays)
        if (!(h.multiplier > 0.0)) throw ConfigError(market_id + ": holiday multipliers must be positive");
    if (!(local_share > 0.0 && local_share < 1.0)) throw ConfigError(market_id + ": local_share must lie in (0, 1)");
    if (!(fare_sensitivity > 0.0)) throw ConfigError(market_id + ": fare_sensitivity must be positive");
    if (!(curve_shape.a > 0.0 && curve_shape.b > 0.0))
        throw ConfigError(market_id + ": curve shape must be positive");
    if (capacity <= 0) throw ConfigError(market_id + ": capacity must be positive");
    if (!(recapture_prob >= 0.0 && recapture_prob <= 1.0))
        throw ConfigError(market_id + ": recapture_prob must lie in [0, 1]");
    if (!(level_persistence >= 0.0 && level_persistence < 1.0) || level_volatility < 0.0)
        throw ConfigError(market_id + ": invalid latent level parameters");
}

double MarketConfig::holiday_multiplier(Date date) const {
    double m = 1.0;
    for (const auto& h : holidays)
        if (h.date == date) m *= h.multiplier;
    return m;
}

void ShockConfig::validate() const {
    if (!(capacity_multiplier > 0.0)) throw ConfigError("shock multiplier must be positive");
    if (shock_date_offset < 0) throw ConfigError("shock offset must be non-negative");
}

const MarketConfig& Dataset::market(const std::string& id) const {
    for (const auto& m : markets)
        if (m.market_id == id) return m;
    throw LookupError("unknown market '" + id + "'");
}

std::vector<double> booking_curve(const CurveShape& shape, const IntervalGrid& grid) {
    if (!(shape.a > 0.0 && shape.b > 0.0)) throw DomainError("booking curve shape must be positive");
    const int d = grid.count();
    std::vector<double> weights(static_cast<std::size_t>(d));
    double prev = 0.0;
    for (int j = 0; j < d; ++j) {
        double x = static_cast<double>(j + 1) / d;
        double cdf = j + 1 == d ? 1.0 : gsl_cdf_beta_P(x, shape.a, shape.b);
        weights[static_cast<std::size_t>(j)] = std::max(0.0, cdf - prev);
        prev = cdf;
    }
    return weights;
}

std::vector<double> bracket_mixture(double fare_sensitivity, int fares) {
    std::vector<double> p(static_cast<std::size_t>(fares));
    double sum = 0.0;
    for (int i = 0; i < fares; ++i) sum += p[static_cast<std::size_t>(i)] = std::exp(-fare_sensitivity * i);
    for (double& v : p) v /= sum;
    return p;
}

double expected_demand(const MarketConfig& market, Date date) {
    const double week = week_of_year(date);
    const double annual = 1.0 + market.annual_amplitude * std::sin(2.0 * std::numbers::pi * week / 52.0);
    return market.base_daily_demand * market.dow_multipliers[static_cast<std::size_t>(day_of_week(date))] *
           annual * market.holiday_multiplier(date);
}

TrafficTensor expected_cell_means(const MarketConfig& market, Date date, const ClosureMatrix& closure,
                                  const GridSpec& grids, double demand_factor) {
    const int nf = grids.fares.count();
    const int nd = grids.intervals.count();
    if (closure.fares() != nf || closure.intervals() != nd)
        throw ShapeError("closure matrix shape does not match the grids");
    const double demand = expected_demand(market, date) * demand_factor;
    const auto curve = booking_curve(market.curve_shape, grids.intervals);
    const auto mix = bracket_mixture(market.fare_sensitivity, nf);
    const std::array<double, kChannelCount> share{market.local_share, 1.0 - market.local_share};

    TrafficTensor mean(nf, nd);
    for (int j = 0; j < nd; ++j) {
        int target = -1;
        for (int i = 0; i < nf; ++i) {
            if (closure.at(i, j) < 1.0) {
                target = i;
                break;
            }
        }
        for (int k = 0; k < kChannelCount; ++k) {
            double spilled = 0.0;
            for (int i = 0; i < nf; ++i) {
                const double arrivals = demand * curve[static_cast<std::size_t>(j)] *
                                        mix[static_cast<std::size_t>(i)] * share[static_cast<std::size_t>(k)];
                mean.at(i, j, k) += arrivals * (1.0 - closure.at(i, j));
                spilled += arrivals * closure.at(i, j);
            }
            if (target >= 0) mean.at(target, j, k) += market.recapture_prob * spilled;
        }
    }
    return mean;
}

FlightInstance simulate_flight(const MarketConfig& market, Date date, const ClosureMatrix& closure,
                               std::uint64_t seed, const GridSpec& grids, double demand_factor) {
    const int nf = grids.fares.count();
    const int nd = grids.intervals.count();
    if (closure.fares() != nf || closure.intervals() != nd)
        throw ShapeError("closure matrix shape does not match the grids");
    closure.validate();

    const double demand = expected_demand(market, date) * demand_factor;
    const auto curve = booking_curve(market.curve_shape, grids.intervals);
    const auto mix = bracket_mixture(market.fare_sensitivity, nf);
    const std::array<double, kChannelCount> share{market.local_share, 1.0 - market.local_share};

    FlightInstance flight;
    flight.market_id = market.market_id;
    flight.departure = date;
    flight.capacity = market.capacity;
    flight.holiday = market.holiday_multiplier(date) != 1.0;
    flight.origin_id = market.origin_id;
    flight.destination_id = market.destination_id;
    flight.seed = seed;
    flight.demand_factor = demand_factor;
    flight.closure = closure;
    flight.traffic = TrafficTensor(nf, nd);
    {
        std::mt19937_64 rng(stable_hash({seed, kRasmSalt}));
        std::uniform_real_distribution<double> u(0.9, 1.1);
        flight.rasm = market.base_rasm * u(rng);
    }

    for (int j = 0; j < nd; ++j) {
        int target = -1;
        for (int i = 0; i < nf; ++i) {
            if (closure.at(i, j) < 1.0) {
                target = i;
                break;
            }
        }
        for (int k = 0; k < kChannelCount; ++k) {
            for (int i = 0; i < nf; ++i) {
                const auto ui = static_cast<std::uint64_t>(i);
                const auto uj = static_cast<std::uint64_t>(j);
                const auto uk = static_cast<std::uint64_t>(k);
                const double arrivals = demand * curve[static_cast<std::size_t>(j)] *
                                        mix[static_cast<std::size_t>(i)] * share[static_cast<std::size_t>(k)];
                const double c = closure.at(i, j);
                flight.traffic.at(i, j, k) += poisson_draw(arrivals * (1.0 - c), stable_hash({seed, ui, uj, uk}));
                if (target >= 0 && c > 0.0) {
                    flight.traffic.at(target, j, k) += poisson_draw(
                        arrivals * c * market.recapture_prob, stable_hash({seed, ui, uj, uk, kRecaptureSalt}));
                }
            }
        }
    }
    truncate_to_capacity(flight.traffic, flight.capacity);
    return flight;
}

ClosureMatrix StaircaseClosurePolicy::operator()(const MarketConfig&, Date, std::uint64_t seed,
                                                 const GridSpec& grids) const {
    const int nf = grids.fares.count();
    const int nd = grids.intervals.count();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> start_dist(start_min * nd, start_max * nd);
    std::uniform_real_distribution<double> rate_dist(rate_min, rate_max);
    const double start = start_dist(rng);
    const double rate = rate_dist(rng);
    const int closable = std::max(0, nf - keep_open);

    ClosureMatrix closure(nf, nd);
    for (int j = 0; j < nd; ++j) {
        // brackets closed by the end of interval j, fractional part is the
        // share of the interval's days the next bracket spent closed
        const double closed = std::clamp((j + 1 - start) * rate, 0.0, static_cast<double>(closable));
        for (int i = 0; i < closable; ++i) closure.at(i, j) = std::clamp(closed - i, 0.0, 1.0);
    }
    return closure;
}

Date test_period_start(const DateRange& range, int test_months) {
    return add_days(add_months(range.last, -test_months), 1);
}

std::uint64_t flight_seed(std::uint64_t seed, const std::string& market_id, Date date) {
    return stable_hash({seed, hash_string(market_id), date_word(date)});
}

Dataset generate_dataset(const std::vector<MarketConfig>& markets, const DateRange& range,
                         const ClosurePolicySampler& sampler, const std::optional<ShockConfig>& shock,
                         std::uint64_t seed, const GridSpec& grids, const SplitRequirements& requirements) {
    if (markets.empty()) throw ConfigError("at least one market is required");
    for (const auto& m : markets) m.validate();
    if (range.days() <= 0) throw ConfigError("date range is empty");

    const Date test_start = test_period_start(range, requirements.test_months);
    const int test_days = days_between(range.last, test_start) + 1;
    const int needed = requirements.warmup_weeks * 7 + requirements.min_train_days + test_days;
    if (range.days() < needed)
        throw ConfigError("date range spans " + std::to_string(range.days()) + " days; at least " +
                          std::to_string(needed) + " are required for warm-up, training and a " +
                          std::to_string(requirements.test_months) + "-month test period");

    std::optional<Date> shock_date;
    if (shock) {
        shock->validate();
        shock_date = add_days(test_start, shock->shock_date_offset);
        if (*shock_date > range.last) throw ConfigError("shock offset lies beyond the date range");
    }

    Dataset ds;
    ds.grids = grids;
    ds.range = range;
    ds.seed = seed;
    ds.markets = markets;
    ds.shock = shock;
    ds.flights.reserve(markets.size() * static_cast<std::size_t>(range.days()));

    for (const auto& base : markets) {
        MarketConfig shocked = base;
        if (shock) {
            shocked.base_daily_demand *= shock->capacity_multiplier;
            shocked.capacity = static_cast<int>(std::lround(base.capacity * shock->capacity_multiplier));
        }

        std::mt19937_64 level_rng(stable_hash({seed, hash_string(base.market_id), kLevelSalt}));
        std::normal_distribution<double> normal(0.0, 1.0);
        const double phi = base.level_persistence;
        const double sigma = base.level_volatility;
        const double stationary_var = sigma * sigma / (1.0 - phi * phi);
        double level = std::sqrt(stationary_var) * normal(level_rng);

        for (Date d = range.first; d <= range.last; d = add_days(d, 1)) {
            const double factor = std::exp(level - 0.5 * stationary_var);
            const bool is_shocked = shock_date && d >= *shock_date;
            const MarketConfig& cfg = is_shocked ? shocked : base;
            const std::uint64_t fseed = flight_seed(seed, base.market_id, d);
            ClosureMatrix closure = sampler(cfg, d, stable_hash({fseed, kClosureSalt}), grids);
            ds.flights.push_back(simulate_flight(cfg, d, closure, fseed, grids, factor));
            level = phi * level + sigma * normal(level_rng);
        }
    }
    return ds;
}

DateRange default_date_range() {
    return DateRange{make_date(2021, 12, 1), make_date(2023, 5, 31)};
}

std::vector<MarketConfig> default_markets(const DateRange& range) {
    struct Row {
        const char* id;
        int origin, destination;
        double demand;
        std::array<double, 7> dow;
        double amplitude, local, sensitivity, a, b;
        int capacity;
        double recapture, rasm;
    };
    const Row rows[] = {
        {"DFW-ORD", 0, 1, 120, {1.25, 0.85, 0.80, 1.05, 1.35, 0.90, 1.10}, 0.20, 0.55, 0.25, 2.2, 1.6, 180, 0.35, 0.13},
        {"DFW-MIA", 0, 2, 90, {1.10, 0.80, 0.85, 1.00, 1.30, 1.15, 1.20}, 0.25, 0.70, 0.30, 2.0, 1.8, 150, 0.30, 0.12},
        {"CLT-LGA", 3, 4, 140, {1.30, 1.05, 1.00, 1.10, 1.30, 0.60, 0.95}, 0.15, 0.45, 0.20, 2.5, 1.5, 200, 0.40, 0.15},
        {"PHX-LAX", 5, 6, 70, {1.00, 0.80, 0.80, 0.95, 1.25, 1.20, 1.30}, 0.20, 0.65, 0.35, 1.8, 1.9, 120, 0.25, 0.10},
        {"MIA-BOG", 2, 7, 60, {0.95, 0.75, 0.90, 1.00, 1.20, 1.35, 1.15}, 0.30, 0.35, 0.30, 1.6, 2.0, 110, 0.30, 0.11},
    };

    std::vector<HolidaySpike> holidays;
    for (int y = static_cast<int>(std::chrono::year_month_day{range.first}.year());
         y <= static_cast<int>(std::chrono::year_month_day{range.last}.year()); ++y) {
        holidays.push_back({make_date(y, 1, 1), 1.4});
        holidays.push_back({make_date(y, 7, 4), 1.5});
        holidays.push_back({make_date(y, 11, 24), 1.6});
        holidays.push_back({make_date(y, 12, 23), 1.5});
        holidays.push_back({make_date(y, 12, 31), 1.3});
    }

    std::vector<MarketConfig> markets;
    for (const auto& r : rows) {
        MarketConfig m;
        m.market_id = r.id;
        m.origin_id = r.origin;
        m.destination_id = r.destination;
        m.base_daily_demand = r.demand;
        m.dow_multipliers = r.dow;
        m.annual_amplitude = r.amplitude;
        m.holidays = holidays;
        m.local_share = r.local;
        m.fare_sensitivity = r.sensitivity;
        m.curve_shape = {r.a, r.b};
        m.capacity = r.capacity;
        m.recapture_prob = r.recapture;
        m.base_rasm = r.rasm;
        m.level_persistence = 0.97;
        m.level_volatility = 0.015;
        markets.push_back(std::move(m));
    }
    return markets;
}

}  // namespace skycast::synth
