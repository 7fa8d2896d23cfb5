#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skycast/core/date.hpp"
#include "skycast/core/grid.hpp"

namespace skycast {

inline constexpr double kMaskSentinel = -1.0;

enum Channel : int { kLocal = 0, kFlow = 1 };
inline constexpr int kChannelCount = 2;

/// Booked passengers on a (fare bracket, interval, channel) grid, stored
/// row-major in (F, D, C) order.
class TrafficTensor {
public:
    TrafficTensor() = default;
    TrafficTensor(int fares, int intervals);

    int fares() const { return fares_; }
    int intervals() const { return intervals_; }
    std::size_t size() const { return values_.size(); }

    double& at(int i, int j, int k) { return values_[offset(i, j, k)]; }
    double at(int i, int j, int k) const { return values_[offset(i, j, k)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    double total() const;
    bool same_shape(const TrafficTensor& other) const {
        return fares_ == other.fares_ && intervals_ == other.intervals_;
    }

    bool operator==(const TrafficTensor&) const = default;

private:
    std::size_t offset(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * intervals_ + j) * kChannelCount + k;
    }

    int fares_ = 0;
    int intervals_ = 0;
    std::vector<double> values_;
};

/// Mean closed fraction per (fare bracket, interval); 1 means closed every day.
class ClosureMatrix {
public:
    ClosureMatrix() = default;
    ClosureMatrix(int fares, int intervals, double fill = 0.0);

    int fares() const { return fares_; }
    int intervals() const { return intervals_; }

    double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * intervals_ + j]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * intervals_ + j]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Throws DomainError when any entry leaves [0, 1].
    void validate() const;

    bool operator==(const ClosureMatrix&) const = default;

private:
    int fares_ = 0;
    int intervals_ = 0;
    std::vector<double> values_;
};

struct SeasonalityVector {
    static constexpr int kLength = 14;

    std::array<double, 7> day_of_week{};
    double week_sin = 0.0;
    double week_cos = 1.0;
    double holiday_flag = 0.0;
    double origin_id = 0.0;       // scaled to [0, 1] by the normalizer
    double destination_id = 0.0;  // scaled to [0, 1] by the normalizer
    double capacity_norm = 1.0;
    double rasm_norm = 0.0;

    std::array<double, kLength> features() const;
};

struct FlightInstance {
    std::string market_id;
    Date departure;
    int capacity = 0;
    bool holiday = false;
    int origin_id = 0;
    int destination_id = 0;
    double rasm = 0.0;
    std::uint64_t seed = 0;
    double demand_factor = 1.0;  // latent market level applied at generation
    TrafficTensor traffic;
    ClosureMatrix closure;
};

}  // namespace skycast
