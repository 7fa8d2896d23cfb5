#include "skycast/core/types.hpp"

#include <numeric>

#include "skycast/core/error.hpp"

namespace skycast {

TrafficTensor::TrafficTensor(int fares, int intervals)
    : fares_(fares),
      intervals_(intervals),
      values_(static_cast<std::size_t>(fares) * intervals * kChannelCount, 0.0) {}

double TrafficTensor::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

ClosureMatrix::ClosureMatrix(int fares, int intervals, double fill)
    : fares_(fares), intervals_(intervals), values_(static_cast<std::size_t>(fares) * intervals, fill) {}

void ClosureMatrix::validate() const {
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("closure fraction outside [0, 1]");
}

std::array<double, SeasonalityVector::kLength> SeasonalityVector::features() const {
    std::array<double, kLength> out{};
    for (int d = 0; d < 7; ++d) out[static_cast<std::size_t>(d)] = day_of_week[static_cast<std::size_t>(d)];
    out[7] = week_sin;
    out[8] = week_cos;
    out[9] = holiday_flag;
    out[10] = origin_id;
    out[11] = destination_id;
    out[12] = capacity_norm;
    out[13] = rasm_norm;
    return out;
}

}  // namespace skycast
