#include "skycast/core/grid.hpp"

#include <algorithm>
#include <string>

#include "skycast/core/error.hpp"

namespace skycast {

FareBracketGrid::FareBracketGrid(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw ConfigError("fare grid needs at least two brackets");
    if (edges_.front() != 0.0) throw ConfigError("fare grid must start at 0");
    if (!std::is_sorted(edges_.begin(), edges_.end()) ||
        std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw ConfigError("fare grid edges must be strictly increasing");
}

FareBracketGrid FareBracketGrid::uniform(int count, double width) {
    if (count < 2 || width <= 0.0) throw ConfigError("invalid uniform fare grid");
    std::vector<double> edges(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) edges[static_cast<std::size_t>(i)] = width * i;
    return FareBracketGrid(std::move(edges));
}

int FareBracketGrid::index(double fare) const {
    if (!(fare >= 0.0)) throw DomainError("negative fare " + std::to_string(fare));
    auto it = std::upper_bound(edges_.begin(), edges_.end(), fare);
    return static_cast<int>(it - edges_.begin()) - 1;
}

IntervalGrid::IntervalGrid(int width_days, int count) : width_(width_days), count_(count) {
    if (width_days <= 0 || count <= 0) throw ConfigError("interval grid needs positive width and count");
}

int IntervalGrid::index(int days_before_departure) const {
    if (days_before_departure < 0 || days_before_departure >= horizon_days())
        throw OutOfRangeError("days before departure " + std::to_string(days_before_departure) +
                              " outside horizon [0, " + std::to_string(horizon_days()) + ")");
    return count_ - 1 - days_before_departure / width_;
}

MaskSpec realized_boundary(int delta_days, const IntervalGrid& grid, MaskSpec::Source source) {
    const int w = grid.width();
    const int d = grid.count();
    // ceil(delta / w) for signed delta
    int q = delta_days / w;
    if (delta_days % w != 0 && delta_days > 0) ++q;
    const int j = std::clamp(d - 1 - q, -1, d - 1);
    return MaskSpec{j, source};
}

}  // namespace skycast
