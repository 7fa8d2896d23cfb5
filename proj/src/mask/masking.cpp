#include "skycast/mask/masking.hpp"

#include <algorithm>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"

namespace skycast::mask {

namespace {
constexpr std::uint64_t kEpochSalt = 0xe90c4ULL;
}

void mask_values(std::span<double> values, int fares, int intervals, int boundary) {
    if (boundary >= intervals - 1) return;
    for (int i = 0; i < fares; ++i)
        for (int j = std::max(boundary + 1, 0); j < intervals; ++j)
            for (int k = 0; k < kChannelCount; ++k)
                values[(static_cast<std::size_t>(i) * intervals + j) * kChannelCount + k] = kMaskSentinel;
}

TrafficTensor mask_tensor(const TrafficTensor& t, const MaskSpec& spec) {
    TrafficTensor out = t;
    mask_values(out.values(), out.fares(), out.intervals(), spec.boundary);
    return out;
}

std::vector<int> window_boundaries(std::span<const Date> departures, Date reference, const IntervalGrid& grid) {
    std::vector<int> out;
    out.reserve(departures.size());
    for (Date d : departures) out.push_back(realized_boundary(days_between(d, reference), grid).boundary);
    return out;
}

prep::HistoricalWindow mask_window(const prep::HistoricalWindow& window, Date reference, const IntervalGrid& grid) {
    if (reference > window.departures.back())
        throw DomainError("reference date " + format_date(reference) + " is after the target departure " +
                          format_date(window.departures.back()));
    prep::HistoricalWindow out = window;
    const auto bounds = window_boundaries(window.departures, reference, grid);
    for (std::size_t m = 0; m < out.traffic.size(); ++m)
        out.traffic[m] = mask_tensor(out.traffic[m], MaskSpec{bounds[m], MaskSpec::Source::kReferenceDate});
    return out;
}

int pseudo_delta(std::uint64_t base_seed, int epoch, std::uint64_t example_id, const IntervalGrid& grid,
                 int max_days) {
    if (max_days < 0) throw DomainError("pseudo offset bound must be non-negative");
    const int hi = max_days == 0 ? grid.horizon_days() : max_days;
    const std::uint64_t h = stable_hash({base_seed, static_cast<std::uint64_t>(epoch), example_id, kEpochSalt});
    return static_cast<int>(hash_to_range(h, static_cast<std::uint64_t>(hi) + 1));
}

EpochMaskPlan epoch_masks(std::span<const std::uint64_t> example_ids, int epoch, std::uint64_t base_seed,
                          const IntervalGrid& grid, int max_days) {
    EpochMaskPlan plan{base_seed, epoch, {}};
    plan.entries.reserve(example_ids.size());
    for (std::uint64_t id : example_ids) {
        const int delta = pseudo_delta(base_seed, epoch, id, grid, max_days);
        plan.entries.push_back({id, delta, realized_boundary(delta, grid, MaskSpec::Source::kPseudoRandom).boundary});
    }
    return plan;
}

}  // namespace skycast::mask
