#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skycast/core/grid.hpp"
#include "skycast/core/types.hpp"
#include "skycast/prep/tensorize.hpp"

namespace skycast::mask {

/// Sets every entry with interval index j > J to the sentinel. Returns a copy.
TrafficTensor mask_tensor(const TrafficTensor& t, const MaskSpec& spec);

/// In-place variant over a raw (F, D, C) row-major buffer.
void mask_values(std::span<double> values, int fares, int intervals, int boundary);

/// Masks each member against its own departure relative to `reference`.
/// Closure grids are left untouched. Throws DomainError if `reference` is after
/// the target departure.
prep::HistoricalWindow mask_window(const prep::HistoricalWindow& window, Date reference, const IntervalGrid& grid);

/// Realized boundaries for each window member (oldest first) given a reference.
std::vector<int> window_boundaries(std::span<const Date> departures, Date reference, const IntervalGrid& grid);

/// Pseudo departure offset for one training example in one epoch, uniform on
/// {0, 1, ..., max_days}; max_days = 0 means the booking horizon w*D.
int pseudo_delta(std::uint64_t base_seed, int epoch, std::uint64_t example_id, const IntervalGrid& grid,
                 int max_days = 0);

struct EpochMaskEntry {
    std::uint64_t example_id = 0;
    int delta = 0;     // target departure - pseudo reference, days
    int boundary = 0;  // J of the target
};

struct EpochMaskPlan {
    std::uint64_t base_seed = 0;
    int epoch = 0;
    std::vector<EpochMaskEntry> entries;
};

EpochMaskPlan epoch_masks(std::span<const std::uint64_t> example_ids, int epoch, std::uint64_t base_seed,
                          const IntervalGrid& grid, int max_days = 0);

}  // namespace skycast::mask
