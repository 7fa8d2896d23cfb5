#pragma once

#include <span>
#include <string>

#include "skycast/core/date.hpp"

namespace skycast::mask {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split s);
Split parse_split(const std::string& text);

/// Chronological partition of departure dates: train < val < test.
struct SplitPlan {
    Date first;
    Date val_start;
    Date test_start;
    Date last;

    Split classify(Date departure) const;
    /// Reference date used to mask validation and test inputs.
    Date reference_date(Split s) const { return s == Split::kVal ? val_start : test_start; }
};

/// Test = departures in the final `test_months` months. Validation = the
/// chronologically latest `val_fraction` of the remaining departures.
/// `departures` may repeat dates (one entry per flight) and need not be sorted.
SplitPlan chronological_split(std::span<const Date> departures, int test_months = 3, double val_fraction = 0.10);

}  // namespace skycast::mask
