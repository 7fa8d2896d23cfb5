#include "skycast/mask/split.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "skycast/core/error.hpp"

namespace skycast::mask {

const char* split_name(Split s) {
    switch (s) {
        case Split::kTrain: return "train";
        case Split::kVal: return "val";
        case Split::kTest: return "test";
    }
    return "?";
}

Split parse_split(const std::string& text) {
    if (text == "train") return Split::kTrain;
    if (text == "val") return Split::kVal;
    if (text == "test") return Split::kTest;
    throw InputError("unknown split '" + text + "'");
}

Split SplitPlan::classify(Date d) const {
    if (d >= test_start) return Split::kTest;
    if (d >= val_start) return Split::kVal;
    return Split::kTrain;
}

SplitPlan chronological_split(std::span<const Date> departures, int test_months, double val_fraction) {
    if (departures.empty()) throw ConfigError("cannot split an empty dataset");
    if (test_months <= 0 || !(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("invalid split parameters");

    std::vector<Date> dates(departures.begin(), departures.end());
    std::sort(dates.begin(), dates.end());

    SplitPlan plan;
    plan.first = dates.front();
    plan.last = dates.back();
    plan.test_start = add_days(add_months(plan.last, -test_months), 1);
    if (plan.test_start <= plan.first)
        throw ConfigError("dataset spans " + std::to_string(days_between(plan.last, plan.first) + 1) +
                          " days, not more than the " + std::to_string(test_months) + "-month test period");

    const auto remainder_end = std::lower_bound(dates.begin(), dates.end(), plan.test_start);
    const auto remainder = static_cast<std::size_t>(remainder_end - dates.begin());
    const auto val_count = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(remainder)));
    if (val_count == 0 || val_count >= remainder)
        throw ConfigError("too few pre-test flights for a train/validation split");

    // Whole departure dates only, so every flight on a date lands in one set.
    Date cut = dates[remainder - val_count];
    plan.val_start = cut;
    if (plan.val_start <= plan.first) throw ConfigError("validation split would consume all training dates");
    return plan;
}

}  // namespace skycast::mask
