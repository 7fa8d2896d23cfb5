#pragma once

#include <vector>

namespace skycast {

/// Price bands in USD. Edge 0 is always 0; the last bracket is open-ended.
class FareBracketGrid {
public:
    explicit FareBracketGrid(std::vector<double> edges);

    /// `count` brackets of equal `width`, e.g. 10 x $100.
    static FareBracketGrid uniform(int count, double width);

    int count() const { return static_cast<int>(edges_.size()); }
    const std::vector<double>& edges() const { return edges_; }

    /// Bracket holding `fare`; throws DomainError for negative fares.
    int index(double fare) const;

private:
    std::vector<double> edges_;
};

/// Days-before-departure buckets. Index j grows toward departure: j = 0 is the
/// farthest bucket, j = count - 1 covers [0, width) days before departure.
class IntervalGrid {
public:
    IntervalGrid(int width_days, int count);

    int width() const { return width_; }
    int count() const { return count_; }
    int horizon_days() const { return width_ * count_; }

    /// Smallest days-before-departure value covered by interval j.
    int lower_days(int j) const { return width_ * (count_ - 1 - j); }
    /// One past the largest days-before-departure value covered by interval j.
    int upper_days(int j) const { return width_ * (count_ - j); }

    /// Throws OutOfRangeError outside [0, horizon).
    int index(int days_before_departure) const;

private:
    int width_;
    int count_;
};

/// Largest fully realized interval index J in [-1, D-1]. Entries with j > J are
/// masked.
struct MaskSpec {
    enum class Source { kReferenceDate, kPseudoRandom };

    int boundary = -1;
    Source source = Source::kReferenceDate;
};

/// `delta_days` = departure - reference. Intervals whose lower bound is at least
/// delta_days are complete; partially elapsed intervals count as unrealized.
MaskSpec realized_boundary(int delta_days, const IntervalGrid& grid,
                           MaskSpec::Source source = MaskSpec::Source::kReferenceDate);

struct GridSpec {
    FareBracketGrid fares = FareBracketGrid::uniform(10, 100.0);
    IntervalGrid intervals{5, 12};
};

}  // namespace skycast
