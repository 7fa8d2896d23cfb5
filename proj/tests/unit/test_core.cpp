#include <gtest/gtest.h>

#include <cmath>

#include "skycast/core/date.hpp"
#include "skycast/core/error.hpp"
#include "skycast/core/grid.hpp"
#include "skycast/core/hash.hpp"
#include "skycast/core/types.hpp"

using namespace skycast;

namespace {

// Interval j is realized when every day it covers was booked on or before the
// reference date, i.e. days_before >= delta for each of its days.
int brute_force_boundary(int delta, int w, int D) {
    int J = -1;
    for (int j = 0; j < D; ++j) {
        bool complete = true;
        for (int day = w * (D - 1 - j); day < w * (D - j); ++day) complete = complete && day >= delta;
        if (complete) J = j;
    }
    return J;
}

}  // namespace

TEST(Grid, BracketIndexExamples) {
    const auto grid = FareBracketGrid::uniform(10, 100.0);
    EXPECT_EQ(grid.index(150.0), 1);
    EXPECT_EQ(grid.index(0.0), 0);
    EXPECT_EQ(grid.index(5000.0), 9);
    EXPECT_EQ(grid.index(100.0), 1);
    EXPECT_THROW(grid.index(-1.0), DomainError);
}

TEST(Grid, BracketEdgesValidated) {
    EXPECT_THROW(FareBracketGrid({0.0}), ConfigError);
    EXPECT_THROW(FareBracketGrid({0.0, 100.0, 100.0}), ConfigError);
    EXPECT_THROW(FareBracketGrid({10.0, 100.0}), ConfigError);
}

TEST(Grid, IntervalIndexExamples) {
    const IntervalGrid grid(5, 12);
    EXPECT_EQ(grid.index(3), 11);
    EXPECT_EQ(grid.index(59), 0);
    EXPECT_THROW(grid.index(60), OutOfRangeError);
    EXPECT_THROW(grid.index(-1), OutOfRangeError);
    EXPECT_EQ(grid.horizon_days(), 60);
}

TEST(Grid, GridsPartitionTheirDomains) {
    const IntervalGrid grid(5, 12);
    for (int day = 0; day < grid.horizon_days(); ++day) {
        const int j = grid.index(day);
        EXPECT_GE(day, grid.lower_days(j));
        EXPECT_LT(day, grid.upper_days(j));
    }
    const auto fares = FareBracketGrid::uniform(10, 100.0);
    for (double fare = 0.0; fare < 1200.0; fare += 7.5) {
        const int i = fares.index(fare);
        EXPECT_GE(fare, fares.edges()[static_cast<std::size_t>(i)]);
        if (i + 1 < fares.count()) EXPECT_LT(fare, fares.edges()[static_cast<std::size_t>(i + 1)]);
    }
}

TEST(Grid, RealizedBoundaryExamples) {
    const IntervalGrid grid(5, 12);
    EXPECT_EQ(realized_boundary(0, grid).boundary, 11);
    EXPECT_EQ(realized_boundary(60, grid).boundary, -1);
    EXPECT_EQ(realized_boundary(500, grid).boundary, -1);
    EXPECT_EQ(realized_boundary(7, grid).boundary, 9);
    EXPECT_EQ(realized_boundary(-30, grid).boundary, 11);
}

TEST(Grid, RealizedBoundaryMatchesBruteForce) {
    for (int w : {1, 3, 5, 7})
        for (int D : {6, 12, 24})
            for (int delta = -30; delta <= 90; ++delta)
                ASSERT_EQ(realized_boundary(delta, IntervalGrid(w, D)).boundary, brute_force_boundary(delta, w, D))
                    << "w=" << w << " D=" << D << " delta=" << delta;
}

TEST(Grid, MaskedCountMonotoneInDelta) {
    const IntervalGrid grid(5, 12);
    int prev = realized_boundary(-10, grid).boundary;
    for (int delta = -9; delta <= 80; ++delta) {
        const int J = realized_boundary(delta, grid).boundary;
        EXPECT_LE(J, prev);
        prev = J;
    }
}

TEST(Types, ClosureValidation) {
    ClosureMatrix c(2, 3, 0.5);
    EXPECT_NO_THROW(c.validate());
    c.at(1, 2) = 1.2;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(Types, SeasonalityFeaturesLayout) {
    SeasonalityVector s;
    s.day_of_week[3] = 1.0;
    s.week_sin = 0.6;
    s.week_cos = 0.8;
    s.rasm_norm = 0.25;
    const auto f = s.features();
    EXPECT_EQ(f.size(), 14u);
    EXPECT_EQ(f[3], 1.0);
    EXPECT_EQ(f[7], 0.6);
    EXPECT_EQ(f[13], 0.25);
}

TEST(Date, CalendarHelpers) {
    const Date d = make_date(2023, 3, 1);
    EXPECT_EQ(format_date(d), "2023-03-01");
    EXPECT_EQ(parse_date("2023-03-01"), d);
    EXPECT_THROW(parse_date("2023-13-01"), InputError);
    EXPECT_THROW(parse_date("yesterday"), InputError);
    EXPECT_EQ(day_of_week(d), 2);  // Wednesday
    EXPECT_EQ(add_months(make_date(2023, 5, 31), -3), make_date(2023, 2, 28));
    EXPECT_EQ(days_between(make_date(2023, 3, 8), d), 7);
    EXPECT_EQ(week_of_year(make_date(2023, 1, 7)), 0);
    EXPECT_EQ(week_of_year(make_date(2023, 1, 8)), 1);
}

TEST(Hash, StableAndOrderSensitive) {
    static_assert(stable_hash({1, 2}) != stable_hash({2, 1}));
    EXPECT_EQ(stable_hash({7, 8, 9}), stable_hash({7, 8, 9}));
    EXPECT_EQ(hash_string("DFW-ORD"), hash_string("DFW-ORD"));
    EXPECT_NE(hash_string("DFW-ORD"), hash_string("DFW-MIA"));
}

TEST(Error, CategoryNames) {
    EXPECT_STREQ(category_name(ErrorCategory::kInput), "missing/invalid input");
    try {
        throw GapError("gap");
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::kGap);
    }
}
