#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"
#include "skycast/mask/masking.hpp"
#include "skycast/mask/split.hpp"
#include "skycast/prep/normalizer.hpp"
#include "skycast/prep/prepared.hpp"
#include "skycast/prep/tensorize.hpp"
#include "skycast/synth/generator.hpp"

using namespace skycast;

namespace {

const synth::Dataset& small_dataset() {
    static const synth::Dataset ds = [] {
        const synth::DateRange range{make_date(2022, 1, 1), make_date(2022, 8, 31)};
        auto markets = synth::default_markets(range);
        markets.resize(2);
        return synth::generate_dataset(markets, range, synth::StaircaseClosurePolicy{}, std::nullopt, 21);
    }();
    return ds;
}

TrafficTensor random_traffic(std::uint64_t seed, int F = 10, int D = 12) {
    TrafficTensor t(F, D);
    std::size_t n = 0;
    for (double& v : t.values()) v = static_cast<double>(stable_hash({seed, n++}) % 1000) / 1000.0;
    return t;
}

// Day-by-day realization: interval j is visible when all its days lie at or
// beyond delta days before departure.
int enumerate_boundary(int delta, const IntervalGrid& g) {
    int J = -1;
    for (int j = 0; j < g.count(); ++j) {
        bool done = true;
        for (int day = g.lower_days(j); day < g.upper_days(j); ++day) done = done && day >= delta;
        if (done) J = j;
    }
    return J;
}

}  // namespace

TEST(Tensorize, BuildTrafficTensorExamples) {
    const GridSpec grids;
    EXPECT_EQ(prep::build_traffic_tensor({}, grids).total(), 0.0);

    const std::vector<prep::Booking> one{{150.0, 8, kLocal, 1}};
    const auto t = prep::build_traffic_tensor(one, grids);
    EXPECT_EQ(t.at(1, 10, 0), 1.0);
    EXPECT_EQ(t.total(), 1.0);

    const std::vector<prep::Booking> two{{150.0, 8, kLocal, 1}, {160.0, 6, kLocal, 1}};
    const auto u = prep::build_traffic_tensor(two, grids);
    EXPECT_EQ(u.at(1, 10, 0), 2.0);
    EXPECT_EQ(u.total(), 2.0);

    const std::vector<prep::Booking> late{{150.0, 60, kFlow, 1}};
    EXPECT_THROW(prep::build_traffic_tensor(late, grids), OutOfRangeError);
}

TEST(Tensorize, AssembleWindowOrderingAndWarmup) {
    const auto& ds = small_dataset();
    const prep::FlightStore store(ds.flights);
    const FlightInstance& target = ds.flights[100];
    const auto w = prep::assemble_window(target, 5, store);
    ASSERT_EQ(w.departures.size(), 6u);
    EXPECT_EQ(w.departures.back(), target.departure);
    for (std::size_t m = 1; m < w.departures.size(); ++m) EXPECT_EQ(days_between(w.departures[m], w.departures[m - 1]), 7);
    EXPECT_TRUE(w.target_traffic() == target.traffic);

    EXPECT_EQ(prep::assemble_window(target, 0, store).departures.size(), 1u);
    EXPECT_THROW(prep::assemble_window(ds.flights[34], 5, store), InsufficientHistoryError);
    EXPECT_NO_THROW(prep::assemble_window(ds.flights[35], 5, store));
}

TEST(Tensorize, ClosureVolumeStacksWindow) {
    const auto& ds = small_dataset();
    const prep::FlightStore store(ds.flights);
    const auto w = prep::assemble_window(ds.flights[80], 3, store);
    const auto vol = prep::closure_volume(w);
    ASSERT_EQ(vol.depth, 4);
    for (int m = 0; m < 4; ++m)
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 12; ++j) EXPECT_EQ(vol.at(m, i, j), w.closure[static_cast<std::size_t>(m)].at(i, j));
    const auto single = prep::closure_volume(w, false);
    EXPECT_EQ(single.depth, 1);
    EXPECT_EQ(single.at(0, 4, 7), w.closure.back().at(4, 7));
}

TEST(Normalizer, MaxScalingEndpointsAndRoundTrip) {
    FlightInstance f;
    f.market_id = "AAA-BBB";
    f.capacity = 100;
    f.traffic = TrafficTensor(10, 12);
    f.traffic.at(2, 3, 1) = 40.0;
    f.closure = ClosureMatrix(10, 12);
    const FlightInstance* flights[] = {&f};
    const auto norm = prep::fit_normalizer(flights);
    EXPECT_EQ(norm.traffic_scale("AAA-BBB"), 40.0);
    const auto t = norm.normalize(f.traffic, "AAA-BBB");
    EXPECT_EQ(t.at(2, 3, 1), 1.0);
    EXPECT_EQ(t.at(0, 0, 0), 0.0);

    TrafficTensor r = random_traffic(5);
    for (double& v : r.values()) v *= 73.0;
    r.at(0, 11, 0) = kMaskSentinel;
    const auto back = norm.denormalize(norm.normalize(r, "AAA-BBB"), "AAA-BBB");
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(back.values()[i], r.values()[i], 1e-6);
    EXPECT_EQ(norm.normalize(r, "AAA-BBB").at(0, 11, 0), kMaskSentinel);
    EXPECT_THROW(norm.traffic_scale("XXX-YYY"), LookupError);
}

TEST(Normalizer, ZeroTrafficUsesUnitFloor) {
    FlightInstance f;
    f.market_id = "AAA-BBB";
    f.traffic = TrafficTensor(10, 12);
    f.closure = ClosureMatrix(10, 12);
    const FlightInstance* flights[] = {&f};
    EXPECT_EQ(prep::fit_normalizer(flights).traffic_scale("AAA-BBB"), 1.0);
    EXPECT_THROW(prep::fit_normalizer(std::span<const FlightInstance* const>{}), ConfigError);
}

TEST(Normalizer, JsonRoundTrip) {
    const auto p = prep::prepare(small_dataset(), {});
    EXPECT_EQ(prep::Normalizer::from_json(p.normalizer.to_json()), p.normalizer);
}

TEST(Prepare, FitsOnTrainingOnlyAndTrainingMaxIsOne) {
    const auto ds = synth::generate_dataset(synth::default_markets(synth::default_date_range()),
                                            synth::default_date_range(), synth::StaircaseClosurePolicy{}, std::nullopt, 1);
    const auto p = prep::prepare(ds, {});
    std::vector<const FlightInstance*> everything;
    for (const auto& f : ds.flights) everything.push_back(&f);
    const auto leaky = prep::fit_normalizer(everything);
    EXPECT_FALSE(leaky == p.normalizer);

    std::map<std::string, double> max_label;
    for (const auto* e : p.split(mask::Split::kTrain))
        for (double v : e->label) max_label[e->market_id] = std::max(max_label[e->market_id], v);
    // Training flights in the warm-up weeks carry no example, so the maximum
    // over examples can only fall short of 1.
    for (const auto& [market, m] : max_label) EXPECT_LE(m, 1.0);
    double overall = 0.0;
    for (const auto& f : ds.flights) {
        if (p.plan.classify(f.departure) != mask::Split::kTrain) continue;
        for (double v : p.normalizer.normalize(f.traffic, f.market_id).values()) overall = std::max(overall, v);
    }
    EXPECT_EQ(overall, 1.0);
}

TEST(Prepare, TotalsMatchGeneratorAndWindowsAlign) {
    const auto& ds = small_dataset();
    const auto p = prep::prepare(ds, {});
    ASSERT_EQ(p.totals.size(), ds.flights.size());
    for (std::size_t f = 0; f < ds.flights.size(); ++f) EXPECT_EQ(p.totals[f].passengers, ds.flights[f].traffic.total());
    EXPECT_EQ(p.skipped.size(), 2u * 35u);
    for (const auto& e : p.examples) {
        ASSERT_EQ(e.member_dates.size(), 6u);
        for (std::size_t m = 1; m < 6; ++m) ASSERT_EQ(days_between(e.member_dates[m], e.member_dates[m - 1]), 7);
        ASSERT_EQ(e.member_dates.back(), e.departure);
    }
}

TEST(Split, ChronologicalPartition) {
    std::vector<Date> dates;
    for (Date d = make_date(2022, 1, 1); d <= make_date(2022, 12, 31); d = add_days(d, 1)) dates.push_back(d);
    const auto plan = mask::chronological_split(dates);
    EXPECT_EQ(plan.test_start, make_date(2022, 10, 1));
    std::map<mask::Split, int> counts;
    Date prev_train{}, first_val{}, last_val{};
    for (Date d : dates) {
        const auto s = plan.classify(d);
        ++counts[s];
        if (s == mask::Split::kTrain) prev_train = d;
        if (s == mask::Split::kVal && counts[s] == 1) first_val = d;
        if (s == mask::Split::kVal) last_val = d;
    }
    EXPECT_LT(prev_train, first_val);
    EXPECT_LT(last_val, plan.test_start);
    EXPECT_EQ(counts[mask::Split::kTrain] + counts[mask::Split::kVal] + counts[mask::Split::kTest], 365);
    const int pre_test = counts[mask::Split::kTrain] + counts[mask::Split::kVal];
    EXPECT_NEAR(counts[mask::Split::kVal], 0.1 * pre_test, 1.0);
    EXPECT_THROW(mask::chronological_split(std::span<const Date>{}), ConfigError);
}

TEST(Masking, MaskTensorExamples) {
    const auto t = random_traffic(1);
    EXPECT_TRUE(mask::mask_tensor(t, {11}) == t);
    const auto hidden = mask::mask_tensor(t, {-1});
    for (double v : hidden.values()) EXPECT_EQ(v, kMaskSentinel);
    const auto m = mask::mask_tensor(t, {2});
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 12; ++j)
            for (int k = 0; k < 2; ++k) EXPECT_EQ(m.at(i, j, k), j <= 2 ? t.at(i, j, k) : kMaskSentinel);
}

TEST(Masking, MaskTensorSatisfiesDefinitionOnRandomPairs) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto t = random_traffic(s + 100);
        const int J = static_cast<int>(stable_hash({s, 7}) % 13) - 1;
        const auto m = mask::mask_tensor(t, {J});
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 12; ++j)
                for (int k = 0; k < 2; ++k) ASSERT_EQ(m.at(i, j, k) == kMaskSentinel, j > J);
    }
}

TEST(Masking, MaskWindowAgainstDayEnumeration) {
    const auto& ds = small_dataset();
    const prep::FlightStore store(ds.flights);
    const auto w = prep::assemble_window(ds.flights[150], 5, store);
    const IntervalGrid& g = ds.grids.intervals;

    const auto all = mask::mask_window(w, w.departures.back(), g);
    for (std::size_t m = 0; m < 6; ++m) EXPECT_TRUE(all.traffic[m] == w.traffic[m]);

    const Date ref = add_days(w.departures.back(), -g.horizon_days());
    const auto masked = mask::mask_window(w, ref, g);
    for (double v : masked.traffic.back().values()) EXPECT_EQ(v, kMaskSentinel);
    for (std::size_t m = 0; m < 6; ++m) {
        const int J = enumerate_boundary(days_between(w.departures[m], ref), g);
        EXPECT_TRUE(masked.traffic[m] == mask::mask_tensor(w.traffic[m], {J}));
        EXPECT_TRUE(masked.closure[m] == w.closure[m]);
    }
    EXPECT_THROW(mask::mask_window(w, add_days(w.departures.back(), 1), g), DomainError);
}

TEST(Masking, EpochMasksDeterministicAndRefreshed) {
    const IntervalGrid g(5, 12);
    std::vector<std::uint64_t> ids;
    for (std::uint64_t i = 0; i < 1000; ++i) ids.push_back(stable_hash({i, 3}));
    const auto a = mask::epoch_masks(ids, 0, 42, g);
    const auto b = mask::epoch_masks(ids, 0, 42, g);
    const auto c = mask::epoch_masks(ids, 1, 42, g);
    int differ = 0;
    std::set<int> deltas;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        EXPECT_EQ(a.entries[i].delta, b.entries[i].delta);
        EXPECT_GE(a.entries[i].delta, 0);
        EXPECT_LE(a.entries[i].delta, g.horizon_days());
        EXPECT_EQ(a.entries[i].boundary, realized_boundary(a.entries[i].delta, g).boundary);
        deltas.insert(a.entries[i].delta);
        differ += a.entries[i].boundary != c.entries[i].boundary;
    }
    EXPECT_GE(differ, 900);
    EXPECT_EQ(deltas.size(), static_cast<std::size_t>(g.horizon_days() + 1));
    EXPECT_EQ(realized_boundary(0, g).boundary, g.count() - 1);
}

TEST(Masking, PseudoDeltaBound) {
    const IntervalGrid g(5, 12);
    std::set<int> seen;
    for (std::uint64_t i = 0; i < 3000; ++i) {
        const int d = mask::pseudo_delta(7, 0, i, g, 91);
        EXPECT_GE(d, 0);
        EXPECT_LE(d, 91);
        seen.insert(d);
        EXPECT_EQ(mask::pseudo_delta(7, 0, i, g, 0), mask::pseudo_delta(7, 0, i, g));
    }
    EXPECT_EQ(seen.size(), 92u);
    // past the horizon every interval is hidden
    EXPECT_EQ(realized_boundary(91, g).boundary, -1);
    EXPECT_THROW(mask::pseudo_delta(7, 0, 1, g, -1), DomainError);
}
