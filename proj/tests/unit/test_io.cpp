#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "skycast/core/error.hpp"
#include "skycast/io/container.hpp"
#include "skycast/io/csv.hpp"
#include "skycast/io/dataset_io.hpp"
#include "skycast/prep/prepared.hpp"

using namespace skycast;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("skycast_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

synth::Dataset tiny_dataset() {
    const synth::DateRange range{make_date(2022, 1, 1), make_date(2022, 6, 30)};
    auto markets = synth::default_markets(range);
    markets.resize(1);
    return synth::generate_dataset(markets, range, synth::StaircaseClosurePolicy{}, std::nullopt, 13);
}

}  // namespace

TEST(Container, F32RoundTripAndSizeCheck) {
    const auto dir = scratch("f32");
    const std::vector<double> v{0.0, 1.5, -1.0, 3.25};
    io::write_f32(dir / "a.f32", v);
    EXPECT_EQ(io::read_f32(dir / "a.f32", 4), v);
    EXPECT_THROW(io::read_f32(dir / "a.f32", 5), InputError);
    EXPECT_THROW(io::read_f32(dir / "missing.f32", 1), InputError);
}

TEST(Container, DescriptorRoundTrip) {
    io::Descriptor d{{{"window", {6, 10, 12, 2}, {"member", "fare_bracket", "time_to_departure", "channel"}},
                      {"season", {14}, {"feature"}}}};
    const auto back = io::Descriptor::parse(d.to_text());
    ASSERT_EQ(back.segments.size(), 2u);
    EXPECT_EQ(back.segments[0].shape, d.segments[0].shape);
    EXPECT_EQ(back.segments[1].axes, d.segments[1].axes);
    EXPECT_EQ(back.elements(), 6u * 10 * 12 * 2 + 14);
    EXPECT_THROW(io::Descriptor::parse("garbage\n"), InputError);
}

TEST(Csv, WriterAndParserAgree) {
    io::CsvWriter w({"a", "b"});
    w.comment("note");
    w.row({"1", io::format_double(0.1)});
    const auto t = io::CsvTable::parse(w.str());
    ASSERT_EQ(t.rows(), 1u);
    EXPECT_EQ(std::stod(t.get(0, "b")), 0.1);
    EXPECT_EQ(io::format_fixed(32.3256, 2), "32.33");
}

TEST(DatasetIo, SaveLoadRoundTrip) {
    const auto ds = tiny_dataset();
    const auto dir = scratch("dataset");
    io::save_dataset(ds, dir);
    const auto back = io::load_dataset(dir);
    ASSERT_EQ(back.flights.size(), ds.flights.size());
    for (std::size_t f = 0; f < ds.flights.size(); ++f) {
        EXPECT_TRUE(back.flights[f].traffic == ds.flights[f].traffic);
        for (std::size_t i = 0; i < ds.flights[f].closure.values().size(); ++i)
            EXPECT_NEAR(back.flights[f].closure.values()[i], ds.flights[f].closure.values()[i], 1e-6);
    }
    EXPECT_EQ(back.seed, ds.seed);
    const auto dir2 = scratch("dataset2");
    io::save_dataset(ds, dir2);
    EXPECT_EQ(io::dataset_hash(dir), io::dataset_hash(dir2));
}

TEST(DatasetIo, CorruptInputRejected) {
    const auto dir = scratch("corrupt");
    EXPECT_THROW(io::load_dataset(dir), InputError);
    io::save_dataset(tiny_dataset(), dir);
    std::ofstream(dir / "generator.json") << "{ not json";
    EXPECT_THROW(io::load_dataset(dir), InputError);
}

TEST(PreparedIo, SaveLoadPreservesHash) {
    const auto p = prep::prepare(tiny_dataset(), {});
    const auto dir = scratch("prepared");
    prep::save_prepared(p, dir);
    const auto back = prep::load_prepared(dir);
    EXPECT_EQ(prep::prepared_hash(back), prep::prepared_hash(p));
    EXPECT_EQ(back.examples.size(), p.examples.size());
    EXPECT_EQ(back.plan.test_start, p.plan.test_start);
    EXPECT_THROW(prep::load_prepared(scratch("empty")), InputError);
}
