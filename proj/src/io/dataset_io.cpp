#include "skycast/io/dataset_io.hpp"

#include <cstdio>
#include <sstream>

#include "skycast/core/error.hpp"
#include "skycast/io/container.hpp"
#include "skycast/io/csv.hpp"

namespace skycast::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Descriptor traffic_descriptor(const GridSpec& g) {
    return Descriptor{{Segment{"traffic",
                               {g.fares.count(), g.intervals.count(), kChannelCount},
                               {"fare_bracket", "time_to_departure", "channel"}}}};
}

Descriptor closure_descriptor(const GridSpec& g) {
    return Descriptor{{Segment{"closure", {g.fares.count(), g.intervals.count()},
                               {"fare_bracket", "time_to_departure"}}}};
}

}  // namespace

json grids_to_json(const GridSpec& grids) {
    return json{{"fare_edges", grids.fares.edges()},
                {"interval_width_days", grids.intervals.width()},
                {"interval_count", grids.intervals.count()}};
}

GridSpec grids_from_json(const json& j) {
    return GridSpec{FareBracketGrid(j.at("fare_edges").get<std::vector<double>>()),
                    IntervalGrid(j.at("interval_width_days").get<int>(), j.at("interval_count").get<int>())};
}

json market_to_json(const synth::MarketConfig& m) {
    json holidays = json::array();
    for (const auto& h : m.holidays) holidays.push_back({{"date", format_date(h.date)}, {"multiplier", h.multiplier}});
    return json{{"market_id", m.market_id},
                {"origin_id", m.origin_id},
                {"destination_id", m.destination_id},
                {"base_daily_demand", m.base_daily_demand},
                {"dow_multipliers", m.dow_multipliers},
                {"annual_amplitude", m.annual_amplitude},
                {"holidays", holidays},
                {"local_share", m.local_share},
                {"fare_sensitivity", m.fare_sensitivity},
                {"curve_shape", {m.curve_shape.a, m.curve_shape.b}},
                {"capacity", m.capacity},
                {"recapture_prob", m.recapture_prob},
                {"base_rasm", m.base_rasm},
                {"level_persistence", m.level_persistence},
                {"level_volatility", m.level_volatility}};
}

synth::MarketConfig market_from_json(const json& j) {
    synth::MarketConfig m;
    m.market_id = j.at("market_id").get<std::string>();
    m.origin_id = j.at("origin_id").get<int>();
    m.destination_id = j.at("destination_id").get<int>();
    m.base_daily_demand = j.at("base_daily_demand").get<double>();
    m.dow_multipliers = j.at("dow_multipliers").get<std::array<double, 7>>();
    m.annual_amplitude = j.at("annual_amplitude").get<double>();
    for (const auto& h : j.at("holidays"))
        m.holidays.push_back({parse_date(h.at("date").get<std::string>()), h.at("multiplier").get<double>()});
    m.local_share = j.at("local_share").get<double>();
    m.fare_sensitivity = j.at("fare_sensitivity").get<double>();
    m.curve_shape = {j.at("curve_shape").at(0).get<double>(), j.at("curve_shape").at(1).get<double>()};
    m.capacity = j.at("capacity").get<int>();
    m.recapture_prob = j.at("recapture_prob").get<double>();
    m.base_rasm = j.at("base_rasm").get<double>();
    m.level_persistence = j.value("level_persistence", 0.0);
    m.level_volatility = j.value("level_volatility", 0.0);
    m.validate();
    return m;
}

std::string flight_key(const FlightInstance& flight) {
    return flight.market_id + "_" + format_date(flight.departure);
}

void save_dataset(const synth::Dataset& ds, const fs::path& dir) {
    fs::create_directories(dir / "tensors");

    json gen{{"format_version", 1},
             {"grids", grids_to_json(ds.grids)},
             {"first_date", format_date(ds.range.first)},
             {"last_date", format_date(ds.range.last)},
             {"seed", ds.seed},
             {"markets", json::array()}};
    for (const auto& m : ds.markets) gen["markets"].push_back(market_to_json(m));
    if (ds.shock)
        gen["shock"] = {{"shock_date_offset", ds.shock->shock_date_offset},
                        {"capacity_multiplier", ds.shock->capacity_multiplier}};
    write_text(dir / "generator.json", gen.dump(2) + "\n");

    CsvWriter flights({"market_id", "departure_date", "capacity", "holiday_flag", "rasm", "day_of_week",
                       "week_of_year", "origin_id", "destination_id", "demand_factor", "total_passengers",
                       "seed", "traffic_file", "closure_file"});
    std::ostringstream manifest;
    manifest << "# skycast dataset manifest v1\n# file seed content_hash\n";

    const std::string tdesc = traffic_descriptor(ds.grids).to_text();
    const std::string cdesc = closure_descriptor(ds.grids).to_text();
    for (const auto& f : ds.flights) {
        const std::string key = flight_key(f);
        const std::string tfile = "tensors/" + key + ".traffic.f32";
        const std::string cfile = "tensors/" + key + ".closure.f32";
        write_f32(dir / tfile, f.traffic.values());
        write_text(dir / (tfile + ".desc"), tdesc);
        write_f32(dir / cfile, f.closure.values());
        write_text(dir / (cfile + ".desc"), cdesc);

        flights.row({f.market_id, format_date(f.departure), std::to_string(f.capacity), f.holiday ? "1" : "0",
                     format_double(f.rasm), std::to_string(day_of_week(f.departure)),
                     std::to_string(week_of_year(f.departure)), std::to_string(f.origin_id),
                     std::to_string(f.destination_id), format_double(f.demand_factor),
                     format_double(f.traffic.total()), std::to_string(f.seed), tfile, cfile});
        manifest << tfile << ' ' << f.seed << ' ' << file_hash(dir / tfile) << '\n';
        manifest << cfile << ' ' << f.seed << ' ' << file_hash(dir / cfile) << '\n';
    }
    flights.save(dir / "flights.csv");
    manifest << "flights.csv - " << file_hash(dir / "flights.csv") << '\n';
    manifest << "generator.json - " << file_hash(dir / "generator.json") << '\n';
    write_text(dir / "manifest.txt", manifest.str());
}

synth::Dataset load_dataset(const fs::path& dir) {
    if (!fs::exists(dir / "generator.json") || !fs::exists(dir / "flights.csv"))
        throw InputError("not a dataset directory: " + dir.string());
    synth::Dataset ds;
    json gen;
    try {
        gen = json::parse(read_text(dir / "generator.json"));
        ds.grids = grids_from_json(gen.at("grids"));
        ds.range = {parse_date(gen.at("first_date").get<std::string>()),
                    parse_date(gen.at("last_date").get<std::string>())};
        ds.seed = gen.at("seed").get<std::uint64_t>();
        for (const auto& m : gen.at("markets")) ds.markets.push_back(market_from_json(m));
        if (gen.contains("shock"))
            ds.shock = synth::ShockConfig{gen["shock"].at("shock_date_offset").get<int>(),
                                          gen["shock"].at("capacity_multiplier").get<double>()};
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid generator.json: ") + e.what());
    }

    const int nf = ds.grids.fares.count();
    const int nd = ds.grids.intervals.count();
    CsvTable table = CsvTable::load(dir / "flights.csv");
    ds.flights.reserve(table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        FlightInstance f;
        f.market_id = table.get(r, "market_id");
        f.departure = parse_date(table.get(r, "departure_date"));
        f.capacity = std::stoi(table.get(r, "capacity"));
        f.holiday = table.get(r, "holiday_flag") == "1";
        f.rasm = std::stod(table.get(r, "rasm"));
        f.origin_id = std::stoi(table.get(r, "origin_id"));
        f.destination_id = std::stoi(table.get(r, "destination_id"));
        f.demand_factor = std::stod(table.get(r, "demand_factor"));
        f.seed = std::stoull(table.get(r, "seed"));
        f.traffic = TrafficTensor(nf, nd);
        f.closure = ClosureMatrix(nf, nd);
        auto tv = read_f32(dir / table.get(r, "traffic_file"), f.traffic.size());
        std::copy(tv.begin(), tv.end(), f.traffic.values().begin());
        auto cv = read_f32(dir / table.get(r, "closure_file"), f.closure.values().size());
        std::copy(cv.begin(), cv.end(), f.closure.values().begin());
        ds.flights.push_back(std::move(f));
    }
    return ds;
}

std::string dataset_hash(const fs::path& dir) { return file_hash(dir / "manifest.txt"); }

}  // namespace skycast::io
