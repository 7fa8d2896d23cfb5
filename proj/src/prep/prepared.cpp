#include "skycast/prep/prepared.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"
#include "skycast/io/container.hpp"
#include "skycast/io/csv.hpp"
#include "skycast/io/dataset_io.hpp"

namespace skycast::prep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPreparedFormatVersion = 1;

// Stored records are float32; rounding up front makes in-memory and on-disk
// datasets identical.
double as_stored(double v) { return static_cast<double>(static_cast<float>(v)); }

void append_stored(std::vector<double>& dst, std::span<const double> src) {
    for (double v : src) dst.push_back(as_stored(v));
}

io::Descriptor record_descriptor(const GridSpec& g, int window_size, int depth) {
    const int nf = g.fares.count();
    const int nd = g.intervals.count();
    return io::Descriptor{{
        {"window", {window_size + 1, nf, nd, kChannelCount}, {"member", "fare_bracket", "time_to_departure", "channel"}},
        {"closure", {depth, nf, nd}, {"member", "fare_bracket", "time_to_departure"}},
        {"season", {SeasonalityVector::kLength}, {"feature"}},
        {"label", {nf, nd, kChannelCount}, {"fare_bracket", "time_to_departure", "channel"}},
    }};
}

std::string record_file(std::uint64_t id) { return "records/" + std::to_string(id) + ".f32"; }

struct Fnv {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    }
    void values(std::span<const double> v) {
        for (double x : v) {
            float f = static_cast<float>(x);
            bytes(&f, sizeof f);
        }
    }
    void text(const std::string& s) { bytes(s.data(), s.size()); }
};

}  // namespace

std::uint64_t example_id(const std::string& market_id, Date departure) {
    // 53 bits so ids survive a round trip through any double-based tooling.
    return stable_hash({hash_string(market_id),
                        static_cast<std::uint64_t>(departure.time_since_epoch().count())}) >> 11;
}

std::vector<const Example*> PreparedDataset::split(mask::Split s) const {
    std::vector<const Example*> out;
    for (const auto& e : examples)
        if (e.split == s) out.push_back(&e);
    return out;
}

const Example& PreparedDataset::find(std::uint64_t id) const {
    for (const auto& e : examples)
        if (e.id == id) return e;
    throw LookupError("unknown example id " + std::to_string(id));
}

PreparedDataset prepare(const synth::Dataset& dataset, const PrepareOptions& options,
                        const std::optional<Normalizer>& fixed_normalizer) {
    if (options.window_size < 0) throw ConfigError("window size must be non-negative");
    if (dataset.flights.empty()) throw ConfigError("dataset has no flights");

    PreparedDataset out;
    out.grids = dataset.grids;
    out.options = options;

    std::vector<Date> dates;
    dates.reserve(dataset.flights.size());
    for (const auto& f : dataset.flights) dates.push_back(f.departure);
    out.plan = mask::chronological_split(dates, options.test_months, options.val_fraction);

    if (fixed_normalizer) {
        out.normalizer = *fixed_normalizer;
    } else {
        std::vector<const FlightInstance*> training;
        for (const auto& f : dataset.flights)
            if (out.plan.classify(f.departure) == mask::Split::kTrain) training.push_back(&f);
        out.normalizer = fit_normalizer(training);
    }

    FlightStore store(dataset.flights);
    for (const auto& f : dataset.flights) {
        out.totals.push_back({f.market_id, f.departure, f.traffic.total()});
        HistoricalWindow window;
        try {
            window = assemble_window(f, options.window_size, store);
        } catch (const InsufficientHistoryError& e) {
            out.skipped.push_back({f.market_id, f.departure, "insufficient-history"});
            continue;
        }
        const HistoricalWindow normalized = out.normalizer.normalize(window);

        Example ex;
        ex.id = example_id(f.market_id, f.departure);
        ex.market_id = f.market_id;
        ex.departure = f.departure;
        ex.split = out.plan.classify(f.departure);
        ex.member_dates = window.departures;
        for (const auto& t : normalized.traffic) append_stored(ex.window, t.values());
        append_stored(ex.closure, closure_volume(window, options.stack_closure).values);
        const auto feats = out.normalizer.seasonality(f).features();
        for (std::size_t i = 0; i < feats.size(); ++i) ex.season[i] = as_stored(feats[i]);
        append_stored(ex.label, normalized.target_traffic().values());
        ex.traffic_scale = out.normalizer.traffic_scale(f.market_id);
        out.examples.push_back(std::move(ex));
    }
    return out;
}

std::string prepared_hash(const PreparedDataset& p) {
    Fnv h;
    h.text(p.normalizer.to_json().dump());
    for (const auto& e : p.examples) {
        h.text(std::to_string(e.id) + mask::split_name(e.split));
        h.values(e.window);
        h.values(e.closure);
        h.values(e.season);
        h.values(e.label);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.h));
    return buf;
}

void save_prepared(const PreparedDataset& p, const fs::path& dir) {
    fs::create_directories(dir / "records");
    const io::Descriptor desc = record_descriptor(p.grids, p.options.window_size, p.closure_depth());

    json meta{{"format_version", kPreparedFormatVersion},
              {"grids", io::grids_to_json(p.grids)},
              {"window_size", p.options.window_size},
              {"test_months", p.options.test_months},
              {"val_fraction", p.options.val_fraction},
              {"stack_closure", p.options.stack_closure},
              {"plan",
               {{"first", format_date(p.plan.first)},
                {"val_start", format_date(p.plan.val_start)},
                {"test_start", format_date(p.plan.test_start)},
                {"last", format_date(p.plan.last)}}},
              {"normalizer", p.normalizer.to_json()},
              {"source_hash", p.source_hash}};
    io::write_text(dir / "prepared.json", meta.dump(2) + "\n");
    io::write_text(dir / "record.desc", desc.to_text());

    io::CsvWriter split({"example_id", "market_id", "departure_date", "split", "reference_date", "traffic_scale"});
    split.comment("split manifest v1");
    for (const auto& e : p.examples) {
        std::vector<double> rec;
        rec.reserve(desc.elements());
        rec.insert(rec.end(), e.window.begin(), e.window.end());
        rec.insert(rec.end(), e.closure.begin(), e.closure.end());
        rec.insert(rec.end(), e.season.begin(), e.season.end());
        rec.insert(rec.end(), e.label.begin(), e.label.end());
        io::write_f32(dir / record_file(e.id), rec);
        const std::string ref = e.split == mask::Split::kTrain ? "epoch" : format_date(p.plan.reference_date(e.split));
        split.row({std::to_string(e.id), e.market_id, format_date(e.departure), mask::split_name(e.split), ref,
                   io::format_double(e.traffic_scale)});
    }
    split.save(dir / "split_manifest.csv");

    io::CsvWriter totals({"market_id", "departure_date", "total_passengers"});
    for (const auto& t : p.totals) totals.row({t.market_id, format_date(t.departure), io::format_double(t.passengers)});
    totals.save(dir / "totals.csv");

    io::CsvWriter skipped({"market_id", "departure_date", "reason"});
    for (const auto& s : p.skipped) skipped.row({s.market_id, format_date(s.departure), s.reason});
    skipped.save(dir / "skip_report.csv");

    std::ostringstream manifest;
    manifest << "# skycast prepared manifest v1\n"
             << "content_hash " << prepared_hash(p) << '\n'
             << "source_hash " << p.source_hash << '\n';
    for (const char* f : {"prepared.json", "record.desc", "split_manifest.csv", "totals.csv", "skip_report.csv"})
        manifest << f << ' ' << io::file_hash(dir / f) << '\n';
    io::write_text(dir / "manifest.txt", manifest.str());
}

PreparedDataset load_prepared(const fs::path& dir) {
    if (!fs::exists(dir / "prepared.json")) throw InputError("not a prepared dataset: " + dir.string());
    PreparedDataset p;
    try {
        const json meta = json::parse(io::read_text(dir / "prepared.json"));
        if (meta.at("format_version").get<int>() > kPreparedFormatVersion)
            throw InputError("prepared dataset format is newer than this build");
        p.grids = io::grids_from_json(meta.at("grids"));
        p.options.window_size = meta.at("window_size").get<int>();
        p.options.test_months = meta.at("test_months").get<int>();
        p.options.val_fraction = meta.at("val_fraction").get<double>();
        p.options.stack_closure = meta.at("stack_closure").get<bool>();
        const auto& plan = meta.at("plan");
        p.plan = {parse_date(plan.at("first").get<std::string>()), parse_date(plan.at("val_start").get<std::string>()),
                  parse_date(plan.at("test_start").get<std::string>()), parse_date(plan.at("last").get<std::string>())};
        p.normalizer = Normalizer::from_json(meta.at("normalizer"));
        p.source_hash = meta.value("source_hash", "");
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid prepared.json: ") + e.what());
    }

    const io::Descriptor desc = io::Descriptor::parse(io::read_text(dir / "record.desc"));
    const io::Descriptor expected = record_descriptor(p.grids, p.options.window_size, p.closure_depth());
    if (desc.elements() != expected.elements()) throw InputError("record descriptor does not match prepared.json");

    const int n = p.options.window_size;
    const io::CsvTable split = io::CsvTable::load(dir / "split_manifest.csv");
    for (std::size_t r = 0; r < split.rows(); ++r) {
        Example e;
        e.id = std::stoull(split.get(r, "example_id"));
        e.market_id = split.get(r, "market_id");
        e.departure = parse_date(split.get(r, "departure_date"));
        e.split = mask::parse_split(split.get(r, "split"));
        e.traffic_scale = std::stod(split.get(r, "traffic_scale"));
        for (int m = n; m >= 0; --m) e.member_dates.push_back(add_days(e.departure, -7 * m));
        const auto rec = io::read_f32(dir / record_file(e.id), desc.elements());
        auto it = rec.begin();
        const auto take = [&](std::vector<double>& dst, std::size_t count) {
            dst.assign(it, it + static_cast<std::ptrdiff_t>(count));
            it += static_cast<std::ptrdiff_t>(count);
        };
        take(e.window, expected.segments[0].elements());
        take(e.closure, expected.segments[1].elements());
        std::copy(it, it + SeasonalityVector::kLength, e.season.begin());
        it += SeasonalityVector::kLength;
        take(e.label, expected.segments[3].elements());
        p.examples.push_back(std::move(e));
    }

    const io::CsvTable totals = io::CsvTable::load(dir / "totals.csv");
    for (std::size_t r = 0; r < totals.rows(); ++r)
        p.totals.push_back({totals.get(r, "market_id"), parse_date(totals.get(r, "departure_date")),
                            std::stod(totals.get(r, "total_passengers"))});
    const io::CsvTable skipped = io::CsvTable::load(dir / "skip_report.csv");
    for (std::size_t r = 0; r < skipped.rows(); ++r)
        p.skipped.push_back({skipped.get(r, "market_id"), parse_date(skipped.get(r, "departure_date")),
                             skipped.get(r, "reason")});
    return p;
}

}  // namespace skycast::prep
