// skycast: command-line driver for the forecasting pipeline.
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skycast/config/run_config.hpp"
#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"
#include "skycast/io/csv.hpp"
#include "skycast/io/dataset_io.hpp"
#include "skycast/prep/prepared.hpp"
#include "skycast/synth/generator.hpp"
#include "skycast/train/analysis.hpp"
#include "skycast/train/checkpoint.hpp"
#include "skycast/train/evaluate.hpp"
#include "skycast/train/trainer.hpp"
#include "svg_plot.hpp"

#ifndef SKYCAST_VERSION
#define SKYCAST_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace skycast;
using io::format_double;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr const char* kCsvSchema = "skycast-csv/1";

struct Run {
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool plot = false;
    int jobs = 1;

    config::RunConfig cfg;
    fs::path out_dir;
    nlohmann::json inputs = nlohmann::json::object();
    nlohmann::json outputs = nlohmann::json::array();
    nlohmann::json extra = nlohmann::json::object();
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

// Config file, then SKYCAST_SEED, then --seed.
void resolve_config(Run& run) {
    run.cfg = run.config_path.empty() ? config::RunConfig{} : config::load_config(run.config_path);
    std::string seed_source = "config";
    if (auto env = config::env_seed()) {
        run.cfg.set_seed(*env);
        seed_source = "SKYCAST_SEED";
    }
    if (run.seed) {
        run.cfg.set_seed(*run.seed);
        seed_source = "--seed";
    }
    if (!run.out.empty()) run.cfg.output_dir = run.out;
    run.cfg.validate();
    run.out_dir = run.cfg.output_dir;
    run.extra["seed_source"] = seed_source;
    fs::create_directories(run.out_dir);
}

fs::path output(Run& run, const std::string& name) {
    run.outputs.push_back(name);
    return run.out_dir / name;
}

// Comment lines shared by every CSV report.
void stamp(io::CsvWriter& csv, const Run& run, const std::string& data_hash) {
    csv.comment("schema " + std::string(kCsvSchema));
    csv.comment("skycast " + std::string(SKYCAST_VERSION));
    csv.comment("data_hash " + data_hash);
    std::istringstream echo(run.cfg.echo(false));
    for (std::string line; std::getline(echo, line);)
        if (!line.empty()) csv.comment("config " + line);
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << hash_string(ss.str());
    return hex.str();
}

void write_metadata(const Run& run, const std::string& status, const std::string& error = {}) {
    if (run.out_dir.empty()) return;
    nlohmann::json meta;
    meta["command"] = run.command;
    meta["status"] = status;
    if (!error.empty()) meta["error"] = error;
    meta["version"] = SKYCAST_VERSION;
    meta["config"] = run.cfg.echo();
    meta["seeds"] = {{"generator", run.cfg.generator.seed},
                     {"init", run.cfg.train.hyperparams.seed},
                     {"mask", run.cfg.train.base_seed},
                     {"search", run.cfg.sweep.search_seed}};
    meta["inputs"] = run.inputs;
    meta["outputs"] = run.outputs;
    meta["jobs"] = run.jobs;
    for (const auto& [k, v] : run.extra.items()) meta[k] = v;
    meta["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - run.started).count();
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    std::ofstream out(run.out_dir / ("run_metadata." + run.command + ".json"));
    out << meta.dump(2) << "\n";
}

train::TrialRunner thread_runner(int jobs) {
    if (jobs <= 1) return train::run_sequential;
    return [jobs](std::size_t count, const std::function<void(std::size_t)>& body) {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex lock;
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < count;) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> g(lock);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    };
}

prep::PreparedDataset open_prepared(Run& run, const std::string& dir) {
    auto p = prep::load_prepared(dir);
    run.inputs["prepared"] = {{"path", dir}, {"hash", prep::prepared_hash(p)}};
    return p;
}

train::Checkpoint open_checkpoint(Run& run, const std::string& path) {
    auto ck = train::load_checkpoint(path);
    run.inputs["checkpoints"].push_back({{"path", path}, {"hash", file_hash(path)}});
    return ck;
}

std::vector<int> parse_values(const std::string& text) {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty range '" + text + "'");
        std::vector<int> out;
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::vector<int> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoi(item));
    if (out.empty()) throw ConfigError("no values given");
    return out;
}

// ---- commands ---------------------------------------------------------------

struct GenerateArgs {
    bool shock = false;
};

void cmd_generate(Run& run, const GenerateArgs& a) {
    const auto& c = run.cfg;
    std::optional<synth::ShockConfig> shock;
    if (a.shock) shock = c.shock();
    const auto ds = synth::generate_dataset(c.markets(), c.date_range(), synth::StaircaseClosurePolicy{}, shock,
                                            c.generator.seed, c.grid_spec());
    io::save_dataset(ds, run.out_dir);
    run.outputs.push_back("generator.json");
    run.outputs.push_back("flights.csv");
    run.outputs.push_back("manifest.txt");
    run.extra["dataset_hash"] = io::dataset_hash(run.out_dir);
    run.extra["flights"] = ds.flights.size();
}

struct PrepareArgs {
    std::string dataset;
};

void cmd_prepare(Run& run, const PrepareArgs& a) {
    const auto ds = io::load_dataset(a.dataset);
    run.inputs["dataset"] = {{"path", a.dataset}, {"hash", io::dataset_hash(a.dataset)}};
    const auto p = prep::prepare(ds, run.cfg.prepare);
    prep::save_prepared(p, run.out_dir);
    run.outputs.push_back("prepared.json");
    run.extra["prepared_hash"] = prep::prepared_hash(p);

    run.outputs.push_back("split_manifest.csv");
    run.outputs.push_back("skip_report.csv");
}

struct TrainArgs {
    std::string prepared;
    std::string variant;
};

void cmd_train(Run& run, const TrainArgs& a) {
    const auto p = open_prepared(run, a.prepared);
    train::TrainConfig tc = run.cfg.train;
    if (!a.variant.empty()) tc.variant = nn::parse_variant(a.variant);
    run.extra["variant"] = nn::variant_name(tc.variant);
    const auto result = train::train(tc, p, [](const train::EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << " train_loss " << e.train_loss << " val_mse " << e.val_mse << "\n";
    });
    train::save_checkpoint(result.checkpoint, output(run, "checkpoint.json"));
    run.extra["best_epoch"] = result.checkpoint.best_epoch;

    io::CsvWriter history({"epoch", "train_loss", "val_tensor_mse", "best"});
    stamp(history, run, prep::prepared_hash(p));
    for (const auto& e : result.history)
        history.row({std::to_string(e.epoch), format_double(e.train_loss), format_double(e.val_mse),
                     e.epoch == result.checkpoint.best_epoch ? "1" : "0"});
    history.save(output(run, "history.csv"));
    if (run.plot) {
        tools::PlotSeries tr{"train loss", {}, {}}, va{"val tensor MSE", {}, {}};
        for (const auto& e : result.history) {
            tr.x.push_back(e.epoch);
            tr.y.push_back(e.train_loss);
            va.x.push_back(e.epoch);
            va.y.push_back(e.val_mse);
        }
        tools::write_line_plot(output(run, "history.svg"), "Training history", "epoch", "MSE", {tr, va});
    }
}

struct EvaluateArgs {
    std::string prepared;
    std::vector<std::string> checkpoints;
    bool no_baselines = false;
    std::string reference;
};

void cmd_evaluate(Run& run, const EvaluateArgs& a) {
    const auto p = open_prepared(run, a.prepared);
    const std::string hash = prep::prepared_hash(p);
    std::vector<train::ModelReport> reports;
    for (const auto& path : a.checkpoints) reports.push_back(train::evaluate(open_checkpoint(run, path), p));
    if (!a.no_baselines)
        for (auto b : {train::Baseline::kArima, train::Baseline::kSarima, train::Baseline::kSeasonalNaive,
                       train::Baseline::kNaive})
            reports.push_back(train::evaluate_baseline(b, p, run.cfg.baselines));
    if (reports.empty()) throw ConfigError("nothing to evaluate: pass --checkpoint or keep the baselines");

    std::vector<std::pair<std::string, double>> entries;
    for (const auto& r : reports) {
        for (const auto& [name, _] : entries)
            if (name == r.model) throw ConfigError("two evaluated models share the label " + r.model);
        entries.emplace_back(r.model, r.test.totals_mse);
    }
    std::string reference = a.reference.empty() ? run.cfg.reference_model : a.reference;
    if (reference == "auto") {
        // ConvLSTM when present, else the first row in table order.
        const bool has_flat = std::any_of(entries.begin(), entries.end(), [](auto& e) { return e.first == "ConvLSTM"; });
        reference = has_flat ? "ConvLSTM" : train::mse_table(entries, entries.front().first).front().model;
    }
    const auto table = train::mse_table(entries, reference);
    run.extra["reference"] = reference;

    io::CsvWriter csv({"model", "test_totals_mse", "improvement_percent"});
    stamp(csv, run, hash);
    csv.comment("improvement_percent = (mse[" + reference + "] - mse) / mse[" + reference + "] * 100");
    for (const auto& row : table) csv.row({row.model, format_double(row.mse), format_double(row.improvement)});
    csv.save(output(run, "mse_table.csv"));

    io::CsvWriter metrics({"model", "val_tensor_mse", "val_totals_mse", "test_tensor_mse", "test_totals_mse",
                           "val_flights", "test_flights"});
    stamp(metrics, run, hash);
    for (const auto& r : reports)
        metrics.row({r.model, format_double(r.val.tensor_mse), format_double(r.val.totals_mse),
                     format_double(r.test.tensor_mse), format_double(r.test.totals_mse),
                     std::to_string(r.val.flights), std::to_string(r.test.flights)});
    metrics.save(output(run, "metrics.csv"));

    if (run.plot) {
        std::vector<std::string> labels;
        std::vector<double> values;
        for (const auto& row : table) {
            labels.push_back(row.model);
            values.push_back(row.mse);
        }
        tools::write_bar_plot(output(run, "mse_table.svg"), "Test totals MSE", labels, values);
    }
}

struct TrendArgs {
    std::string prepared;
    std::string checkpoint;
};

void cmd_trend(Run& run, const TrendArgs& a) {
    const auto p = open_prepared(run, a.prepared);
    const auto r = train::trend_analysis(open_checkpoint(run, a.checkpoint), p, run.cfg.trend_horizon);
    if (!r.warning.empty()) {
        std::cerr << "warning: " << r.warning << "\n";
        run.extra["warning"] = r.warning;
    }
    io::CsvWriter csv({"offset", "departure", "abs_total_error_passengers", "flights"});
    stamp(csv, run, prep::prepared_hash(p));
    csv.comment("abs_total_error_passengers = mean over markets of |predicted total - observed total|");
    for (const auto& d : r.series)
        csv.row({std::to_string(d.offset), format_date(d.date), format_double(d.value), std::to_string(d.flights)});
    csv.save(output(run, "trend.csv"));
    if (run.plot) {
        tools::PlotSeries s{"|predicted - observed|", {}, {}};
        for (const auto& d : r.series) {
            s.x.push_back(d.offset);
            s.y.push_back(d.value);
        }
        tools::write_line_plot(output(run, "trend.svg"), "Absolute total error by departure offset",
                               "days after test start", "passengers", {s});
    }
}

struct SweepArgs {
    std::string prepared;
    std::string param;
    std::string values;
    int random_budget = 0;
};

void cmd_sweep(Run& run, const SweepArgs& a) {
    const auto p = open_prepared(run, a.prepared);
    const std::string hash = prep::prepared_hash(p);
    const auto runner = thread_runner(run.jobs);
    if (a.random_budget > 0) {
        const auto trials = train::random_search(train::SearchSpace{}, a.random_budget, run.cfg.sweep.search_seed,
                                                 run.cfg.train, p, runner);
        io::CsvWriter csv({"rank", "trial", "val_tensor_mse", "channels", "deep_layers", "decoder_layers",
                           "temporal_kernel", "closure_kernel", "decoder_kernel", "learning_rate", "window_size"});
        stamp(csv, run, hash);
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto& t = trials[i];
            const auto& h = t.hyperparams;
            csv.row({std::to_string(i + 1), std::to_string(t.index), format_double(t.val_mse),
                     std::to_string(h.temporal_channels), std::to_string(h.deep_layers),
                     std::to_string(h.decoder_layers), std::to_string(h.temporal_kernel),
                     std::to_string(h.closure_kernel), std::to_string(h.decoder_kernel),
                     format_double(h.learning_rate), std::to_string(h.window_size)});
        }
        csv.save(output(run, "search.csv"));
        return;
    }
    if (a.param != "window_size") throw ConfigError("only --param window_size can be swept");
    const auto values = a.values.empty() ? run.cfg.sweep.windows : parse_values(a.values);
    const auto points = train::window_sweep(values, run.cfg.train, p, runner);
    io::CsvWriter csv({"window_size", "status", "val_tensor_mse", "test_tensor_mse"});
    stamp(csv, run, hash);
    tools::PlotSeries s{"validation MSE", {}, {}};
    for (const auto& pt : points) {
        if (pt.skipped) {
            csv.row({std::to_string(pt.window_size), pt.reason, "", ""});
            continue;
        }
        csv.row({std::to_string(pt.window_size), "ok", format_double(pt.val_mse), format_double(pt.test_mse)});
        s.x.push_back(pt.window_size);
        s.y.push_back(pt.val_mse);
    }
    csv.save(output(run, "sweep.csv"));
    if (run.plot)
        tools::write_line_plot(output(run, "sweep.svg"), "Validation loss by window size", "window size n",
                               "validation MSE", {s});
}

struct SensitivityArgs {
    std::string checkpoint;
    std::optional<int> shock_day;
    std::optional<double> shock_mult;
};

void cmd_sensitivity(Run& run, const SensitivityArgs& a) {
    auto& c = run.cfg;
    if (a.shock_day) c.sensitivity.shock_day = *a.shock_day;
    if (a.shock_mult) c.sensitivity.shock_multiplier = *a.shock_mult;
    c.validate();
    const auto ck = open_checkpoint(run, a.checkpoint);
    const auto shock = c.shock();
    const auto ds = synth::generate_dataset(c.markets(), c.date_range(), synth::StaircaseClosurePolicy{}, shock,
                                            c.generator.seed, c.grid_spec());
    const auto r = train::sensitivity_run(ck, shock, ds, {c.sensitivity.horizon_days, c.sensitivity.lead_days});
    if (!r.warning.empty()) {
        std::cerr << "warning: " << r.warning << "\n";
        run.extra["warning"] = r.warning;
    }
    run.extra["shock_date"] = format_date(r.shock_date);

    io::CsvWriter csv({"offset", "departure", "model_differential", "seasonal_naive_differential", "observed_mean",
                       "flights"});
    stamp(csv, run, ck.prepared_hash);
    csv.comment("differential = observed total - predicted total, passengers, mean over markets");
    csv.comment("shock_date " + format_date(r.shock_date) + " multiplier " + format_double(shock.capacity_multiplier));
    for (std::size_t i = 0; i < r.model.size(); ++i)
        csv.row({std::to_string(r.model[i].offset), format_date(r.model[i].date), format_double(r.model[i].value),
                 format_double(r.seasonal_naive[i].value), format_double(r.observed[i].value),
                 std::to_string(r.model[i].flights)});
    csv.save(output(run, "sensitivity.csv"));
    if (run.plot) {
        tools::PlotSeries m{"model", {}, {}}, n{"seasonal naive", {}, {}};
        for (std::size_t i = 0; i < r.model.size(); ++i) {
            m.x.push_back(r.model[i].offset);
            m.y.push_back(r.model[i].value);
            n.x.push_back(r.seasonal_naive[i].offset);
            n.y.push_back(r.seasonal_naive[i].value);
        }
        tools::write_line_plot(output(run, "sensitivity.svg"), "Observed minus predicted total",
                               "days after test start", "passengers", {m, n});
    }
}

struct WhatIfArgs {
    std::string checkpoint;
    std::string prepared;
    std::string flight;
    std::string closure_file;
    std::string reference;
};

const prep::Example& find_flight(const prep::PreparedDataset& p, const std::string& key) {
    const auto at = key.find('@');
    if (at == std::string::npos) {
        std::uint64_t id = 0;
        try {
            std::size_t used = 0;
            id = std::stoull(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ConfigError("--flight takes an example id or MARKET@YYYY-MM-DD, got '" + key + "'");
        }
        return p.find(id);
    }
    return p.find(prep::example_id(key.substr(0, at), parse_date(key.substr(at + 1))));
}

ClosureMatrix read_closure(const fs::path& path, int fares, int intervals) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read closure file " + path.string());
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InputError("closure file has a non-numeric entry '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() != static_cast<std::size_t>(fares))
        throw ShapeError("closure file has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(fares));
    ClosureMatrix m(fares, intervals);
    for (int i = 0; i < fares; ++i) {
        if (rows[i].size() != static_cast<std::size_t>(intervals))
            throw ShapeError("closure row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                             " entries, expected " + std::to_string(intervals));
        for (int j = 0; j < intervals; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

void cmd_whatif(Run& run, const WhatIfArgs& a) {
    const auto p = open_prepared(run, a.prepared);
    const auto ck = open_checkpoint(run, a.checkpoint);
    const auto& e = find_flight(p, a.flight);
    Date reference;
    if (!a.reference.empty()) reference = parse_date(a.reference);
    else if (e.split == mask::Split::kTest) reference = p.plan.test_start;
    else if (e.split == mask::Split::kVal) reference = p.plan.val_start;
    else reference = add_days(e.departure, -run.cfg.sensitivity.lead_days);

    ClosureMatrix alternative;
    if (a.closure_file == "close-future") {
        alternative = train::close_future_intervals(e, reference, ck.grids);
    } else {
        run.inputs["closure_file"] = {{"path", a.closure_file}, {"hash", file_hash(a.closure_file)}};
        alternative = read_closure(a.closure_file, ck.layout.fares, ck.layout.intervals);
    }
    const auto r = train::whatif(ck, e, reference, alternative);
    run.extra["flight"] = {{"id", e.id}, {"market", e.market_id}, {"departure", format_date(e.departure)},
                           {"reference", format_date(reference)}};

    io::CsvWriter csv({"fare", "interval", "channel", "baseline", "scenario", "delta"});
    stamp(csv, run, prep::prepared_hash(p));
    csv.comment("flight " + e.market_id + "@" + format_date(e.departure) + " reference " + format_date(reference));
    csv.comment("totals baseline " + format_double(r.baseline_total) + " scenario " +
                format_double(r.scenario_total) + " delta " + format_double(r.total_delta));
    for (int i = 0; i < r.baseline.fares(); ++i)
        for (int j = 0; j < r.baseline.intervals(); ++j)
            for (int k = 0; k < 2; ++k)
                csv.row({std::to_string(i), std::to_string(j), k == 0 ? "local" : "flow",
                         format_double(r.baseline.at(i, j, k)), format_double(r.scenario.at(i, j, k)),
                         format_double(r.delta.at(i, j, k))});
    csv.save(output(run, "whatif.csv"));

    io::CsvWriter totals({"baseline_total", "scenario_total", "total_delta"});
    stamp(totals, run, prep::prepared_hash(p));
    totals.row({format_double(r.baseline_total), format_double(r.scenario_total), format_double(r.total_delta)});
    totals.save(output(run, "whatif_totals.csv"));
}

const char* exit_category(int code) {
    switch (code) {
        case kExitConfig: return "configuration";
        case kExitInput: return "missing/invalid input";
        default: return "runtime failure";
    }
}

int exit_code(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::kConfig: return kExitConfig;
        case ErrorCategory::kInput:
        case ErrorCategory::kLookup: return kExitInput;
        default: return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skycast: flight-level passenger traffic forecasting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SKYCAST_VERSION);
    Run run;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", run.config_path, "run configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", run.seed, "global seed; overrides SKYCAST_SEED and the config");
        sub->add_option("--out", run.out, "output directory (default: output.dir from the config)");
        sub->add_flag("--plot", run.plot, "also render SVG plots");
        sub->add_option("--jobs", run.jobs, "worker threads for sweep trials")->check(CLI::PositiveNumber);
    };

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "simulate a synthetic dataset");
    common(g);
    g->add_flag("--shock", gen.shock, "apply the capacity shock from the [sensitivity] section");

    PrepareArgs prep_args;
    auto* pr = app.add_subcommand("prepare", "build windows, splits and the normalizer");
    common(pr);
    pr->add_option("--dataset", prep_args.dataset, "dataset directory")->required();

    TrainArgs tr_args;
    auto* t = app.add_subcommand("train", "train one model variant");
    common(t);
    t->add_option("--prepared", tr_args.prepared, "prepared dataset directory")->required();
    t->add_option("--variant", tr_args.variant, "CNN_BASELINE, CONVLSTM_FLAT, CONVLSTM_SPATIAL, ...");

    EvaluateArgs ev_args;
    auto* ev = app.add_subcommand("evaluate", "score checkpoints and baselines, emit the MSE table");
    common(ev);
    ev->add_option("--prepared", ev_args.prepared, "prepared dataset directory")->required();
    ev->add_option("--checkpoint", ev_args.checkpoints, "checkpoint file; repeatable");
    ev->add_flag("--no-baselines", ev_args.no_baselines, "skip the statistical baselines");
    ev->add_option("--reference", ev_args.reference, "table row used for the improvement column");

    TrendArgs tr2;
    auto* tn = app.add_subcommand("trend", "absolute total error by departure offset over the test span");
    common(tn);
    tn->add_option("--prepared", tr2.prepared, "prepared dataset directory")->required();
    tn->add_option("--checkpoint", tr2.checkpoint, "checkpoint file")->required();

    SweepArgs sw_args;
    auto* sw = app.add_subcommand("sweep", "window-size sweep or random hyperparameter search");
    common(sw);
    sw->add_option("--prepared", sw_args.prepared, "prepared dataset directory")->required();
    auto* param = sw->add_option("--param", sw_args.param, "swept parameter")->default_val("window_size");
    auto* values = sw->add_option("--values", sw_args.values, "list (1,3,5) or range (1..10)");
    auto* budget = sw->add_option("--random-budget", sw_args.random_budget, "random search trials")
                       ->check(CLI::PositiveNumber);
    budget->excludes(values);
    budget->excludes(param);

    SensitivityArgs se_args;
    auto* se = app.add_subcommand("sensitivity", "run a frozen model over capacity-shocked data");
    common(se);
    se->add_option("--checkpoint", se_args.checkpoint, "checkpoint file")->required();
    se->add_option("--shock-day", se_args.shock_day, "shock offset in days from the test start");
    se->add_option("--shock-mult", se_args.shock_mult, "capacity multiplier");

    WhatIfArgs wi_args;
    auto* wi = app.add_subcommand("whatif", "compare predictions under an alternative fare closure");
    common(wi);
    wi->add_option("--checkpoint", wi_args.checkpoint, "checkpoint file")->required();
    wi->add_option("--prepared", wi_args.prepared, "prepared dataset directory")->required();
    wi->add_option("--flight", wi_args.flight, "example id or MARKET@YYYY-MM-DD")->required();
    wi->add_option("--closure-file", wi_args.closure_file,
                   "F rows of D comma-separated closed fractions, or close-future")
        ->required();
    wi->add_option("--reference", wi_args.reference, "as-of date (default: the flight's split start)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    run.command = app.get_subcommands().front()->get_name();

    try {
        resolve_config(run);
        if (run.command == "generate") cmd_generate(run, gen);
        else if (run.command == "prepare") cmd_prepare(run, prep_args);
        else if (run.command == "train") cmd_train(run, tr_args);
        else if (run.command == "evaluate") cmd_evaluate(run, ev_args);
        else if (run.command == "trend") cmd_trend(run, tr2);
        else if (run.command == "sweep") cmd_sweep(run, sw_args);
        else if (run.command == "sensitivity") cmd_sensitivity(run, se_args);
        else if (run.command == "whatif") cmd_whatif(run, wi_args);
        write_metadata(run, "ok");
        return 0;
    } catch (const Error& e) {
        const int code = exit_code(e);
        nlohmann::json err{{"error", {{"category", exit_category(code)},
                                      {"kind", category_name(e.category())},
                                      {"message", e.what()}}}};
        if (const auto* fit = dynamic_cast<const FitError*>(&e)) err["error"]["diagnostics"] = fit->diagnostics();
        std::cerr << err.dump() << "\n";
        write_metadata(run, "failed", e.what());
        return code;
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", {{"category", exit_category(kExitRuntime)}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        write_metadata(run, "failed", e.what());
        return kExitRuntime;
    }
}
