#include "skycast/train/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"
#include "skycast/nn/autograd.hpp"
#include "skycast/train/batch.hpp"
#include "skycast/train/evaluate.hpp"

namespace skycast::train {

namespace {

// Mean across markets per departure offset; `values` is parallel to `examples`.
std::vector<DayPoint> per_day(std::span<const prep::Example* const> examples, std::span<const double> values,
                              Date origin, int length) {
    std::vector<DayPoint> out(static_cast<std::size_t>(length));
    for (int d = 0; d < length; ++d) out[static_cast<std::size_t>(d)] = {d, add_days(origin, d), 0.0, 0};
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const int d = days_between(examples[i]->departure, origin);
        if (d < 0 || d >= length) continue;
        auto& p = out[static_cast<std::size_t>(d)];
        p.value += values[i];
        ++p.flights;
    }
    for (auto& p : out)
        if (p.flights > 0) p.value /= p.flights;
    return out;
}

int analysis_length(const mask::SplitPlan& plan, int horizon, std::string& warning) {
    if (horizon <= 0) throw ConfigError("analysis horizon must be positive");
    const int span = days_between(plan.last, plan.test_start) + 1;
    if (span < horizon)
        warning = "test span is " + std::to_string(span) + " days, shorter than the requested horizon of " +
                  std::to_string(horizon) + "; series truncated";
    return std::min(span, horizon);
}

double passengers(const prep::PreparedDataset& p, const prep::Example& e, double normalized) {
    return normalized * p.normalizer.traffic_scale(e.market_id);
}

std::uint64_t draw(std::uint64_t seed, int trial, std::uint64_t field) {
    return stable_hash({seed, static_cast<std::uint64_t>(trial), field, 0x5ea7c4ULL});
}

int draw_int(std::uint64_t seed, int trial, std::uint64_t field, Range<int> r) {
    return r.lo + static_cast<int>(hash_to_range(draw(seed, trial, field), static_cast<std::uint64_t>(r.hi - r.lo + 1)));
}

double draw_unit(std::uint64_t seed, int trial, std::uint64_t field) {
    return static_cast<double>(draw(seed, trial, field) >> 11) * 0x1.0p-53;
}

}  // namespace

TrendResult trend_analysis(const Checkpoint& ck, const prep::PreparedDataset& prepared, int horizon_days) {
    TrendResult r;
    const int length = analysis_length(prepared.plan, horizon_days, r.warning);
    const auto preds = predict_split(ck, prepared, mask::Split::kTest);
    std::vector<const prep::Example*> examples;
    std::vector<double> errors;
    for (const auto& p : preds) {
        examples.push_back(p.example);
        errors.push_back(passengers(prepared, *p.example, std::abs(p.predicted_total - p.observed_total)));
    }
    r.series = per_day(examples, errors, prepared.plan.test_start, length);
    return r;
}

SensitivityResult sensitivity_run(const Checkpoint& ck, const synth::ShockConfig& shock, const synth::Dataset& data,
                                  const SensitivityOptions& options) {
    shock.validate();
    if (!data.shock || data.shock->shock_date_offset != shock.shock_date_offset ||
        data.shock->capacity_multiplier != shock.capacity_multiplier)
        throw ConfigError("dataset was not generated with the requested shock");
    if (options.lead_days < 0) throw ConfigError("forecast lead must be non-negative");

    prep::PrepareOptions popt;
    popt.window_size = ck.layout.window_size;
    popt.stack_closure = ck.stack_closure;
    const prep::PreparedDataset prepared = prep::prepare(data, popt, ck.normalizer);

    SensitivityResult r;
    r.test_start = prepared.plan.test_start;
    r.shock_offset = shock.shock_date_offset;
    r.shock_date = add_days(r.test_start, shock.shock_date_offset);
    const int length = analysis_length(prepared.plan, options.horizon_days, r.warning);
    if (shock.shock_date_offset >= days_between(prepared.plan.last, prepared.plan.test_start) + 1)
        throw ConfigError("shock offset " + std::to_string(shock.shock_date_offset) + " lies beyond the test span");

    const auto examples = prepared.split(mask::Split::kTest);
    std::vector<Date> refs;
    for (const auto* e : examples)
        refs.push_back(options.lead_days > 0 ? add_days(e->departure, -options.lead_days) : r.test_start);
    nn::Model model = instantiate(ck);
    const auto preds = predict(model, ck.layout, examples, refs, prepared.grids.intervals);
    const auto naive = baseline_totals(Baseline::kSeasonalNaive, prepared, examples, r.test_start);

    std::vector<double> model_diff, naive_diff, observed;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const double obs = passengers(prepared, *examples[i], preds[i].observed_total);
        observed.push_back(obs);
        model_diff.push_back(obs - passengers(prepared, *examples[i], preds[i].predicted_total));
        naive_diff.push_back(obs - passengers(prepared, *examples[i], naive[i]));
    }
    r.model = per_day(examples, model_diff, r.test_start, length);
    r.seasonal_naive = per_day(examples, naive_diff, r.test_start, length);
    r.observed = per_day(examples, observed, r.test_start, length);
    return r;
}

double mean_over(const std::vector<DayPoint>& series, int first, int last, bool absolute) {
    double s = 0.0;
    int n = 0;
    for (const auto& p : series) {
        if (p.offset < first || p.offset > last || p.flights == 0) continue;
        s += absolute ? std::abs(p.value) : p.value;
        ++n;
    }
    if (n == 0) throw DomainError("no points between offsets " + std::to_string(first) + " and " + std::to_string(last));
    return s / n;
}

ClosureMatrix target_closure(const prep::Example& example, const GridSpec& grids) {
    const int F = grids.fares.count(), D = grids.intervals.count();
    const std::size_t plane = static_cast<std::size_t>(F) * D;
    ClosureMatrix c(F, D);
    std::copy(example.closure.end() - static_cast<std::ptrdiff_t>(plane), example.closure.end(), c.values().begin());
    return c;
}

ClosureMatrix close_future_intervals(const prep::Example& example, Date reference, const GridSpec& grids) {
    ClosureMatrix c = target_closure(example, grids);
    const int J = realized_boundary(days_between(example.departure, reference), grids.intervals).boundary;
    for (int i = 0; i < c.fares(); ++i)
        for (int j = J + 1; j < c.intervals(); ++j) c.at(i, j) = 1.0;
    return c;
}

WhatIfResult whatif(const Checkpoint& ck, const prep::Example& example, Date reference, const ClosureMatrix& alternative) {
    const InputLayout& l = ck.layout;
    if (alternative.fares() != l.fares || alternative.intervals() != l.intervals)
        throw ShapeError("alternative closure must be " + std::to_string(l.fares) + " x " + std::to_string(l.intervals));
    alternative.validate();
    nn::Model model = instantiate(ck);
    nn::NoGradGuard guard;
    const ClosureMatrix original = target_closure(example, ck.grids);
    const double scale = ck.normalizer.traffic_scale(example.market_id);
    auto run = [&](const ClosureMatrix& closure) {
        const auto in = build_input_with_closure(example, reference, l, ck.grids.intervals, closure.values());
        const auto row = unpack_prediction(model.forward(in, false).value(), l).front();
        TrafficTensor t(l.fares, l.intervals);
        for (std::size_t i = 0; i < row.size(); ++i) t.values()[i] = row[i] * scale;
        return t;
    };
    WhatIfResult r;
    r.baseline = run(original);
    r.scenario = run(alternative);
    r.delta = TrafficTensor(l.fares, l.intervals);
    for (std::size_t i = 0; i < r.delta.size(); ++i) r.delta.values()[i] = r.scenario.values()[i] - r.baseline.values()[i];
    r.baseline_total = r.baseline.total();
    r.scenario_total = r.scenario.total();
    r.total_delta = r.delta.total();
    return r;
}

void run_sequential(std::size_t count, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < count; ++i) body(i);
}

std::vector<SweepPoint> window_sweep(const std::vector<int>& n_values, const TrainConfig& config,
                                     const prep::PreparedDataset& prepared, const TrialRunner& runner) {
    if (n_values.empty()) throw ConfigError("window sweep needs at least one window size");
    std::vector<SweepPoint> out(n_values.size());
    runner(n_values.size(), [&](std::size_t i) {
        SweepPoint& p = out[i];
        p.window_size = n_values[i];
        if (p.window_size < 0 || p.window_size > prepared.options.window_size) {
            p.skipped = true;
            p.reason = "insufficient-history";
            return;
        }
        TrainConfig c = config;
        c.hyperparams.window_size = p.window_size;
        const auto result = train(c, prepared);
        const auto report = evaluate(result.checkpoint, prepared);
        p.val_mse = report.val.tensor_mse;
        p.test_mse = report.test.tensor_mse;
    });
    return out;
}

void SearchSpace::validate() const {
    auto check = [](auto r, const char* name) {
        if (r.lo > r.hi || r.lo <= 0) throw ConfigError(std::string("search range for ") + name + " is invalid");
    };
    check(channels, "channels");
    check(deep_layers, "deep_layers");
    check(decoder_layers, "decoder_layers");
    check(learning_rate, "learning_rate");
    check(window_size, "window_size");
    if (kernels.empty()) throw ConfigError("search space needs at least one kernel size");
    for (int k : kernels)
        if (k <= 0 || k % 2 == 0) throw ConfigError("search kernels must be odd and positive");
}

std::vector<nn::HyperParams> sample_trials(const SearchSpace& space, int budget, std::uint64_t seed,
                                           const nn::HyperParams& base) {
    space.validate();
    if (budget < 1) throw ConfigError("search budget must be at least 1");
    std::vector<nn::HyperParams> out{base};
    for (int t = 1; t < budget; ++t) {
        nn::HyperParams hp = base;
        const int ch = draw_int(seed, t, 0, space.channels);
        hp.temporal_channels = hp.closure_channels = hp.season_channels = hp.decoder_channels = ch;
        hp.deep_layers = draw_int(seed, t, 1, space.deep_layers);
        hp.decoder_layers = draw_int(seed, t, 2, space.decoder_layers);
        const auto nk = static_cast<std::uint64_t>(space.kernels.size());
        hp.temporal_kernel = space.kernels[hash_to_range(draw(seed, t, 3), nk)];
        hp.decoder_kernel = space.kernels[hash_to_range(draw(seed, t, 4), nk)];
        hp.closure_kernel = space.kernels[hash_to_range(draw(seed, t, 5), nk)];
        const double lo = std::log(space.learning_rate.lo), hi = std::log(space.learning_rate.hi);
        hp.learning_rate = std::exp(lo + (hi - lo) * draw_unit(seed, t, 6));
        hp.window_size = draw_int(seed, t, 7, space.window_size);
        hp.shallow_steps = std::min(hp.shallow_steps, hp.window_size + 1);
        out.push_back(hp);
    }
    return out;
}

std::vector<Trial> random_search(const SearchSpace& space, int budget, std::uint64_t seed, const TrainConfig& base,
                                 const prep::PreparedDataset& prepared, const TrialRunner& runner) {
    const auto candidates = sample_trials(space, budget, seed, base.hyperparams);
    std::vector<Trial> trials(candidates.size());
    runner(candidates.size(), [&](std::size_t i) {
        TrainConfig c = base;
        c.hyperparams = candidates[i];
        c.hyperparams.window_size = std::min(c.hyperparams.window_size, prepared.options.window_size);
        const auto result = train(c, prepared);
        trials[i] = {static_cast<int>(i), c.hyperparams, evaluate(result.checkpoint, prepared).val.tensor_mse};
    });
    std::stable_sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) { return a.val_mse < b.val_mse; });
    return trials;
}

}  // namespace skycast::train
