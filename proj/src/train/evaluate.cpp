#include "skycast/train/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "skycast/core/error.hpp"
#include "skycast/nn/autograd.hpp"
#include "skycast/stats/series.hpp"
#include "skycast/train/batch.hpp"

namespace skycast::train {

std::vector<FlightPrediction> predict(nn::Model& model, const InputLayout& layout,
                                      std::span<const prep::Example* const> examples, std::span<const Date> references,
                                      const IntervalGrid& grid, int batch_size) {
    nn::NoGradGuard guard;
    std::vector<FlightPrediction> out;
    out.reserve(examples.size());
    for (std::size_t start = 0; start < examples.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(examples.size(), start + static_cast<std::size_t>(batch_size));
        const auto batch = examples.subspan(start, end - start);
        const auto refs = references.subspan(start, end - start);
        const nn::Var pred = model.forward(build_input(batch, refs, layout, grid), false);
        auto rows = unpack_prediction(pred.value(), layout);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            FlightPrediction p;
            p.example = batch[b];
            p.reference = refs[b];
            p.predicted = std::move(rows[b]);
            p.predicted_total = std::accumulate(p.predicted.begin(), p.predicted.end(), 0.0);
            p.observed_total = std::accumulate(batch[b]->label.begin(), batch[b]->label.end(), 0.0);
            out.push_back(std::move(p));
        }
    }
    return out;
}

SplitMetrics score(std::span<const FlightPrediction> predictions) {
    SplitMetrics m;
    m.flights = predictions.size();
    if (predictions.empty()) return m;
    double cells = 0.0, cell_count = 0.0, totals = 0.0;
    bool tensors = true;
    for (const auto& p : predictions) {
        const double d = p.predicted_total - p.observed_total;
        totals += d * d;
        if (p.predicted.empty()) {
            tensors = false;
            continue;
        }
        const auto& label = p.example->label;
        for (std::size_t i = 0; i < label.size(); ++i) {
            const double e = p.predicted[i] - label[i];
            cells += e * e;
        }
        cell_count += static_cast<double>(label.size());
    }
    m.tensor_mse = tensors ? cells / cell_count : std::numeric_limits<double>::quiet_NaN();
    m.totals_mse = totals / static_cast<double>(predictions.size());
    return m;
}

namespace {

void check_normalizer(const Checkpoint& ck, const prep::PreparedDataset& prepared) {
    if (!(ck.normalizer == prepared.normalizer)) {
        for (const auto& [market, scale] : prepared.normalizer.traffic_scales()) {
            const auto& known = ck.normalizer.traffic_scales();
            const auto it = known.find(market);
            if (it == known.end()) throw LookupError("checkpoint normalizer has no market " + market);
            if (it->second != scale)
                throw LookupError("market " + market + " is scaled differently in the checkpoint and the prepared data");
        }
        throw LookupError("checkpoint normalizer does not match the prepared dataset");
    }
    if (!(ck.grids.intervals.width() == prepared.grids.intervals.width() &&
          ck.grids.intervals.count() == prepared.grids.intervals.count() &&
          ck.grids.fares.edges() == prepared.grids.fares.edges()))
        throw LookupError("checkpoint grids do not match the prepared dataset");
}

}  // namespace

std::vector<FlightPrediction> predict_split(const Checkpoint& ck, const prep::PreparedDataset& prepared, mask::Split split) {
    check_normalizer(ck, prepared);
    nn::Model model = instantiate(ck);
    const auto examples = prepared.split(split);
    const auto refs = split_references(examples, prepared.plan);
    return predict(model, ck.layout, examples, refs, prepared.grids.intervals);
}

ModelReport evaluate(const Checkpoint& ck, const prep::PreparedDataset& prepared) {
    check_normalizer(ck, prepared);
    nn::Model model = instantiate(ck);
    ModelReport r;
    r.model = nn::variant_label(ck.variant);
    r.prepared_hash = prep::prepared_hash(prepared);
    for (auto split : {mask::Split::kVal, mask::Split::kTest}) {
        const auto examples = prepared.split(split);
        const auto refs = split_references(examples, prepared.plan);
        const auto preds = predict(model, ck.layout, examples, refs, prepared.grids.intervals);
        (split == mask::Split::kVal ? r.val : r.test) = score(preds);
    }
    return r;
}

const char* baseline_label(Baseline b) {
    switch (b) {
        case Baseline::kArima: return "ARIMA";
        case Baseline::kSarima: return "SARIMA";
        case Baseline::kSeasonalNaive: return "SeasonalNaive";
        case Baseline::kNaive: return "Naive";
    }
    throw DomainError("unknown baseline");
}

std::vector<double> baseline_totals(Baseline b, const prep::PreparedDataset& prepared,
                                    std::span<const prep::Example* const> examples, Date origin,
                                    const BaselineOrders& orders) {
    std::map<std::string, int> horizon;
    for (const auto* e : examples) {
        const int h = days_between(e->departure, origin);
        if (h < 0) throw DomainError("baseline forecast requested before its origin");
        horizon[e->market_id] = std::max(horizon[e->market_id], h + 1);
    }
    std::map<std::string, std::vector<double>> forecasts;
    for (const auto& s : stats::market_series(prepared, origin)) {
        const auto it = horizon.find(s.market_id);
        if (it == horizon.end()) continue;
        if (!s.dates.empty() && days_between(origin, s.dates.back()) != 1)
            throw GapError(s.market_id + ": history does not reach the forecast origin");
        switch (b) {
            case Baseline::kArima:
                forecasts[s.market_id] = stats::ArimaModel::fit(s.values, orders.arima).forecast(it->second);
                break;
            case Baseline::kSarima:
                forecasts[s.market_id] =
                    stats::ArimaModel::fit(s.values, orders.sarima, orders.seasonal).forecast(it->second);
                break;
            case Baseline::kSeasonalNaive:
                forecasts[s.market_id] = stats::seasonal_naive_forecast(s.values, 7, it->second);
                break;
            case Baseline::kNaive: forecasts[s.market_id] = stats::naive_forecast(s.values, it->second); break;
        }
    }
    std::vector<double> out;
    out.reserve(examples.size());
    for (const auto* e : examples) {
        const auto it = forecasts.find(e->market_id);
        if (it == forecasts.end()) throw LookupError("no history before the forecast origin for " + e->market_id);
        out.push_back(it->second[static_cast<std::size_t>(days_between(e->departure, origin))]);
    }
    return out;
}

ModelReport evaluate_baseline(Baseline b, const prep::PreparedDataset& prepared, const BaselineOrders& orders) {
    ModelReport r;
    r.model = baseline_label(b);
    r.prepared_hash = prep::prepared_hash(prepared);
    for (auto split : {mask::Split::kVal, mask::Split::kTest}) {
        const auto examples = prepared.split(split);
        const auto totals = baseline_totals(b, prepared, examples, prepared.plan.reference_date(split), orders);
        std::vector<FlightPrediction> preds;
        preds.reserve(examples.size());
        for (std::size_t i = 0; i < examples.size(); ++i) {
            FlightPrediction p;
            p.example = examples[i];
            p.reference = prepared.plan.reference_date(split);
            p.predicted_total = totals[i];
            p.observed_total = std::accumulate(examples[i]->label.begin(), examples[i]->label.end(), 0.0);
            preds.push_back(std::move(p));
        }
        (split == mask::Split::kVal ? r.val : r.test) = score(preds);
    }
    return r;
}

double improvement_percent(double reference_mse, double mse) {
    if (!(reference_mse > 0.0)) throw DomainError("reference MSE must be positive");
    return (reference_mse - mse) / reference_mse * 100.0;
}

std::vector<TableRow> mse_table(std::span<const std::pair<std::string, double>> entries, const std::string& reference) {
    static const std::vector<std::string> order = {"ARIMA",    "SARIMA",   "CNN",          "ConvLSTM",
                                                   "+Spatial", "+Shallow", "+DeepShallow", "+SharedWeights"};
    const auto ref = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == reference; });
    if (ref == entries.end()) throw ConfigError("reference model " + reference + " is missing from the table");
    std::vector<TableRow> rows;
    for (const auto& e : entries) rows.push_back({e.first, e.second, improvement_percent(ref->second, e.second)});
    auto rank = [&](const TableRow& r) {
        const auto it = std::find(order.begin(), order.end(), r.model);
        return static_cast<std::size_t>(it - order.begin());
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
    return rows;
}

}  // namespace skycast::train
