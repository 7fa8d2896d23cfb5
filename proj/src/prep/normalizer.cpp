#include "skycast/prep/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skycast/core/error.hpp"

namespace skycast::prep {

Normalizer fit_normalizer(std::span<const FlightInstance* const> training) {
    if (training.empty()) throw ConfigError("cannot fit a normalizer on an empty training split");
    Normalizer n;
    double max_id = 1.0;
    double max_capacity = 0.0;
    n.rasm_min_ = training.front()->rasm;
    n.rasm_max_ = training.front()->rasm;
    for (const FlightInstance* f : training) {
        double& scale = n.traffic_scale_.try_emplace(f->market_id, 1.0).first->second;
        for (double v : f->traffic.values()) scale = std::max(scale, v);
        max_id = std::max({max_id, static_cast<double>(f->origin_id), static_cast<double>(f->destination_id)});
        max_capacity = std::max(max_capacity, static_cast<double>(f->capacity));
        n.rasm_min_ = std::min(n.rasm_min_, f->rasm);
        n.rasm_max_ = std::max(n.rasm_max_, f->rasm);
    }
    n.id_scale_ = max_id;
    n.capacity_ref_ = kCapacityHeadroom * std::max(1.0, max_capacity);
    if (n.rasm_max_ <= n.rasm_min_) n.rasm_max_ = n.rasm_min_ + 1.0;
    return n;
}

double Normalizer::traffic_scale(const std::string& market_id) const {
    auto it = traffic_scale_.find(market_id);
    if (it == traffic_scale_.end()) throw LookupError("no normalizer fitted for market '" + market_id + "'");
    return it->second;
}

TrafficTensor Normalizer::normalize(const TrafficTensor& t, const std::string& market_id) const {
    const double scale = traffic_scale(market_id);
    TrafficTensor out = t;
    for (double& v : out.values())
        if (v != kMaskSentinel) v /= scale;
    return out;
}

TrafficTensor Normalizer::denormalize(const TrafficTensor& t, const std::string& market_id) const {
    const double scale = traffic_scale(market_id);
    TrafficTensor out = t;
    for (double& v : out.values())
        if (v != kMaskSentinel) v *= scale;
    return out;
}

HistoricalWindow Normalizer::normalize(const HistoricalWindow& w) const {
    HistoricalWindow out = w;
    for (auto& t : out.traffic) t = normalize(t, w.market_id);
    return out;
}

SeasonalityVector Normalizer::seasonality(const FlightInstance& f) const {
    SeasonalityVector s;
    s.day_of_week[static_cast<std::size_t>(day_of_week(f.departure))] = 1.0;
    const double angle = 2.0 * std::numbers::pi * week_of_year(f.departure) / 52.0;
    s.week_sin = std::sin(angle);
    s.week_cos = std::cos(angle);
    s.holiday_flag = f.holiday ? 1.0 : 0.0;
    s.origin_id = f.origin_id / id_scale_;
    s.destination_id = f.destination_id / id_scale_;
    s.capacity_norm = std::clamp(f.capacity / capacity_ref_, 1e-9, 1.0);
    s.rasm_norm = std::clamp((f.rasm - rasm_min_) / (rasm_max_ - rasm_min_), 0.0, 1.0);
    return s;
}

nlohmann::json Normalizer::to_json() const {
    return {{"traffic_scale", traffic_scale_},
            {"id_scale", id_scale_},
            {"capacity_ref", capacity_ref_},
            {"rasm_min", rasm_min_},
            {"rasm_max", rasm_max_}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
    Normalizer n;
    n.traffic_scale_ = j.at("traffic_scale").get<std::map<std::string, double>>();
    n.id_scale_ = j.at("id_scale").get<double>();
    n.capacity_ref_ = j.at("capacity_ref").get<double>();
    n.rasm_min_ = j.at("rasm_min").get<double>();
    n.rasm_max_ = j.at("rasm_max").get<double>();
    return n;
}

}  // namespace skycast::prep
