#include "skycast/prep/tensorize.hpp"

#include "skycast/core/error.hpp"

namespace skycast::prep {

TrafficTensor build_traffic_tensor(std::span<const Booking> bookings, const GridSpec& grids) {
    TrafficTensor t(grids.fares.count(), grids.intervals.count());
    for (const auto& b : bookings) {
        if (b.count < 0) throw DomainError("negative booking count");
        const int i = grids.fares.index(b.fare);
        const int j = grids.intervals.index(b.days_before);
        t.at(i, j, b.channel) += b.count;
    }
    return t;
}

FlightStore::FlightStore(std::span<const FlightInstance> flights) {
    for (const auto& f : flights) index_[{f.market_id, f.departure}] = &f;
}

const FlightInstance* FlightStore::find(const std::string& market_id, Date date) const {
    auto it = index_.find({market_id, date});
    return it == index_.end() ? nullptr : it->second;
}

HistoricalWindow assemble_window(const FlightInstance& target, int n, const FlightStore& store) {
    if (n < 0) throw ConfigError("window size must be non-negative");
    HistoricalWindow w;
    w.market_id = target.market_id;
    for (int m = n; m >= 1; --m) {
        const Date d = add_days(target.departure, -7 * m);
        const FlightInstance* f = store.find(target.market_id, d);
        if (f == nullptr)
            throw InsufficientHistoryError(target.market_id + " " + format_date(target.departure) +
                                           ": missing same-weekday predecessor " + format_date(d));
        w.departures.push_back(d);
        w.traffic.push_back(f->traffic);
        w.closure.push_back(f->closure);
    }
    w.departures.push_back(target.departure);
    w.traffic.push_back(target.traffic);
    w.closure.push_back(target.closure);
    return w;
}

ClosureVolume closure_volume(const HistoricalWindow& window, bool stack_window) {
    const auto& last = window.closure.back();
    ClosureVolume v;
    v.fares = last.fares();
    v.intervals = last.intervals();
    const std::size_t first = stack_window ? 0 : window.closure.size() - 1;
    v.depth = static_cast<int>(window.closure.size() - first);
    for (std::size_t m = first; m < window.closure.size(); ++m) {
        auto vals = window.closure[m].values();
        v.values.insert(v.values.end(), vals.begin(), vals.end());
    }
    return v;
}

}  // namespace skycast::prep
