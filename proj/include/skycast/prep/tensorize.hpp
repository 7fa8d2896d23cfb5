#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skycast/core/types.hpp"

namespace skycast::prep {

struct Booking {
    double fare = 0.0;
    int days_before = 0;
    Channel channel = kLocal;
    int count = 1;
};

/// Sums booking counts into their (bracket, interval, channel) cells.
TrafficTensor build_traffic_tensor(std::span<const Booking> bookings, const GridSpec& grids);

/// Read-only lookup of flights by (market, departure date).
class FlightStore {
public:
    FlightStore() = default;
    explicit FlightStore(std::span<const FlightInstance> flights);

    const FlightInstance* find(const std::string& market_id, Date date) const;
    std::size_t size() const { return index_.size(); }

private:
    std::map<std::pair<std::string, Date>, const FlightInstance*> index_;
};

/// n same-weekday predecessors followed by the target, oldest first.
struct HistoricalWindow {
    std::string market_id;
    std::vector<Date> departures;
    std::vector<TrafficTensor> traffic;
    std::vector<ClosureMatrix> closure;

    int window_size() const { return static_cast<int>(departures.size()) - 1; }
    const TrafficTensor& target_traffic() const { return traffic.back(); }
};

/// Throws InsufficientHistoryError when any of the n predecessors is missing.
HistoricalWindow assemble_window(const FlightInstance& target, int n, const FlightStore& store);

/// (depth, F, D) stack of closure grids fed to the volumetric encoder.
struct ClosureVolume {
    int depth = 0;
    int fares = 0;
    int intervals = 0;
    std::vector<double> values;

    double at(int m, int i, int j) const {
        return values[(static_cast<std::size_t>(m) * fares + i) * intervals + j];
    }
};

/// `stack_window` false keeps only the target's grid (depth 1).
ClosureVolume closure_volume(const HistoricalWindow& window, bool stack_window = true);

}  // namespace skycast::prep
