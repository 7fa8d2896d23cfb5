#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "skycast/synth/generator.hpp"

namespace skycast::io {

// Dataset directory layout:
//   generator.json          markets, grids, date range, seed, shock
//   flights.csv             one row per flight
//   tensors/<id>.traffic.f32 + .desc   (F, D, C) float32 LE
//   tensors/<id>.closure.f32 + .desc   (F, D) float32 LE
//   manifest.txt            every member file with its seed and content hash

nlohmann::json grids_to_json(const GridSpec& grids);
GridSpec grids_from_json(const nlohmann::json& j);

nlohmann::json market_to_json(const synth::MarketConfig& m);
synth::MarketConfig market_from_json(const nlohmann::json& j);

std::string flight_key(const FlightInstance& flight);

void save_dataset(const synth::Dataset& dataset, const std::filesystem::path& dir);
synth::Dataset load_dataset(const std::filesystem::path& dir);

/// Hash of the dataset manifest, used to tag every downstream report.
std::string dataset_hash(const std::filesystem::path& dir);

}  // namespace skycast::io
