#pragma once

#include <span>
#include <vector>

#include "skycast/core/date.hpp"
#include "skycast/core/grid.hpp"
#include "skycast/mask/masking.hpp"
#include "skycast/mask/split.hpp"
#include "skycast/nn/model.hpp"
#include "skycast/prep/prepared.hpp"

namespace skycast::train {

/// How a model consumes prepared examples: the last `window_size + 1` window
/// members and the matching tail of the closure stack.
struct InputLayout {
    int window_size = 5;
    int closure_depth = 6;
    int fares = 10;
    int intervals = 12;
};

/// Layout for a model of window size `n` over a prepared dataset; throws
/// ConfigError when the examples carry fewer than n predecessors.
InputLayout input_layout(const prep::PreparedDataset& prepared, int n);

nn::ModelGeometry model_geometry(const InputLayout& layout);

/// Masks every window member against its example's reference date, permutes
/// to channel-first and stacks the batch.
nn::ModelInput build_input(std::span<const prep::Example* const> batch, std::span<const Date> references,
                           const InputLayout& layout, const IntervalGrid& grid);

/// Swaps the target's closure grid before stacking; used by what-if scenarios.
nn::ModelInput build_input_with_closure(const prep::Example& example, Date reference, const InputLayout& layout,
                                        const IntervalGrid& grid, std::span<const double> target_closure);

/// Unmasked labels as (B, 2, F, D).
nn::Tensor build_labels(std::span<const prep::Example* const> batch, const InputLayout& layout);

/// (B, 2, F, D) prediction rows back to per-example (F, D, C) vectors.
std::vector<std::vector<double>> unpack_prediction(const nn::Tensor& prediction, const InputLayout& layout);

/// Validation and test examples are masked at the start of their subset.
std::vector<Date> split_references(std::span<const prep::Example* const> examples, const mask::SplitPlan& plan);

/// Pseudo reference = departure - delta from the epoch plan.
std::vector<Date> epoch_references(std::span<const prep::Example* const> examples, const mask::EpochMaskPlan& plan);

/// Contiguous batches of at most `batch_size`; a trailing singleton joins the
/// previous batch because batch statistics need two examples.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count, int batch_size);

}  // namespace skycast::train
