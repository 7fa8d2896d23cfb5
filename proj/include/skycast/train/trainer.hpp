#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "skycast/mask/masking.hpp"
#include "skycast/nn/model.hpp"
#include "skycast/prep/prepared.hpp"
#include "skycast/train/checkpoint.hpp"

namespace skycast::train {

struct TrainConfig {
    nn::ModelVariant variant = nn::ModelVariant::kConvLstmSpatial;
    nn::HyperParams hyperparams;  // epochs, batch size, learning rate and init seed live here
    int patience = 10;            // epochs without validation improvement before stopping
    std::uint64_t base_seed = 1;  // epoch masks and batch order
    bool record_masks = false;
    double target_train_loss = 0.0;  // stop once an epoch's mean loss falls below it; 0 disables
    int max_pseudo_delta = 0;        // largest pseudo departure offset in days; 0 = booking horizon w*D

    /// Throws ConfigError; patience must be below the epoch count.
    void validate() const;
};

struct TrainResult {
    Checkpoint checkpoint;  // best-validation weights
    std::vector<EpochRecord> history;
    std::vector<mask::EpochMaskPlan> mask_audit;  // filled when record_masks is set
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on masked training windows, one fresh mask plan per epoch, early
/// stopping on validation tensor MSE. Throws FitError when the loss stops
/// being finite.
TrainResult train(const TrainConfig& config, const prep::PreparedDataset& prepared, const EpochCallback& on_epoch = {});

/// Training examples in the order the trainer visits them in `epoch`.
std::vector<const prep::Example*> epoch_order(std::span<const prep::Example* const> examples, int epoch,
                                              std::uint64_t base_seed);

}  // namespace skycast::train
