#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skycast/core/grid.hpp"
#include "skycast/nn/model.hpp"
#include "skycast/prep/normalizer.hpp"
#include "skycast/train/batch.hpp"

namespace skycast::train {

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_mse = 0.0;
};

/// Everything needed to rebuild a trained model and feed it data prepared the
/// same way.
struct Checkpoint {
    nn::ModelVariant variant = nn::ModelVariant::kConvLstmSpatial;
    nn::HyperParams hyperparams;
    InputLayout layout;
    GridSpec grids;
    bool stack_closure = true;
    std::map<std::string, nn::Tensor> parameters;
    std::map<std::string, nn::BatchNormStats> norm_stats;
    prep::Normalizer normalizer;
    std::vector<EpochRecord> history;
    int best_epoch = -1;  // -1: initial weights were kept
    std::string prepared_hash;
};

/// Copies the model's current weights and batch statistics into `ck`.
void capture_weights(const nn::Model& model, Checkpoint& ck);

/// Rebuilds the network and loads the stored weights.
nn::Model instantiate(const Checkpoint& ck);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
/// Throws InputError for missing, truncated or inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace skycast::train
