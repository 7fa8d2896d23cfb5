#include "skycast/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"
#include "skycast/nn/adam.hpp"
#include "skycast/train/batch.hpp"
#include "skycast/train/evaluate.hpp"

namespace skycast::train {

namespace {
constexpr std::uint64_t kOrderSalt = 0x0bd3ULL;
}

void TrainConfig::validate() const {
    hyperparams.validate();
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (max_pseudo_delta < 0) throw ConfigError("max_pseudo_delta must be non-negative");
    if (hyperparams.epochs > 0 && patience >= hyperparams.epochs)
        throw ConfigError("patience (" + std::to_string(patience) + ") must be below epochs (" +
                          std::to_string(hyperparams.epochs) + ")");
}

std::vector<const prep::Example*> epoch_order(std::span<const prep::Example* const> examples, int epoch,
                                              std::uint64_t base_seed) {
    std::vector<std::pair<std::uint64_t, const prep::Example*>> keyed;
    keyed.reserve(examples.size());
    for (const auto* e : examples)
        keyed.emplace_back(stable_hash({base_seed, static_cast<std::uint64_t>(epoch), e->id, kOrderSalt}), e);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
    });
    std::vector<const prep::Example*> out;
    out.reserve(keyed.size());
    for (const auto& [key, e] : keyed) out.push_back(e);
    return out;
}

TrainResult train(const TrainConfig& config, const prep::PreparedDataset& prepared, const EpochCallback& on_epoch) {
    config.validate();
    const nn::HyperParams& hp = config.hyperparams;
    const InputLayout layout = input_layout(prepared, hp.window_size);
    const IntervalGrid& grid = prepared.grids.intervals;

    nn::Model model(config.variant, hp, model_geometry(layout));
    nn::Adam adam(model.params(), hp.learning_rate);

    TrainResult result;
    Checkpoint& ck = result.checkpoint;
    ck.variant = config.variant;
    ck.hyperparams = hp;
    ck.layout = layout;
    ck.grids = prepared.grids;
    ck.stack_closure = prepared.options.stack_closure;
    ck.normalizer = prepared.normalizer;
    ck.prepared_hash = prep::prepared_hash(prepared);
    capture_weights(model, ck);
    if (hp.epochs == 0) return result;

    const auto training = prepared.split(mask::Split::kTrain);
    const auto validation = prepared.split(mask::Split::kVal);
    if (training.size() < 2) throw ConfigError("training needs at least two examples");
    if (validation.empty()) throw ConfigError("training needs a non-empty validation split");
    const auto val_refs = split_references(validation, prepared.plan);

    std::vector<std::uint64_t> ids;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        const double progress = hp.epochs > 1 ? static_cast<double>(epoch) / (hp.epochs - 1) : 0.0;
        adam.set_learning_rate(hp.learning_rate *
                               (hp.final_lr_fraction + (1.0 - hp.final_lr_fraction) * 0.5 * (1.0 + std::cos(M_PI * progress))));
        const auto order = epoch_order(training, epoch, config.base_seed);
        ids.clear();
        for (const auto* e : order) ids.push_back(e->id);
        const auto plan = mask::epoch_masks(ids, epoch, config.base_seed, grid, config.max_pseudo_delta);
        const auto refs = epoch_references(order, plan);
        if (config.record_masks) result.mask_audit.push_back(plan);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (const auto& [lo, hi] : batch_ranges(order.size(), hp.batch_size)) {
            const std::span<const prep::Example* const> batch(order.data() + lo, hi - lo);
            const std::span<const Date> batch_refs(refs.data() + lo, hi - lo);
            model.params().zero_grad();
            const nn::Var loss =
                nn::mse_loss(model.forward(build_input(batch, batch_refs, layout, grid), true), build_labels(batch, layout));
            const double value = loss.value()[0];
            if (!std::isfinite(value)) {
                std::ostringstream msg;
                msg << "epoch=" << epoch << " batch_start=" << lo << " loss=" << value
                    << " previous_mean=" << (seen ? loss_sum / static_cast<double>(seen) : 0.0)
                    << " learning_rate=" << hp.learning_rate;
                throw FitError("training diverged", msg.str());
            }
            nn::backward(loss);
            adam.step();
            loss_sum += value * static_cast<double>(hi - lo);
            seen += hi - lo;
        }

        const double val = score(predict(model, layout, validation, val_refs, grid)).tensor_mse;
        const EpochRecord record{epoch, loss_sum / static_cast<double>(seen), val};
        result.history.push_back(record);
        if (on_epoch) on_epoch(record);
        if (!std::isfinite(val)) throw FitError("validation loss is not finite", "epoch=" + std::to_string(epoch));
        if (val < best) {
            best = val;
            since_best = 0;
            ck.best_epoch = epoch;
            capture_weights(model, ck);
        } else if (++since_best >= config.patience) {
            break;
        }
        if (record.train_loss < config.target_train_loss) break;
    }
    ck.history = result.history;
    return result;
}

}  // namespace skycast::train
