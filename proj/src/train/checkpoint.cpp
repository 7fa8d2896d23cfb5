#include "skycast/train/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "skycast/core/error.hpp"
#include "skycast/io/container.hpp"
#include "skycast/io/dataset_io.hpp"

namespace skycast::train {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

json tensor_to_json(const nn::Tensor& t) {
    return json{{"shape", t.shape()}, {"data", std::vector<double>(t.values().begin(), t.values().end())}};
}

nn::Tensor tensor_from_json(const json& j) {
    nn::Shape shape = j.at("shape").get<nn::Shape>();
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    if (nn::shape_size(shape) != data.size()) throw InputError("checkpoint tensor size does not match its shape");
    return nn::Tensor(std::move(shape), std::move(data));
}

}  // namespace

void capture_weights(const nn::Model& model, Checkpoint& ck) {
    ck.parameters.clear();
    for (const auto& [name, var] : model.params().entries()) ck.parameters[name] = var.value();
    ck.norm_stats = model.norm_stats();
}

nn::Model instantiate(const Checkpoint& ck) {
    nn::Model model(ck.variant, ck.hyperparams, model_geometry(ck.layout));
    for (auto& [name, var] : model.params().entries()) {
        const auto it = ck.parameters.find(name);
        if (it == ck.parameters.end()) throw InputError("checkpoint lacks parameter " + name);
        if (it->second.shape() != var.shape())
            throw InputError("checkpoint parameter " + name + " has shape " + nn::shape_string(it->second.shape()) +
                             ", model expects " + nn::shape_string(var.shape()));
        var.mutable_value() = it->second;
    }
    if (ck.parameters.size() != model.params().entries().size())
        throw InputError("checkpoint holds parameters this model does not have");
    for (auto& [name, stats] : model.norm_stats()) {
        const auto it = ck.norm_stats.find(name);
        if (it == ck.norm_stats.end()) throw InputError("checkpoint lacks batch statistics " + name);
        stats = it->second;
    }
    return model;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    json params = json::object();
    for (const auto& [name, t] : ck.parameters) params[name] = tensor_to_json(t);
    json stats = json::object();
    for (const auto& [name, s] : ck.norm_stats)
        stats[name] = {{"running_mean", tensor_to_json(s.running_mean)},
                       {"running_var", tensor_to_json(s.running_var)},
                       {"momentum", s.momentum},
                       {"eps", s.eps}};
    json history = json::array();
    for (const auto& r : ck.history) history.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_mse", r.val_mse}});
    const json j{
        {"format", "skycast-checkpoint"},
        {"version", kCheckpointVersion},
        {"variant", nn::variant_name(ck.variant)},
        {"hyperparams", ck.hyperparams.to_json()},
        {"layout",
         {{"window_size", ck.layout.window_size},
          {"closure_depth", ck.layout.closure_depth},
          {"fares", ck.layout.fares},
          {"intervals", ck.layout.intervals}}},
        {"grids", io::grids_to_json(ck.grids)},
        {"stack_closure", ck.stack_closure},
        {"normalizer", ck.normalizer.to_json()},
        {"prepared_hash", ck.prepared_hash},
        {"best_epoch", ck.best_epoch},
        {"history", history},
        {"norm_stats", stats},
        {"parameters", params},
    };
    io::write_text(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string text = io::read_text(path);
    Checkpoint ck;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "skycast-checkpoint") throw InputError("not a checkpoint file");
        if (j.at("version").get<int>() > kCheckpointVersion)
            throw InputError("checkpoint format is newer than this build");
        ck.variant = nn::parse_variant(j.at("variant").get<std::string>());
        ck.hyperparams = nn::HyperParams::from_json(j.at("hyperparams"));
        const json& l = j.at("layout");
        ck.layout = {l.at("window_size").get<int>(), l.at("closure_depth").get<int>(), l.at("fares").get<int>(),
                     l.at("intervals").get<int>()};
        ck.grids = io::grids_from_json(j.at("grids"));
        ck.stack_closure = j.at("stack_closure").get<bool>();
        ck.normalizer = prep::Normalizer::from_json(j.at("normalizer"));
        ck.prepared_hash = j.at("prepared_hash").get<std::string>();
        ck.best_epoch = j.at("best_epoch").get<int>();
        for (const auto& r : j.at("history"))
            ck.history.push_back({r.at("epoch").get<int>(), r.at("train_loss").get<double>(), r.at("val_mse").get<double>()});
        for (const auto& [name, s] : j.at("norm_stats").items())
            ck.norm_stats[name] = nn::BatchNormStats{tensor_from_json(s.at("running_mean")),
                                                     tensor_from_json(s.at("running_var")),
                                                     s.at("momentum").get<double>(), s.at("eps").get<double>()};
        for (const auto& [name, t] : j.at("parameters").items()) ck.parameters[name] = tensor_from_json(t);
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::kInput) throw;
        throw InputError("invalid checkpoint " + path.string() + ": " + e.what());
    } catch (const std::exception& e) {
        throw InputError("invalid checkpoint " + path.string() + ": " + e.what());
    }
    try {
        instantiate(ck);
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError("checkpoint " + path.string() + " does not describe a valid model: " + e.what());
    }
    return ck;
}

}  // namespace skycast::train
