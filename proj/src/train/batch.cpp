#include "skycast/train/batch.hpp"

#include <algorithm>

#include "skycast/core/error.hpp"

namespace skycast::train {

InputLayout input_layout(const prep::PreparedDataset& prepared, int n) {
    const int available = prepared.options.window_size;
    if (n < 0 || n > available)
        throw ConfigError("model window size " + std::to_string(n) + " needs more history than the prepared " +
                          std::to_string(available) + " predecessors");
    InputLayout l;
    l.window_size = n;
    l.closure_depth = prepared.options.stack_closure ? n + 1 : 1;
    l.fares = prepared.grids.fares.count();
    l.intervals = prepared.grids.intervals.count();
    return l;
}

nn::ModelGeometry model_geometry(const InputLayout& layout) {
    return nn::ModelGeometry{layout.fares, layout.intervals, layout.closure_depth, SeasonalityVector::kLength};
}

namespace {

void fill_example(const prep::Example& e, Date reference, const InputLayout& l, const IntervalGrid& grid,
                  std::span<const double> target_closure, std::size_t b, nn::ModelInput& in) {
    const int F = l.fares, D = l.intervals, C = kChannelCount;
    const std::size_t plane = static_cast<std::size_t>(F) * D;
    const std::size_t cell = plane * C;
    const int steps = l.window_size + 1;
    const int skip = e.window_size() - l.window_size;
    if (skip < 0) throw ShapeError("example " + std::to_string(e.id) + " has a shorter window than the model");

    std::vector<double> member(cell);
    for (int m = 0; m < steps; ++m) {
        const auto src = e.window.begin() + static_cast<std::ptrdiff_t>((skip + m) * cell);
        std::copy(src, src + static_cast<std::ptrdiff_t>(cell), member.begin());
        const Date d = e.member_dates[static_cast<std::size_t>(skip + m)];
        mask::mask_values(member, F, D, realized_boundary(days_between(d, reference), grid).boundary);
        double* dst = in.window.data() + (b * steps + static_cast<std::size_t>(m)) * cell;
        for (int c = 0; c < C; ++c)
            for (std::size_t p = 0; p < plane; ++p) dst[static_cast<std::size_t>(c) * plane + p] = member[p * C + c];
    }

    const int have = static_cast<int>(e.closure.size() / plane);
    if (have < l.closure_depth) throw ShapeError("example closure stack is shallower than the model's");
    double* cdst = in.closure.data() + b * static_cast<std::size_t>(l.closure_depth) * plane;
    const auto csrc = e.closure.begin() + static_cast<std::ptrdiff_t>((have - l.closure_depth) * plane);
    std::copy(csrc, csrc + static_cast<std::ptrdiff_t>(l.closure_depth * plane), cdst);
    if (!target_closure.empty()) {
        if (target_closure.size() != plane) throw ShapeError("alternative closure must be (F, D)");
        std::copy(target_closure.begin(), target_closure.end(),
                  cdst + static_cast<std::size_t>(l.closure_depth - 1) * plane);
    }

    std::copy(e.season.begin(), e.season.end(), in.season.data() + b * SeasonalityVector::kLength);
}

nn::ModelInput empty_input(std::size_t B, const InputLayout& l) {
    const int b = static_cast<int>(B);
    return nn::ModelInput{nn::Tensor({b, l.window_size + 1, kChannelCount, l.fares, l.intervals}),
                          nn::Tensor({b, 1, l.closure_depth, l.fares, l.intervals}),
                          nn::Tensor({b, SeasonalityVector::kLength})};
}

}  // namespace

nn::ModelInput build_input(std::span<const prep::Example* const> batch, std::span<const Date> references,
                           const InputLayout& layout, const IntervalGrid& grid) {
    if (batch.size() != references.size()) throw ShapeError("one reference date per example is required");
    nn::ModelInput in = empty_input(batch.size(), layout);
    for (std::size_t b = 0; b < batch.size(); ++b) fill_example(*batch[b], references[b], layout, grid, {}, b, in);
    return in;
}

nn::ModelInput build_input_with_closure(const prep::Example& example, Date reference, const InputLayout& layout,
                                        const IntervalGrid& grid, std::span<const double> target_closure) {
    nn::ModelInput in = empty_input(1, layout);
    fill_example(example, reference, layout, grid, target_closure, 0, in);
    return in;
}

nn::Tensor build_labels(std::span<const prep::Example* const> batch, const InputLayout& l) {
    const std::size_t plane = static_cast<std::size_t>(l.fares) * l.intervals;
    nn::Tensor out({static_cast<int>(batch.size()), kChannelCount, l.fares, l.intervals});
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& label = batch[b]->label;
        double* dst = out.data() + b * plane * kChannelCount;
        for (int c = 0; c < kChannelCount; ++c)
            for (std::size_t p = 0; p < plane; ++p) dst[static_cast<std::size_t>(c) * plane + p] = label[p * kChannelCount + c];
    }
    return out;
}

std::vector<std::vector<double>> unpack_prediction(const nn::Tensor& prediction, const InputLayout& l) {
    const std::size_t plane = static_cast<std::size_t>(l.fares) * l.intervals;
    const auto B = static_cast<std::size_t>(prediction.dim(0));
    std::vector<std::vector<double>> out(B, std::vector<double>(plane * kChannelCount));
    for (std::size_t b = 0; b < B; ++b) {
        const double* src = prediction.data() + b * plane * kChannelCount;
        for (int c = 0; c < kChannelCount; ++c)
            for (std::size_t p = 0; p < plane; ++p) out[b][p * kChannelCount + c] = src[static_cast<std::size_t>(c) * plane + p];
    }
    return out;
}

std::vector<Date> split_references(std::span<const prep::Example* const> examples, const mask::SplitPlan& plan) {
    std::vector<Date> out;
    out.reserve(examples.size());
    for (const auto* e : examples) {
        if (e->split == mask::Split::kTrain) throw DomainError("training examples have no fixed reference date");
        out.push_back(plan.reference_date(e->split));
    }
    return out;
}

std::vector<Date> epoch_references(std::span<const prep::Example* const> examples, const mask::EpochMaskPlan& plan) {
    if (examples.size() != plan.entries.size()) throw ShapeError("epoch plan does not cover the examples");
    std::vector<Date> out;
    out.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (plan.entries[i].example_id != examples[i]->id) throw LookupError("epoch plan order differs from examples");
        out.push_back(add_days(examples[i]->departure, -plan.entries[i].delta));
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count, int batch_size) {
    if (batch_size <= 0) throw ConfigError("batch size must be positive");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const auto bs = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < count; start += bs) out.emplace_back(start, std::min(count, start + bs));
    if (out.size() > 1 && out.back().second - out.back().first == 1) {
        out.pop_back();
        out.back().second = count;
    }
    return out;
}

}  // namespace skycast::train
