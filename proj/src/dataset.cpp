#include "mlrem/dataset.hpp"

#include <string>

#include "mlrem/errors.hpp"
#include "mlrem/rng.hpp"

namespace mlrem {

void Dataset::validate() const {
    if (samples.response.size() != samples.n()) {
        throw ConfigError("dataset: design rows and response length differ");
    }
    if (labels && static_cast<Index>(labels->size()) != samples.n()) {
        throw ConfigError("dataset: labels length differs from sample count");
    }
}

int draw_label(const Vector& weights, double u) {
    double cumulative = 0.0;
    const Index last = weights.size() - 1;
    for (Index j = 0; j < last; ++j) {
        cumulative += weights[j];
        if (u < cumulative) {
            return static_cast<int>(j);
        }
    }
    // Rounding in the cumulative sum must never select a zero-weight tail.
    Index j = last;
    while (j > 0 && weights[j] == 0.0) {
        --j;
    }
    return static_cast<int>(j);
}

LabeledDraw draw_labeled_sample(const MixtureParams& params, std::uint64_t seed, std::uint64_t index,
                                Eigen::Ref<Vector> x) {
    CounterRng rng(seed, index);
    LabeledDraw draw;
    draw.label = draw_label(params.weights, rng.uniform());
    double signal = 0.0;
    for (Index c = 0; c < params.d(); ++c) {
        x[c] = rng.normal();
        signal += x[c] * params.betas(draw.label, c);
    }
    draw.noise = rng.normal();
    draw.response = signal + params.sigma * draw.noise;
    return draw;
}

Dataset sample_dataset(const MixtureParams& params, Index n, std::uint64_t seed) {
    params.validate();
    if (n < 1) {
        throw ConfigError("sample_dataset: n must be >= 1");
    }
    const Index d = params.d();
    Dataset data;
    data.seed = seed;
    data.samples.design.resize(n, d);
    data.samples.response.resize(n);
    data.labels.emplace(static_cast<std::size_t>(n));

    Vector x(d);
    for (Index i = 0; i < n; ++i) {
        const LabeledDraw draw = draw_labeled_sample(params, seed, static_cast<std::uint64_t>(i), x);
        data.samples.design.row(i) = x.transpose();
        data.samples.response[i] = draw.response;
        (*data.labels)[static_cast<std::size_t>(i)] = draw.label;
    }
    return data;
}

std::vector<Dataset> split_batches(const Dataset& data, Index batches) {
    data.validate();
    const Index n = data.n();
    if (batches < 1) {
        throw ConfigError("split_batches: batch count must be >= 1");
    }
    if (batches > n) {
        throw ConfigError("split_batches: more batches (" + std::to_string(batches) + ") than samples (" +
                          std::to_string(n) + ")");
    }
    const Index base = n / batches;
    const Index extra = n % batches;

    std::vector<Dataset> out;
    out.reserve(static_cast<std::size_t>(batches));
    Index start = 0;
    for (Index b = 0; b < batches; ++b) {
        const Index size = base + (b < extra ? 1 : 0);
        Dataset part;
        part.seed = data.seed;
        part.samples.design = data.samples.design.middleRows(start, size);
        part.samples.response = data.samples.response.segment(start, size);
        if (data.labels) {
            part.labels.emplace(data.labels->begin() + start, data.labels->begin() + start + size);
        }
        out.push_back(std::move(part));
        start += size;
    }
    return out;
}

}  // namespace mlrem
