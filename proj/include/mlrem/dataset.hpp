#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mlrem/model.hpp"

namespace mlrem {

/// Observed part of a dataset: the only thing estimators ever see.
struct Samples {
    Matrix design;    // n x d, row i is X_i
    Vector response;  // length n

    Index n() const { return design.rows(); }
    Index d() const { return design.cols(); }
};

/// Samples plus the hidden component labels used for diagnostics.
///
/// Estimators take `const Samples&`; labels are reachable only through this
/// wrapper, so no estimation path can read them.
struct Dataset {
    Samples samples;
    std::optional<std::vector<int>> labels;
    std::uint64_t seed = 0;

    Index n() const { return samples.n(); }
    Index d() const { return samples.d(); }

    void validate() const;
};

/// Draws n labeled samples from the mixture.
///
/// Sample i uses CounterRng(seed, i) and consumes, in order: one uniform for
/// the label (inverse CDF over the weights), d normals for X_i, one normal for
/// the noise e_i. Then y_i = <X_i, beta_label> + sigma * e_i.
Dataset sample_dataset(const MixtureParams& params, Index n, std::uint64_t seed);

/// Contiguous partition into `batches` parts; the first n mod T parts get one
/// extra sample. Labels are sliced alongside.
std::vector<Dataset> split_batches(const Dataset& data, Index batches);

/// Draws the label for a uniform u in (0,1) by inverse CDF over `weights`.
int draw_label(const Vector& weights, double u);

struct LabeledDraw {
    int label = 0;
    double noise = 0.0;  // standard normal e, before scaling by sigma
    double response = 0.0;
};

/// Sample `index` of the stream `seed`, using the draw order of sample_dataset.
/// Writes X into `x` (length d).
LabeledDraw draw_labeled_sample(const MixtureParams& params, std::uint64_t seed, std::uint64_t index,
                                Eigen::Ref<Vector> x);

}  // namespace mlrem
