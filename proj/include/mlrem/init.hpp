#pragma once

#include <cstdint>

#include "mlrem/dataset.hpp"
#include "mlrem/model.hpp"

namespace mlrem {

enum class InitKind { perturbed_oracle, random };

struct InitSpec {
    InitKind kind = InitKind::perturbed_oracle;
    double beta_radius = 0.0;        // exact distance of each beta_j^0 from beta_j*
    double weight_rel_radius = 0.0;  // in [0, 0.5]
    std::uint64_t seed = 0;

    void validate() const;
};

/// Truth plus a perturbation of exact length beta_radius in a uniformly random
/// direction per component, and multiplicative weight noise
/// pi_j (1 + eps_j), eps_j ~ U[-weight_rel_radius, weight_rel_radius],
/// renormalized to the simplex. Component j draws from CounterRng(seed, j):
/// d normals for the direction, then one uniform for eps_j.
EMState perturbed_init(const MixtureParams& truth, const InitSpec& spec);

/// Shuffles the samples into k equal-size groups, fits ridge OLS (1e-8) on
/// each, and starts from uniform weights. Requires n >= k d.
EMState random_init(const Samples& data, Index k, std::uint64_t seed);

/// Ridge-regularized ordinary least squares, (X^T X + ridge I)^{-1} X^T y.
Vector ols(const Eigen::Ref<const Matrix>& design, const Eigen::Ref<const Vector>& response, double ridge);

}  // namespace mlrem
