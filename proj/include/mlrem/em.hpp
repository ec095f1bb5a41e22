#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mlrem/dataset.hpp"
#include "mlrem/model.hpp"

namespace mlrem {

enum class WeightMode {
    fixed,      // mixing weights stay at their initial values
    estimated,  // pi_j <- mean responsibility, floored and renormalized
};

struct EMConfig {
    /// Known noise standard deviation; 0 selects the hard-assignment E-step.
    double sigma = 1.0;
    WeightMode weight_mode = WeightMode::estimated;
    /// Tikhonov weight on the Gram matrix; unset means 1e-10 * batch size.
    std::optional<double> ridge;
    int max_iters = 100;
    /// Stop once max_j ||beta_j^+ - beta_j|| <= tol.
    double tol = 1e-10;
    double min_weight_floor = 1e-8;

    void validate(Index k) const;
    double ridge_for(Index batch_size) const { return ridge.value_or(1e-10 * static_cast<double>(batch_size)); }
};

/// Result of one M-step (or one full iteration).
struct StepResult {
    EMState state;
    std::vector<bool> degenerate;  // per component: solve skipped, beta kept
};

struct RunTrace {
    std::vector<EMState> states;  // states[0] is the initial state
    std::vector<Index> batch_sizes;
    std::vector<std::vector<bool>> degenerate;  // per iteration, per component
    bool converged = false;
    int iterations_used = 0;

    int degenerate_count() const;
    const EMState& final_state() const { return states.back(); }
};

/// Posterior component probabilities for one sample.
///
/// For sigma > 0 this is the softmax of log(pi_j) - (y - <x, beta_j>)^2 / (2 sigma^2),
/// evaluated after subtracting the row maximum. For sigma == 0 it is the
/// indicator of the smallest |y - <x, beta_j>| among components with pi_j > 0,
/// ties going to the lowest index.
Vector posterior_weights(const EMState& state, const Eigen::Ref<const Vector>& x, double y, double sigma);

/// Row-wise posterior_weights for a whole batch (n x k).
Matrix responsibilities(const EMState& state, const Samples& batch, double sigma);

/// Hard assignment to the best fitting component (the sigma == 0 E-step).
Matrix hard_assignments(const EMState& state, const Samples& batch);

/// Weighted least-squares update for every component.
///
/// Solves (sum_i w_ij X_i X_i^T + r I) beta = sum_i w_ij X_i y_i + r beta_j with a
/// Cholesky factorization, where r is the ridge and beta_j the current value.
/// The ridge pulls toward the current iterate, so for r > 0 exact fixed points
/// of the unregularized map remain fixed points. A component whose
/// responsibility mass is below one sample, or whose regularized Gram matrix
/// has reciprocal condition below 1e-14, keeps its previous beta and is
/// flagged degenerate.
StepResult m_step(const Samples& batch, const Matrix& resp, const EMState& state, const EMConfig& config);

/// One E-step followed by one M-step.
StepResult em_iterate(const EMState& state, const Samples& batch, const EMConfig& config);

/// Sample-splitting EM: a fresh contiguous batch per iteration.
/// Runs min(batches, config.max_iters) iterations unless tol fires first.
RunTrace run_sample_splitting_em(const EMState& init, const Samples& data, Index batches, const EMConfig& config);

/// EM on the full data every iteration.
RunTrace run_pooled_em(const EMState& init, const Samples& data, const EMConfig& config);

namespace detail {

using EStep = std::function<Matrix(const EMState&, const Samples&)>;

/// Shared iteration driver: applies estep + m_step on each batch in turn,
/// recording every state and stopping on tol.
RunTrace iterate(const EMState& init, const std::vector<const Samples*>& batches, const EMConfig& config,
                 const EStep& estep);

}  // namespace detail

}  // namespace mlrem
