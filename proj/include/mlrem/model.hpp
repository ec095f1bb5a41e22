#pragma once

#include <Eigen/Dense>

#include <limits>

namespace mlrem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Ground-truth (or estimated) mixture of linear regressions.
///
/// Row j of `betas` is the regression vector of component j (k x d), `weights`
/// holds the mixing probabilities and `sigma` the standard deviation of the
/// additive Gaussian noise. sigma == 0 is the exact noiseless model.
struct MixtureParams {
    Matrix betas;
    Vector weights;
    double sigma = 0.0;

    Index k() const { return betas.rows(); }
    Index d() const { return betas.cols(); }

    /// Throws ConfigError unless k, d >= 1, weights lie on the simplex (1e-12)
    /// and sigma >= 0.
    void validate() const;
};

/// Current EM iterate: regression vectors and mixing weights.
struct EMState {
    Matrix betas;
    Vector weights;

    Index k() const { return betas.rows(); }
    Index d() const { return betas.cols(); }

    void validate(double weight_tol = 1e-10) const;

    static EMState from_truth(const MixtureParams& truth) { return {truth.betas, truth.weights}; }
};

struct SeparationStats {
    double r_min = kInf;
    double r_max = kInf;
    double rho_pi = 1.0;  // max weight / min weight
    double pi_min = 1.0;
    Matrix pairwise;  // k x k Euclidean distances between regression vectors
};

/// Universal constants of the local convergence conditions. Their values are
/// not known; callers choose them and reports carry them along.
struct ConditionConstants {
    double big_c = 1.0;    // SNR threshold multiplier
    double small_c = 0.5;  // initialization radius multiplier
};

struct ConditionReport {
    double snr = kInf;            // R_min / sigma
    double snr_threshold = 0.0;   // C k rho log^2(k rho)
    double init_beta_radius = 0;  // max_j ||beta_j^0 - beta_j*|| under the matched permutation
    double init_beta_bound = kInf;  // c R_min / (k rho log k), same units as init_beta_radius
    bool init_weight_ok = false;  // |pi_j^0 - pi_j*| <= pi_j*/2 for all j
    bool satisfied = false;
    ConditionConstants constants_used;
};

/// Pairwise distances and weight ratios. For k == 1 the distances are +inf.
/// Throws ConfigError when any weight is zero.
SeparationStats separation_stats(const MixtureParams& params);

/// Evaluates the SNR, initialization radius and initial weight clauses.
ConditionReport check_local_conditions(const MixtureParams& truth, const EMState& init,
                                       ConditionConstants constants = {});

}  // namespace mlrem
