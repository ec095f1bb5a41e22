#pragma once

#include <cstdint>
#include <vector>

#include "mlrem/em.hpp"
#include "mlrem/model.hpp"

namespace mlrem {

/// Error of an estimate after the best relabeling of its components.
///
/// permutation[j] is the estimate component matched to truth component j, and
/// per_component_beta_err[j] = ||beta_hat_{permutation[j]} - beta*_j||.
struct MatchedError {
    std::vector<int> permutation;
    double max_beta_err = 0.0;
    double sum_beta_err = 0.0;
    Vector per_component_beta_err;
    double max_rel_weight_err = 0.0;  // max_j |pi_hat_{perm(j)} - pi*_j| / pi*_j
};

/// Minimizes the largest per-component distance over relabelings; ties go to
/// the smaller sum of distances. For k <= 8 the search is exhaustive and any
/// remaining tie goes to the lexicographically first permutation; larger k
/// uses bottleneck_assignment.
MatchedError matched_error(const EMState& estimate, const MixtureParams& truth);

/// Errors of `estimate` under a fixed `permutation` (no search).
MatchedError error_under(const EMState& estimate, const MixtureParams& truth, const std::vector<int>& permutation);

/// cost(j, l) = ||truth_j - estimate_l||.
Matrix distance_matrix(const Matrix& truth_betas, const Matrix& estimate_betas);

/// Bottleneck assignment on a square cost matrix: the smallest threshold that
/// admits a perfect matching, then a minimum-sum matching below it
/// (Hungarian algorithm). Returns row -> column.
std::vector<int> bottleneck_assignment(const Matrix& cost);

/// Exhaustive search in lexicographic order with the same objective.
std::vector<int> exhaustive_assignment(const Matrix& cost);

/// Minimum-sum assignment (Hungarian algorithm, O(k^3)). Returns row -> column.
std::vector<int> min_sum_assignment(const Matrix& cost);

struct ContractionTrace {
    std::vector<int> permutation;  // frozen from the initial state
    std::vector<double> d_m;       // one per state
    std::vector<double> ratios;    // d_m[t+1] / d_m[t], +inf when d_m[t] == 0
};

ContractionTrace contraction_trace(const RunTrace& trace, const MixtureParams& truth);

/// Monte Carlo estimates for the good-event construction around a reference
/// component. Entries at index `reference` are NaN (not applicable).
struct EventStats {
    int reference = 0;
    Vector tau;
    Vector p_e1;    // P(|e| <= tau_j | origin j)
    Vector p_e2;    // P(4 max(|<X,D_ref>|, |<X,D_j>|) <= |<X, beta*_j - beta*_ref>| | origin j)
    Vector p_e3;    // P(|<X, beta*_j - beta*_ref>| / sigma >= 4 sqrt(2) tau_j | origin j)
    Vector p_good;  // P(all three | origin j)
    Vector max_dw_good;  // max |w_ref(state) - w_ref(truth)| over good samples
    Vector bound_dw;     // 3 (pi*_ref / pi*_j) exp(-tau_j^2)
    std::vector<std::int64_t> origin_count;
    std::vector<std::int64_t> good_count;
};

/// Draws n_mc labeled samples (stream i of `seed` for sample i) and evaluates
/// the events in units of sigma. `state` is aligned to the truth by
/// matched_error before the deviations D_j are formed. Requires sigma > 0.
EventStats event_diagnostics(const MixtureParams& truth, const EMState& state, const Vector& tau, std::int64_t n_mc,
                             std::uint64_t seed, int reference = 0);

/// tau_j = c_tau * sqrt(log(R_{j,ref} / sigma * k * rho_pi)), clamped at zero.
Vector default_tau(const MixtureParams& truth, double c_tau = 1.0, int reference = 0);

}  // namespace mlrem
