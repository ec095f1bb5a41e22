#include "mlrem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mlrem/dataset.hpp"
#include "mlrem/errors.hpp"

namespace mlrem {

namespace {

constexpr Index kExhaustiveMaxK = 8;

struct Objective {
    double max = 0.0;
    double sum = 0.0;
};

Objective evaluate(const Matrix& cost, const std::vector<int>& perm) {
    Objective obj;
    for (std::size_t j = 0; j < perm.size(); ++j) {
        const double c = cost(static_cast<Index>(j), perm[j]);
        obj.max = std::max(obj.max, c);
        obj.sum += c;
    }
    return obj;
}

bool better(const Objective& a, const Objective& b) {
    return a.max < b.max || (a.max == b.max && a.sum < b.sum);
}

// Kuhn's augmenting-path matching restricted to edges with cost <= threshold.
bool try_augment(const Matrix& cost, double threshold, Index row, std::vector<char>& seen,
                 std::vector<Index>& owner) {
    for (Index col = 0; col < cost.cols(); ++col) {
        if (cost(row, col) > threshold || seen[static_cast<std::size_t>(col)]) {
            continue;
        }
        seen[static_cast<std::size_t>(col)] = 1;
        Index& current = owner[static_cast<std::size_t>(col)];
        if (current < 0 || try_augment(cost, threshold, current, seen, owner)) {
            current = row;
            return true;
        }
    }
    return false;
}

bool has_perfect_matching(const Matrix& cost, double threshold) {
    const Index k = cost.rows();
    std::vector<Index> owner(static_cast<std::size_t>(k), -1);
    for (Index row = 0; row < k; ++row) {
        std::vector<char> seen(static_cast<std::size_t>(k), 0);
        if (!try_augment(cost, threshold, row, seen, owner)) {
            return false;
        }
    }
    return true;
}

void check_square(const Matrix& cost) {
    if (cost.rows() != cost.cols() || cost.rows() < 1) {
        throw ConfigError("assignment: cost matrix must be square and nonempty");
    }
    if (!cost.allFinite()) {
        throw NumericalError("assignment: non-finite cost");
    }
}

}  // namespace

Matrix distance_matrix(const Matrix& truth_betas, const Matrix& estimate_betas) {
    const Index k = truth_betas.rows();
    Matrix cost(k, estimate_betas.rows());
    for (Index j = 0; j < k; ++j) {
        for (Index l = 0; l < estimate_betas.rows(); ++l) {
            cost(j, l) = (truth_betas.row(j) - estimate_betas.row(l)).norm();
        }
    }
    return cost;
}

std::vector<int> exhaustive_assignment(const Matrix& cost) {
    check_square(cost);
    std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    Objective best_obj = evaluate(cost, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
        const Objective obj = evaluate(cost, perm);
        if (better(obj, best_obj)) {
            best_obj = obj;
            best = perm;
        }
    }
    return best;
}

std::vector<int> min_sum_assignment(const Matrix& cost) {
    check_square(cost);
    // Potentials formulation with 1-based sentinel row/column 0.
    const Index k = cost.rows();
    const auto size = static_cast<std::size_t>(k + 1);
    std::vector<double> u(size, 0.0), v(size, 0.0), minv(size);
    std::vector<Index> match(size, 0), way(size, 0);
    std::vector<char> used(size);
    for (Index row = 1; row <= k; ++row) {
        match[0] = row;
        Index col0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[static_cast<std::size_t>(col0)] = 1;
            const Index row0 = match[static_cast<std::size_t>(col0)];
            double delta = kInf;
            Index col1 = 0;
            for (Index col = 1; col <= k; ++col) {
                const auto c = static_cast<std::size_t>(col);
                if (used[c]) {
                    continue;
                }
                const double reduced = cost(row0 - 1, col - 1) - u[static_cast<std::size_t>(row0)] - v[c];
                if (reduced < minv[c]) {
                    minv[c] = reduced;
                    way[c] = col0;
                }
                if (minv[c] < delta) {
                    delta = minv[c];
                    col1 = col;
                }
            }
            for (Index col = 0; col <= k; ++col) {
                const auto c = static_cast<std::size_t>(col);
                if (used[c]) {
                    u[static_cast<std::size_t>(match[c])] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
        } while (match[static_cast<std::size_t>(col0)] != 0);
        do {
            const Index col1 = way[static_cast<std::size_t>(col0)];
            match[static_cast<std::size_t>(col0)] = match[static_cast<std::size_t>(col1)];
            col0 = col1;
        } while (col0 != 0);
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    for (Index col = 1; col <= k; ++col) {
        perm[static_cast<std::size_t>(match[static_cast<std::size_t>(col)] - 1)] = static_cast<int>(col - 1);
    }
    return perm;
}

std::vector<int> bottleneck_assignment(const Matrix& cost) {
    check_square(cost);
    std::vector<double> levels(cost.data(), cost.data() + cost.size());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::size_t lo = 0;
    std::size_t hi = levels.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (has_perfect_matching(cost, levels[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    const double threshold = levels[lo];

    // Forbid edges above the bottleneck with a penalty larger than any
    // feasible total, then minimize the sum.
    const double penalty = (cost.sum() + 1.0) * 2.0;
    Matrix restricted = cost;
    for (Index i = 0; i < cost.size(); ++i) {
        if (restricted.data()[i] > threshold) {
            restricted.data()[i] = penalty;
        }
    }
    return min_sum_assignment(restricted);
}

MatchedError error_under(const EMState& estimate, const MixtureParams& truth, const std::vector<int>& permutation) {
    const Index k = truth.k();
    MatchedError out;
    out.permutation = permutation;
    out.per_component_beta_err.resize(k);
    for (Index j = 0; j < k; ++j) {
        const int l = permutation[static_cast<std::size_t>(j)];
        const double err = (estimate.betas.row(l) - truth.betas.row(j)).norm();
        out.per_component_beta_err[j] = err;
        out.max_beta_err = std::max(out.max_beta_err, err);
        out.sum_beta_err += err;
        const double rel = std::abs(estimate.weights[l] - truth.weights[j]) / truth.weights[j];
        out.max_rel_weight_err = std::max(out.max_rel_weight_err, rel);
    }
    return out;
}

MatchedError matched_error(const EMState& estimate, const MixtureParams& truth) {
    if (estimate.k() != truth.k() || estimate.d() != truth.d()) {
        throw ConfigError("matched_error: estimate and truth differ in k or d");
    }
    const Matrix cost = distance_matrix(truth.betas, estimate.betas);
    const std::vector<int> perm =
        truth.k() <= kExhaustiveMaxK ? exhaustive_assignment(cost) : bottleneck_assignment(cost);
    return error_under(estimate, truth, perm);
}

ContractionTrace contraction_trace(const RunTrace& trace, const MixtureParams& truth) {
    if (trace.states.empty()) {
        throw ConfigError("contraction_trace: empty trace");
    }
    ContractionTrace out;
    out.permutation = matched_error(trace.states.front(), truth).permutation;
    for (const EMState& state : trace.states) {
        out.d_m.push_back(error_under(state, truth, out.permutation).max_beta_err);
    }
    for (std::size_t t = 0; t + 1 < out.d_m.size(); ++t) {
        out.ratios.push_back(out.d_m[t] > 0.0 ? out.d_m[t + 1] / out.d_m[t] : kInf);
    }
    return out;
}

Vector default_tau(const MixtureParams& truth, double c_tau, int reference) {
    const SeparationStats sep = separation_stats(truth);
    if (!(truth.sigma > 0.0)) {
        throw ConfigError("default_tau: sigma must be > 0");
    }
    const double k = static_cast<double>(truth.k());
    Vector tau = Vector::Zero(truth.k());
    for (Index j = 0; j < truth.k(); ++j) {
        if (j == reference) {
            continue;
        }
        const double arg = sep.pairwise(j, reference) / truth.sigma * k * sep.rho_pi;
        tau[j] = c_tau * std::sqrt(std::max(0.0, std::log(arg)));
    }
    return tau;
}

EventStats event_diagnostics(const MixtureParams& truth, const EMState& state, const Vector& tau, std::int64_t n_mc,
                             std::uint64_t seed, int reference) {
    truth.validate();
    const Index k = truth.k();
    const Index d = truth.d();
    if (!(truth.sigma > 0.0)) {
        throw ConfigError("event_diagnostics: events are defined in noise units and need sigma > 0");
    }
    if (state.k() != k || state.d() != d || tau.size() != k) {
        throw ConfigError("event_diagnostics: state or tau does not match truth");
    }
    if (reference < 0 || reference >= k) {
        throw ConfigError("event_diagnostics: reference component out of range");
    }
    if (n_mc < 1) {
        throw ConfigError("event_diagnostics: n_mc must be >= 1");
    }

    const std::vector<int> perm = matched_error(state, truth).permutation;
    EMState aligned = state;
    for (Index j = 0; j < k; ++j) {
        aligned.betas.row(j) = state.betas.row(perm[static_cast<std::size_t>(j)]);
        aligned.weights[j] = state.weights[perm[static_cast<std::size_t>(j)]];
    }
    const EMState truth_state = EMState::from_truth(truth);
    const Matrix deviation = aligned.betas - truth.betas;

    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::int64_t> e1(kk, 0), e2(kk, 0), e3(kk, 0);
    EventStats stats;
    stats.reference = reference;
    stats.tau = tau;
    stats.origin_count.assign(kk, 0);
    stats.good_count.assign(kk, 0);
    stats.max_dw_good = Vector::Zero(k);

    const double sqrt32 = 4.0 * std::sqrt(2.0);
    Vector x(d);
    for (std::int64_t i = 0; i < n_mc; ++i) {
        const LabeledDraw draw = draw_labeled_sample(truth, seed, static_cast<std::uint64_t>(i), x);
        const int j = draw.label;
        if (j == reference) {
            continue;
        }
        const auto ju = static_cast<std::size_t>(j);
        ++stats.origin_count[ju];
        const double separation = x.dot(truth.betas.row(j) - truth.betas.row(reference));
        const double drift = std::max(std::abs(x.dot(deviation.row(reference))), std::abs(x.dot(deviation.row(j))));
        const bool in_e1 = std::abs(draw.noise) <= tau[j];
        const bool in_e2 = 4.0 * drift <= std::abs(separation);
        const bool in_e3 = std::abs(separation) / truth.sigma >= sqrt32 * tau[j];
        e1[ju] += in_e1;
        e2[ju] += in_e2;
        e3[ju] += in_e3;
        if (in_e1 && in_e2 && in_e3) {
            ++stats.good_count[ju];
            const double w_now = posterior_weights(aligned, x, draw.response, truth.sigma)[reference];
            const double w_true = posterior_weights(truth_state, x, draw.response, truth.sigma)[reference];
            stats.max_dw_good[j] = std::max(stats.max_dw_good[j], std::abs(w_now - w_true));
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    stats.p_e1 = stats.p_e2 = stats.p_e3 = stats.p_good = Vector::Constant(k, nan);
    stats.bound_dw = Vector::Constant(k, nan);
    for (Index j = 0; j < k; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (j == reference) {
            stats.max_dw_good[j] = nan;
            continue;
        }
        stats.bound_dw[j] = 3.0 * truth.weights[reference] / truth.weights[j] * std::exp(-tau[j] * tau[j]);
        const auto count = static_cast<double>(stats.origin_count[ju]);
        if (count > 0) {
            stats.p_e1[j] = static_cast<double>(e1[ju]) / count;
            stats.p_e2[j] = static_cast<double>(e2[ju]) / count;
            stats.p_e3[j] = static_cast<double>(e3[ju]) / count;
            stats.p_good[j] = static_cast<double>(stats.good_count[ju]) / count;
        }
    }
    return stats;
}

}  // namespace mlrem
