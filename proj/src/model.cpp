#include "mlrem/model.hpp"

#include <cmath>
#include <string>

#include "mlrem/errors.hpp"
#include "mlrem/metrics.hpp"

namespace mlrem {

namespace {

void check_simplex(const Vector& weights, double tol, const char* what) {
    for (Index j = 0; j < weights.size(); ++j) {
        if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) {
            throw ConfigError(std::string(what) + ": weight " + std::to_string(j) + " is negative or not finite");
        }
    }
    if (std::abs(weights.sum() - 1.0) > tol) {
        throw ConfigError(std::string(what) + ": weights must sum to 1 (got " + std::to_string(weights.sum()) + ")");
    }
}

}  // namespace

void MixtureParams::validate() const {
    if (k() < 1 || d() < 1) {
        throw ConfigError("mixture params: need k >= 1 and d >= 1");
    }
    if (weights.size() != k()) {
        throw ConfigError("mixture params: weights length does not match number of betas");
    }
    if (!betas.allFinite()) {
        throw ConfigError("mixture params: betas must be finite");
    }
    check_simplex(weights, 1e-12, "mixture params");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("mixture params: sigma must be finite and >= 0");
    }
}

void EMState::validate(double weight_tol) const {
    if (k() < 1 || d() < 1 || weights.size() != k()) {
        throw ConfigError("em state: inconsistent k/d");
    }
    if (!betas.allFinite()) {
        throw NumericalError("em state: non-finite regression vector");
    }
    check_simplex(weights, weight_tol, "em state");
}

SeparationStats separation_stats(const MixtureParams& params) {
    params.validate();
    const Index k = params.k();
    if (params.weights.minCoeff() <= 0.0) {
        throw ConfigError("separation_stats: zero mixing weight makes rho_pi undefined");
    }

    SeparationStats stats;
    stats.pairwise = Matrix::Zero(k, k);
    stats.pi_min = params.weights.minCoeff();
    stats.rho_pi = params.weights.maxCoeff() / stats.pi_min;
    if (k == 1) {
        return stats;
    }

    stats.r_min = kInf;
    stats.r_max = 0.0;
    for (Index i = 0; i < k; ++i) {
        for (Index j = i + 1; j < k; ++j) {
            const double dist = (params.betas.row(i) - params.betas.row(j)).norm();
            stats.pairwise(i, j) = dist;
            stats.pairwise(j, i) = dist;
            stats.r_min = std::min(stats.r_min, dist);
            stats.r_max = std::max(stats.r_max, dist);
        }
    }
    return stats;
}

ConditionReport check_local_conditions(const MixtureParams& truth, const EMState& init, ConditionConstants constants) {
    if (truth.k() != init.k() || truth.d() != init.d()) {
        throw ConfigError("check_local_conditions: truth and init differ in k or d");
    }
    const SeparationStats sep = separation_stats(truth);
    const double k = static_cast<double>(truth.k());
    const double k_rho = k * sep.rho_pi;

    ConditionReport report;
    report.constants_used = constants;
    report.snr = truth.sigma > 0.0 ? sep.r_min / truth.sigma : kInf;
    report.snr_threshold = constants.big_c * k_rho * std::pow(std::log(k_rho), 2);
    // The radius clause is scale-free: both sides scale with sigma, so it is
    // evaluated in the caller's units.
    report.init_beta_bound = truth.k() > 1 ? constants.small_c * sep.r_min / (k_rho * std::log(k)) : kInf;

    const MatchedError match = matched_error(init, truth);
    report.init_beta_radius = match.max_beta_err;
    report.init_weight_ok = true;
    for (Index j = 0; j < truth.k(); ++j) {
        const double start = init.weights[match.permutation[static_cast<std::size_t>(j)]];
        if (std::abs(start - truth.weights[j]) > truth.weights[j] / 2.0) {
            report.init_weight_ok = false;
        }
    }
    report.satisfied = report.snr >= report.snr_threshold && report.init_beta_radius <= report.init_beta_bound &&
                       report.init_weight_ok;
    return report;
}

}  // namespace mlrem
