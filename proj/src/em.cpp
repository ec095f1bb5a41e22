#include "mlrem/em.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlrem/errors.hpp"

namespace mlrem {

namespace {

constexpr double kMinRcond = 1e-14;

using StridedRow = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;
using ConstStridedRow = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

// Fills `out` with the posterior for one residual row.
void posterior_row(const Vector& log_weights, const ConstStridedRow& residual, double sigma, StridedRow out) {
    const Index k = log_weights.size();
    if (sigma > 0.0) {
        const double scale = 1.0 / (2.0 * sigma * sigma);
        double peak = -kInf;
        for (Index j = 0; j < k; ++j) {
            out[j] = log_weights[j] - residual[j] * residual[j] * scale;
            peak = std::max(peak, out[j]);
        }
        double total = 0.0;
        for (Index j = 0; j < k; ++j) {
            out[j] = std::exp(out[j] - peak);
            total += out[j];
        }
        out /= total;
        return;
    }
    Index best = -1;
    for (Index j = 0; j < k; ++j) {
        if (log_weights[j] == -kInf) {
            continue;
        }
        if (best < 0 || std::abs(residual[j]) < std::abs(residual[best])) {
            best = j;
        }
    }
    out.setZero();
    out[best] = 1.0;
}

Vector log_weights_of(const EMState& state) {
    return state.weights.array().log().matrix();
}

double max_movement(const EMState& before, const EMState& after) {
    return (after.betas - before.betas).rowwise().norm().maxCoeff();
}

}  // namespace

void EMConfig::validate(Index k) const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("em config: sigma must be finite and >= 0");
    }
    if (ridge && !(*ridge >= 0.0)) {
        throw ConfigError("em config: ridge must be >= 0");
    }
    if (max_iters < 0) {
        throw ConfigError("em config: max_iters must be >= 0");
    }
    if (!(tol >= 0.0)) {
        throw ConfigError("em config: tol must be >= 0");
    }
    if (!(min_weight_floor >= 0.0) || min_weight_floor >= 1.0 / static_cast<double>(k)) {
        throw ConfigError("em config: min_weight_floor must lie in [0, 1/k)");
    }
}

int RunTrace::degenerate_count() const {
    int count = 0;
    for (const auto& flags : degenerate) {
        count += static_cast<int>(std::count(flags.begin(), flags.end(), true));
    }
    return count;
}

Vector posterior_weights(const EMState& state, const Eigen::Ref<const Vector>& x, double y, double sigma) {
    if (x.size() != state.d()) {
        throw ConfigError("posterior_weights: x has wrong dimension");
    }
    const Eigen::RowVectorXd residual = (y - (state.betas * x).array()).matrix().transpose();
    Eigen::RowVectorXd out(state.k());
    posterior_row(log_weights_of(state), residual, sigma, out);
    return out.transpose();
}

Matrix responsibilities(const EMState& state, const Samples& batch, double sigma) {
    if (batch.d() != state.d()) {
        throw ConfigError("responsibilities: batch dimension does not match state");
    }
    const Vector log_weights = log_weights_of(state);
    Matrix residual = -(batch.design * state.betas.transpose());
    residual.colwise() += batch.response;
    Matrix out(batch.n(), state.k());
    for (Index i = 0; i < batch.n(); ++i) {
        posterior_row(log_weights, residual.row(i), sigma, out.row(i));
    }
    return out;
}

Matrix hard_assignments(const EMState& state, const Samples& batch) {
    return responsibilities(state, batch, 0.0);
}

StepResult m_step(const Samples& batch, const Matrix& resp, const EMState& state, const EMConfig& config) {
    const Index n = batch.n();
    const Index d = batch.d();
    const Index k = state.k();
    if (resp.rows() != n || resp.cols() != k || d != state.d()) {
        throw ConfigError("m_step: responsibilities or batch shape does not match state");
    }
    const double ridge = config.ridge_for(n);

    StepResult result{state, std::vector<bool>(static_cast<std::size_t>(k), false)};
    Vector mass(k);
    for (Index j = 0; j < k; ++j) {
        const auto w = resp.col(j);
        mass[j] = w.sum();
        if (!(mass[j] >= 1.0)) {
            result.degenerate[static_cast<std::size_t>(j)] = true;
            continue;
        }
        const Matrix weighted = batch.design.array().colwise() * w.array();
        Matrix gram = weighted.transpose() * batch.design;
        gram.diagonal().array() += ridge;
        Vector rhs = weighted.transpose() * batch.response;
        rhs += ridge * state.betas.row(j).transpose();

        const Eigen::LLT<Matrix> llt(gram);
        if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinRcond)) {
            result.degenerate[static_cast<std::size_t>(j)] = true;
            continue;
        }
        result.state.betas.row(j) = llt.solve(rhs).transpose();
    }

    if (config.weight_mode == WeightMode::estimated) {
        Vector weights = mass / static_cast<double>(n);
        weights = weights.cwiseMax(config.min_weight_floor);
        result.state.weights = weights / weights.sum();
    }
    if (!result.state.betas.allFinite() || !result.state.weights.allFinite()) {
        throw NumericalError("m_step: non-finite parameters");
    }
    return result;
}

StepResult em_iterate(const EMState& state, const Samples& batch, const EMConfig& config) {
    if (batch.n() < 1) {
        throw ConfigError("em_iterate: empty batch");
    }
    return m_step(batch, responsibilities(state, batch, config.sigma), state, config);
}

namespace detail {

RunTrace iterate(const EMState& init, const std::vector<const Samples*>& batches, const EMConfig& config,
                 const EStep& estep) {
    init.validate();
    config.validate(init.k());
    RunTrace trace;
    trace.states.push_back(init);
    for (const Samples* batch : batches) {
        if (batch->d() != init.d()) {
            throw ConfigError("em: data dimension does not match initial state");
        }
        const EMState& current = trace.states.back();
        StepResult step = m_step(*batch, estep(current, *batch), current, config);
        const double moved = max_movement(current, step.state);
        trace.states.push_back(std::move(step.state));
        trace.degenerate.push_back(std::move(step.degenerate));
        trace.batch_sizes.push_back(batch->n());
        ++trace.iterations_used;
        if (moved <= config.tol) {
            trace.converged = true;
            break;
        }
    }
    return trace;
}

}  // namespace detail

RunTrace run_sample_splitting_em(const EMState& init, const Samples& data, Index batches, const EMConfig& config) {
    Dataset unlabeled{data, std::nullopt, 0};
    const std::vector<Dataset> parts = split_batches(unlabeled, batches);
    const auto count = std::min<std::size_t>(parts.size(), static_cast<std::size_t>(std::max(config.max_iters, 0)));
    std::vector<const Samples*> order;
    for (std::size_t t = 0; t < count; ++t) {
        order.push_back(&parts[t].samples);
    }
    const double sigma = config.sigma;
    return detail::iterate(init, order, config,
                           [sigma](const EMState& s, const Samples& b) { return responsibilities(s, b, sigma); });
}

RunTrace run_pooled_em(const EMState& init, const Samples& data, const EMConfig& config) {
    if (data.n() < 1) {
        throw ConfigError("run_pooled_em: empty data");
    }
    const std::vector<const Samples*> order(static_cast<std::size_t>(std::max(config.max_iters, 0)), &data);
    const double sigma = config.sigma;
    return detail::iterate(init, order, config,
                           [sigma](const EMState& s, const Samples& b) { return responsibilities(s, b, sigma); });
}

}  // namespace mlrem
