#include "mlrem/init.hpp"

#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mlrem/errors.hpp"
#include "mlrem/rng.hpp"

namespace mlrem {

void InitSpec::validate() const {
    if (!(beta_radius >= 0.0)) {
        throw ConfigError("init: beta_radius must be >= 0");
    }
    if (!(weight_rel_radius >= 0.0 && weight_rel_radius <= 0.5)) {
        throw ConfigError("init: weight_rel_radius must lie in [0, 0.5]");
    }
}

EMState perturbed_init(const MixtureParams& truth, const InitSpec& spec) {
    truth.validate();
    spec.validate();
    if (spec.kind != InitKind::perturbed_oracle) {
        throw ConfigError("perturbed_init: init kind must be perturbed-oracle");
    }
    EMState state = EMState::from_truth(truth);
    for (Index j = 0; j < truth.k(); ++j) {
        CounterRng rng(spec.seed, static_cast<std::uint64_t>(j));
        Vector direction(truth.d());
        for (Index c = 0; c < truth.d(); ++c) {
            direction[c] = rng.normal();
        }
        const double eps = spec.weight_rel_radius * (2.0 * rng.uniform() - 1.0);
        if (spec.beta_radius > 0.0) {
            state.betas.row(j) += spec.beta_radius / direction.norm() * direction.transpose();
        }
        state.weights[j] *= 1.0 + eps;
    }
    state.weights /= state.weights.sum();
    return state;
}

Vector ols(const Eigen::Ref<const Matrix>& design, const Eigen::Ref<const Vector>& response, double ridge) {
    Matrix gram = design.transpose() * design;
    gram.diagonal().array() += ridge;
    const Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("ols: factorization failed");
    }
    return ldlt.solve(design.transpose() * response);
}

EMState random_init(const Samples& data, Index k, std::uint64_t seed) {
    if (k < 1) {
        throw ConfigError("random_init: k must be >= 1");
    }
    const Index n = data.n();
    const Index d = data.d();
    if (n < k * d) {
        throw ConfigError("random_init: need n >= k*d samples (n=" + std::to_string(n) + ", k*d=" +
                          std::to_string(k * d) + ")");
    }

    // Fisher-Yates with the portable generator, so the grouping is reproducible.
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    CounterRng rng(seed, 0);
    for (Index i = n - 1; i > 0; --i) {
        const auto swap_with = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(swap_with)]);
    }

    EMState state{Matrix(k, d), Vector::Constant(k, 1.0 / static_cast<double>(k))};
    Index start = 0;
    for (Index j = 0; j < k; ++j) {
        const Index size = n / k + (j < n % k ? 1 : 0);
        Matrix x(size, d);
        Vector y(size);
        for (Index r = 0; r < size; ++r) {
            const Index row = order[static_cast<std::size_t>(start + r)];
            x.row(r) = data.design.row(row);
            y[r] = data.response[row];
        }
        state.betas.row(j) = ols(x, y, 1e-8).transpose();
        start += size;
    }
    return state;
}

}  // namespace mlrem
