#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "mlrem/dataset.hpp"
#include "mlrem/em.hpp"
#include "mlrem/model.hpp"
#include "mlrem/rng.hpp"

namespace fixtures {

using namespace mlrem;

/// beta_j = r e_j, balanced weights.
inline MixtureParams orthogonal_truth(Index k, Index d, double r, double sigma) {
    MixtureParams p;
    p.betas = Matrix::Zero(k, d);
    for (Index j = 0; j < k; ++j) p.betas(j, j) = r;
    p.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
    p.sigma = sigma;
    return p;
}

inline Matrix random_matrix(CounterRng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

/// Rows drawn from a flat Dirichlet(1,...,1).
inline Matrix random_responsibilities(CounterRng& rng, Index n, Index k) {
    Matrix r(n, k);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < k; ++j) r(i, j) = -std::log(rng.uniform());
        r.row(i) /= r.row(i).sum();
    }
    return r;
}

inline EMState shifted(const MixtureParams& truth, CounterRng& rng, double radius) {
    EMState s = EMState::from_truth(truth);
    for (Index j = 0; j < truth.k(); ++j) {
        Vector u(truth.d());
        for (Index c = 0; c < truth.d(); ++c) u[c] = rng.normal();
        s.betas.row(j) += radius / u.norm() * u.transpose();
    }
    return s;
}

/// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("mlrem_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
