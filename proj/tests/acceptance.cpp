// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mlrem/baseline.hpp"
#include "mlrem/em.hpp"
#include "mlrem/experiment.hpp"
#include "mlrem/init.hpp"
#include "mlrem/metrics.hpp"
#include "mlrem/stats.hpp"
#include "oracles.hpp"

using namespace mlrem;
using fixtures::orthogonal_truth;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// k = 3 balanced, d = 10, beta_j = 10 e_j, sigma = 0.1, init radius 1.0, T = 8.
Json contraction_scenario() {
    return Json::parse(R"({
        "id": "contraction",
        "truth": {"construction": "orthogonal-scaled", "k": 3, "d": 10, "r": 10.0, "sigma": 0.1},
        "init": {"kind": "perturbed-oracle", "beta_radius": 1.0, "weight_rel_radius": 0.1, "seed": 1},
        "estimator": "em-split",
        "n": 160000, "T": 8, "trials": 20, "base_seed": 1000,
        "em": {"weight_mode": "estimated", "tol": 0}
    })");
}

// R_min / sigma = 3 with sigma = 1.
Json low_snr_scenario(const char* estimator) {
    Json doc = Json::parse(R"({
        "id": "low-snr",
        "truth": {"construction": "orthogonal-scaled", "k": 3, "d": 10, "sigma": 1.0},
        "init": {"kind": "perturbed-oracle", "beta_radius": 0.3, "weight_rel_radius": 0.0, "seed": 2},
        "n": 20000, "T": 1, "trials": 20, "base_seed": 5000,
        "em": {"weight_mode": "estimated", "max_iters": 100}
    })");
    doc["truth"]["r"] = 3.0 / std::sqrt(2.0);
    doc["estimator"] = estimator;
    return doc;
}

Json sweep_over(const char* axis, const std::vector<double>& values) {
    Json doc = contraction_scenario();
    doc["sweep"] = {{"axis", axis}, {"values", values}};
    return doc;
}

Outcome c1_mstep_oracle() {
    CounterRng rng(101, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = 1 + static_cast<Index>(rng.below(5));
        const Index k = 1 + static_cast<Index>(rng.below(4));
        const Index n = 20 + static_cast<Index>(rng.below(81));
        Samples batch{fixtures::random_matrix(rng, n, d), fixtures::random_matrix(rng, n, 1)};
        const Matrix resp = fixtures::random_responsibilities(rng, n, k);
        EMConfig config;
        config.ridge = 0.0;
        const EMState start{fixtures::random_matrix(rng, k, d), Vector::Constant(k, 1.0 / static_cast<double>(k))};
        const StepResult step = m_step(batch, resp, start, config);
        for (Index j = 0; j < k; ++j) {
            const auto expect = oracle::weighted_least_squares(batch.design, batch.response, resp.col(j));
            for (Index c = 0; c < d; ++c) {
                const double e = expect[static_cast<std::size_t>(c)];
                const double rel = std::abs(step.state.betas(j, c) - e) / std::max(std::abs(e), 1e-300);
                worst = std::max(worst, rel);
            }
        }
    }
    return {worst <= 1e-10, "max relative deviation " + fmt("%.3g", worst) + " (tol 1e-10)"};
}

Outcome c2_fixed_point_and_recovery() {
    const auto truth = orthogonal_truth(3, 10, 10.0, 0.0);
    EMConfig config;
    config.sigma = 0.0;
    const Dataset probe = sample_dataset(truth, 20000, 77);
    const double moved =
        (em_iterate(EMState::from_truth(truth), probe.samples, config).state.betas - truth.betas).cwiseAbs().maxCoeff();

    config.max_iters = 30;
    int recovered = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset data = sample_dataset(truth, 20000, 2000 + seed);
        const EMState init = perturbed_init(truth, {InitKind::perturbed_oracle, 0.1, 0.0, 3000 + seed});
        const double err = matched_error(run_pooled_em(init, data.samples, config).final_state(), truth).max_beta_err;
        worst = std::max(worst, err);
        recovered += err <= 1e-8 ? 1 : 0;
    }
    const bool pass = moved <= 1e-12 && recovered >= 18;
    return {pass, "fixed-point move " + fmt("%.3g", moved) + "; recovered " + std::to_string(recovered) +
                      "/20 seeds to 1e-8 (worst " + fmt("%.3g", worst) + ")"};
}

Outcome c3_contraction() {
    const Scenario s = scenario_from_json(contraction_scenario());
    const auto results = run_trials(s, 1);
    std::vector<double> per_seed_max;
    bool all_ok = true;
    int checked = 0;
    for (const TrialResult& r : results) {
        const double floor = 3.0 * r.oracle_error;
        double seed_max = 0.0;
        for (std::size_t t = 0; t < r.contraction.ratios.size(); ++t) {
            if (r.contraction.d_m[t] <= floor) break;
            seed_max = std::max(seed_max, r.contraction.ratios[t]);
            ++checked;
        }
        all_ok = all_ok && seed_max <= 0.7;
        per_seed_max.push_back(seed_max);
    }
    const double med = median(per_seed_max);
    const double worst = *std::max_element(per_seed_max.begin(), per_seed_max.end());
    return {all_ok && med <= 0.6 && checked >= 20,
            "worst ratio " + fmt("%.4f", worst) + " (<= 0.7), median of per-seed max " + fmt("%.4f", med) +
                " (<= 0.6), " + std::to_string(checked) + " ratios checked above 3x oracle floor"};
}

Outcome sweep_check(const char* axis, const std::vector<double>& values, const std::function<Outcome(const Json&)>& judge) {
    fixtures::TempDir dir(std::string("accept_") + axis);
    const Json out = cmd_sweep(scenario_from_json(sweep_over(axis, values)), dir.path(), 1);
    return judge(out);
}

std::string medians_of(const Json& out) {
    std::string s = "medians";
    for (const Json& p : out.at("points")) s += " " + fmt("%.4g", p.at("median_final_error").get<double>());
    return s;
}

Outcome c4_sample_scaling() {
    // n is the total sample count; n/T in {4000, 16000, 64000}.
    return sweep_check("n", {32000, 128000, 512000}, [](const Json& out) {
        const double slope = out.at("loglog_slope").get<double>();
        return Outcome{slope >= -0.65 && slope <= -0.35, "slope " + fmt("%.4f", slope) + " in [-0.65, -0.35]; " +
                                                             medians_of(out)};
    });
}

Outcome c5_noise_scaling() {
    return sweep_check("sigma", {0.2, 0.1, 0.05}, [](const Json& out) {
        const double slope = out.at("loglog_slope").get<double>();
        return Outcome{slope >= 0.8 && slope <= 1.2,
                       "slope " + fmt("%.4f", slope) + " in [0.8, 1.2]; " + medians_of(out)};
    });
}

Outcome c6_scale_invariance() {
    return sweep_check("beta_scale", {1, 3, 10}, [](const Json& out) {
        const double ratio = out.at("max_over_min_median").get<double>();
        return Outcome{ratio <= 2.0, "max/min median " + fmt("%.4f", ratio) + " (<= 2); " + medians_of(out)};
    });
}

Outcome c7_event_diagnostics() {
    const Scenario s = scenario_from_json(contraction_scenario());
    const Dataset data = trial_dataset(s, 0);
    const EMState state = trial_init(s, data, 0);
    const Vector tau = default_tau(s.truth);
    const EventStats stats = event_diagnostics(s.truth, state, tau, 100000, 4242);
    bool pass = true;
    std::string detail = "tau " + fmt("%.4f", tau[1]);
    for (Index j = 0; j < s.truth.k(); ++j) {
        if (j == stats.reference) continue;
        pass = pass && stats.p_good[j] >= 0.5 && stats.max_dw_good[j] <= stats.bound_dw[j];
        detail += "; j=" + std::to_string(j) + " p_good " + fmt("%.4f", stats.p_good[j]) + " max|dw| " +
                  fmt("%.3g", stats.max_dw_good[j]) + " bound " + fmt("%.3g", stats.bound_dw[j]);
    }
    return {pass, detail};
}

Outcome c8_matching_oracle() {
    CounterRng rng(808, 0);
    int mismatches = 0, cases = 0;
    for (Index k = 2; k <= 6; ++k) {
        for (int trial = 0; trial < 200; ++trial) {
            const Index d = 1 + static_cast<Index>(rng.below(5));
            const MixtureParams truth{fixtures::random_matrix(rng, k, d), Vector::Constant(k, 1.0 / static_cast<double>(k)), 1.0};
            const EMState est{fixtures::random_matrix(rng, k, d), truth.weights};
            const MatchedError got = matched_error(est, truth);
            const auto expect = oracle::brute_force_match(truth.betas, est.betas);
            mismatches += (got.permutation != expect.perm || got.max_beta_err != expect.max) ? 1 : 0;
            ++cases;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(cases) + " instances"};
}

Outcome c9_posterior_robustness() {
    CounterRng rng(909, 0);
    int bad = 0;
    double worst_sum = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Index k = 1 + static_cast<Index>(rng.below(6));
        const Index d = 1 + static_cast<Index>(rng.below(4));
        const double scale = std::pow(10.0, 6.0 * rng.uniform());
        EMState s{fixtures::random_matrix(rng, k, d) * scale, Vector(k)};
        for (Index j = 0; j < k; ++j) s.weights[j] = 1e-8 + rng.uniform();
        s.weights /= s.weights.sum();
        Vector x(d);
        for (Index c = 0; c < d; ++c) x[c] = rng.normal();
        const double y = scale * rng.normal() * 3.0;
        const double sigma = trial % 10 == 0 ? 0.0 : std::pow(10.0, -3.0 + 4.0 * rng.uniform());
        const Vector w = posterior_weights(s, x, y, sigma);
        const double err = std::abs(w.sum() - 1.0);
        worst_sum = std::max(worst_sum, err);
        if (!w.allFinite() || err > 1e-12 || (w.array() < 0.0).any() || (w.array() > 1.0).any()) ++bad;
    }
    return {bad == 0, std::to_string(bad) + " bad rows in 10000 cases; worst |sum-1| " + fmt("%.3g", worst_sum)};
}

Outcome c10_baseline() {
    const auto em = run_trials(scenario_from_json(low_snr_scenario("em-pooled")), 1);
    const auto am = run_trials(scenario_from_json(low_snr_scenario("am")), 1);
    std::vector<double> em_err, am_err;
    int em_wins = 0;
    for (std::size_t t = 0; t < em.size(); ++t) {
        em_err.push_back(em[t].final_error.max_beta_err);
        am_err.push_back(am[t].final_error.max_beta_err);
        em_wins += em_err.back() < am_err.back() ? 1 : 0;
    }
    const double em_med = median(em_err), am_med = median(am_err);
    return {em_med < am_med, "EM median " + fmt("%.4f", em_med) + " < AM median " + fmt("%.4f", am_med) + "; EM better in " +
                                 std::to_string(em_wins) + "/20 paired seeds"};
}

Outcome c11_determinism() {
    Json doc = low_snr_scenario("em-pooled");
    doc["trials"] = 8;
    const Scenario s = scenario_from_json(doc);
    fixtures::TempDir a("accept_det_a"), b("accept_det_b"), c("accept_det_c");
    const Json first = cmd_run(s, a.path(), 1);
    cmd_run(s, b.path(), 1);
    const Json threaded = cmd_run(s, c.path(), 4);
    const bool identical = slurp(a / "summary.json") == slurp(b / "summary.json");

    double worst = 0.0;
    auto compare = [&](double x, double y) {
        worst = std::max(worst, std::abs(x - y) / std::max(std::abs(x), 1e-300));
    };
    for (const char* key : {"final_error", "oracle_error", "iterations"}) {
        compare(first.at(key).at("median").get<double>(), threaded.at(key).at("median").get<double>());
    }
    const Json& p1 = first.at("per_iteration");
    const Json& p2 = threaded.at("per_iteration");
    bool same_shape = p1.size() == p2.size();
    for (std::size_t t = 0; same_shape && t < p1.size(); ++t) {
        compare(p1[t].at("median").get<double>(), p2[t].at("median").get<double>());
    }
    return {identical && same_shape && worst <= 1e-9,
            std::string("single-threaded reruns ") + (identical ? "byte-identical" : "DIFFER") +
                "; 4-thread medians max relative deviation " + fmt("%.3g", worst)};
}

struct Criterion {
    const char* name;
    double budget_s;
    Outcome (*run)();
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"1 m-step oracle equivalence", 5, c1_mstep_oracle},
        {"2 fixed point and exact noiseless recovery", 60, c2_fixed_point_and_recovery},
        {"3 per-iteration contraction", 300, c3_contraction},
        {"4 error scales as n^-1/2", 900, c4_sample_scaling},
        {"5 error scales linearly in sigma", 600, c5_noise_scaling},
        {"6 error independent of beta scale", 600, c6_scale_invariance},
        {"7 good-event probabilities and weight bound", 60, c7_event_diagnostics},
        {"8 permutation matching vs exhaustive search", 10, c8_matching_oracle},
        {"9 posterior numerical robustness", 60, c9_posterior_robustness},
        {"10 EM beats alternating minimization at low SNR", 600, c10_baseline},
        {"11 determinism", 600, c11_determinism},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = outcome.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s criterion %s: %s [%.1fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", c.name,
                    outcome.detail.c_str(), secs, c.budget_s, in_time ? "" : ", OVER BUDGET");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
