#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlrem/em.hpp"
#include "mlrem/init.hpp"
#include "mlrem/io.hpp"
#include "mlrem/metrics.hpp"
#include "mlrem/model.hpp"

namespace mlrem {

inline constexpr const char* kToolVersion = "mlrem 0.1.0";

enum class Estimator { em_split, em_pooled, am };
enum class SweepAxis { n, sigma, beta_scale, init_radius };

const char* to_string(Estimator estimator);
const char* to_string(SweepAxis axis);

struct Sweep {
    SweepAxis axis = SweepAxis::n;
    std::vector<double> values;  // strictly positive, strictly monotone
};

/// A fully resolved experiment description.
///
/// The noise level used by the estimators is always truth.sigma (known
/// variance); em.sigma mirrors it after resolution.
struct Scenario {
    std::string id = "scenario";
    MixtureParams truth;
    Json truth_spec;  // the truth object as written, kept for audit
    double beta_scale = 1.0;
    InitSpec init;
    Estimator estimator = Estimator::em_split;
    Index n = 0;
    Index batches = 1;  // T
    int trials = 1;
    std::uint64_t base_seed = 0;
    std::optional<Sweep> sweep;
    EMConfig em;
    ConditionConstants constants;

    std::uint64_t trial_seed(int trial) const { return base_seed + static_cast<std::uint64_t>(trial); }
};

/// Parses and validates a scenario document; throws ConfigError naming the
/// offending field.
Scenario scenario_from_json(const Json& doc);
Scenario load_scenario(const std::filesystem::path& path);
/// The resolved scenario with every default written out.
Json scenario_to_json(const Scenario& scenario);

/// Copy of `scenario` with one sweep axis set to `value`. beta_scale scales
/// both the true regression vectors and the initialization radius.
Scenario with_axis_value(const Scenario& scenario, SweepAxis axis, double value);

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    RunTrace trace;
    ContractionTrace contraction;
    MatchedError final_error;
    double oracle_error = 0.0;  // label-oracle OLS on the last batch used
    ConditionReport condition;
};

/// The dataset every trial of the scenario draws (seed = trial seed).
Dataset trial_dataset(const Scenario& scenario, int trial);
EMState trial_init(const Scenario& scenario, const Dataset& data, int trial);
TrialResult run_trial(const Scenario& scenario, int trial);

/// Runs all trials on up to `jobs` threads; results are ordered by trial.
std::vector<TrialResult> run_trials(const Scenario& scenario, int jobs);

/// Per-component OLS on the true labels, max_j ||beta_hat_j - beta*_j||.
double label_oracle_error(const MixtureParams& truth, const Dataset& data);

Json summarize(const Scenario& scenario, const std::vector<TrialResult>& results);

/// Writes trace_trial_XXX.csv for every trial and summary.json into out_dir;
/// returns the summary.
Json cmd_run(const Scenario& scenario, const std::filesystem::path& out_dir, int jobs);

/// Runs cmd_run per sweep value into out_dir/<axis>_<index>/, writes
/// sweep.csv (axis,value,trial,final_error,iterations,degenerate_count) and
/// sweep_summary.json with the log-log slope of median final error.
Json cmd_sweep(const Scenario& scenario, const std::filesystem::path& out_dir, int jobs);

/// Markdown comparison table over summary files, sorted by scenario id and
/// then estimator (em-split, em-pooled, am). Duplicates are dropped with a
/// warning on `warnings`.
std::string cmd_report(const std::vector<std::filesystem::path>& summaries, std::ostream& warnings);

}  // namespace mlrem
