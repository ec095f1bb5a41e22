#include "mlrem/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mlrem/baseline.hpp"
#include "mlrem/errors.hpp"
#include "mlrem/rng.hpp"
#include "mlrem/stats.hpp"

namespace mlrem {

namespace {

void reject_unknown_keys(const Json& obj, std::string_view where, std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(std::string(where) + "." + key + ": unknown field");
        }
    }
}

double get_number(const Json& obj, const char* key, std::string_view where) {
    const Json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(std::string(where) + "." + key + ": expected a number");
    }
    return v.get<double>();
}

double get_number_or_inf(const Json& obj, const char* key, std::string_view where) {
    const Json& v = obj.at(key);
    if (v.is_string() && v.get<std::string>() == "inf") {
        return kInf;
    }
    return get_number(obj, key, where);
}

std::int64_t get_integer(const Json& obj, const char* key, std::string_view where) {
    const Json& v = obj.at(key);
    if (v.is_number_integer()) {
        return v.get<std::int64_t>();
    }
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
        return static_cast<std::int64_t>(v.get<double>());
    }
    throw ConfigError(std::string(where) + "." + key + ": expected an integer");
}

std::uint64_t get_seed(const Json& obj, const char* key, std::string_view where) {
    const Json& v = obj.at(key);
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(std::string(where) + "." + key + ": expected a nonnegative integer seed");
}

std::string get_string(const Json& obj, const char* key, std::string_view where) {
    const Json& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError(std::string(where) + "." + key + ": expected a string");
    }
    return v.get<std::string>();
}

Estimator parse_estimator(const std::string& name) {
    if (name == "em-split") return Estimator::em_split;
    if (name == "em-pooled") return Estimator::em_pooled;
    if (name == "am") return Estimator::am;
    throw ConfigError("estimator: unknown value '" + name + "' (expected em-split, em-pooled or am)");
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "n") return SweepAxis::n;
    if (name == "sigma") return SweepAxis::sigma;
    if (name == "beta_scale") return SweepAxis::beta_scale;
    if (name == "init_radius") return SweepAxis::init_radius;
    throw ConfigError("sweep.axis: unknown value '" + name + "'");
}

int estimator_rank(const std::string& name) {
    if (name == "em-split") return 0;
    if (name == "em-pooled") return 1;
    if (name == "am") return 2;
    return 3;
}

MixtureParams parse_truth(const Json& spec) {
    if (!spec.is_object()) {
        throw ConfigError("truth: expected an object");
    }
    if (spec.contains("betas")) {
        reject_unknown_keys(spec, "truth", {"betas", "weights", "sigma"});
        return params_from_json(spec, "truth");
    }
    reject_unknown_keys(spec, "truth", {"construction", "k", "d", "r", "weights", "sigma"});
    for (const char* key : {"construction", "k", "d", "r", "sigma"}) {
        if (!spec.contains(key)) {
            throw ConfigError(std::string("truth.") + key + ": missing");
        }
    }
    if (get_string(spec, "construction", "truth") != "orthogonal-scaled") {
        throw ConfigError("truth.construction: expected 'orthogonal-scaled' (or give explicit betas)");
    }
    const std::int64_t k = get_integer(spec, "k", "truth");
    const std::int64_t d = get_integer(spec, "d", "truth");
    if (k < 1 || d < 1 || k > d) {
        throw ConfigError("truth.k: orthogonal-scaled needs 1 <= k <= d");
    }
    const double r = get_number(spec, "r", "truth");
    Json explicit_spec;
    Json betas = Json::array();
    for (std::int64_t j = 0; j < k; ++j) {
        Json row = Json::array();
        for (std::int64_t c = 0; c < d; ++c) {
            row.push_back(c == j ? r : 0.0);
        }
        betas.push_back(row);
    }
    explicit_spec["betas"] = betas;
    if (spec.contains("weights")) {
        explicit_spec["weights"] = spec.at("weights");
    } else {
        explicit_spec["weights"] = std::vector<double>(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    }
    explicit_spec["sigma"] = spec.at("sigma");
    return params_from_json(explicit_spec, "truth");
}

InitSpec parse_init(const Json& spec) {
    InitSpec init;
    if (!spec.is_object()) {
        throw ConfigError("init: expected an object");
    }
    reject_unknown_keys(spec, "init", {"kind", "beta_radius", "weight_rel_radius", "seed"});
    if (spec.contains("kind")) {
        const std::string kind = get_string(spec, "kind", "init");
        if (kind == "perturbed-oracle") {
            init.kind = InitKind::perturbed_oracle;
        } else if (kind == "random") {
            init.kind = InitKind::random;
        } else {
            throw ConfigError("init.kind: unknown value '" + kind + "'");
        }
    }
    if (spec.contains("beta_radius")) init.beta_radius = get_number(spec, "beta_radius", "init");
    if (spec.contains("weight_rel_radius")) init.weight_rel_radius = get_number(spec, "weight_rel_radius", "init");
    if (spec.contains("seed")) init.seed = get_seed(spec, "seed", "init");
    try {
        init.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("init: ") + e.what());
    }
    return init;
}

EMConfig parse_em(const Json& spec, Index k) {
    EMConfig em;
    if (!spec.is_object()) {
        throw ConfigError("em: expected an object");
    }
    reject_unknown_keys(spec, "em", {"weight_mode", "ridge", "max_iters", "tol", "min_weight_floor"});
    if (spec.contains("weight_mode")) {
        const std::string mode = get_string(spec, "weight_mode", "em");
        if (mode == "estimated") {
            em.weight_mode = WeightMode::estimated;
        } else if (mode == "fixed") {
            em.weight_mode = WeightMode::fixed;
        } else {
            throw ConfigError("em.weight_mode: expected 'estimated' or 'fixed'");
        }
    }
    if (spec.contains("ridge") && !spec.at("ridge").is_null()) em.ridge = get_number(spec, "ridge", "em");
    if (spec.contains("max_iters")) em.max_iters = static_cast<int>(get_integer(spec, "max_iters", "em"));
    if (spec.contains("tol")) em.tol = get_number_or_inf(spec, "tol", "em");
    if (spec.contains("min_weight_floor")) em.min_weight_floor = get_number(spec, "min_weight_floor", "em");
    try {
        em.validate(k);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("em: ") + e.what());
    }
    return em;
}

Json stats_json(const std::vector<double>& values) {
    return Json{{"median", median(values)},
                {"q1", quantile(values, 0.25)},
                {"q3", quantile(values, 0.75)},
                {"min", quantile(values, 0.0)},
                {"max", quantile(values, 1.0)}};
}

std::string axis_dir_name(SweepAxis axis, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%02zu", to_string(axis), index);
    return buf;
}

std::string trace_file_name(int trial) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "trace_trial_%03d.csv", trial);
    return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

}  // namespace

const char* to_string(Estimator estimator) {
    switch (estimator) {
        case Estimator::em_split: return "em-split";
        case Estimator::em_pooled: return "em-pooled";
        case Estimator::am: return "am";
    }
    return "?";
}

const char* to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::n: return "n";
        case SweepAxis::sigma: return "sigma";
        case SweepAxis::beta_scale: return "beta_scale";
        case SweepAxis::init_radius: return "init_radius";
    }
    return "?";
}

Scenario scenario_from_json(const Json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("scenario: expected a JSON object");
    }
    reject_unknown_keys(doc, "scenario", {"id", "truth", "beta_scale", "init", "estimator", "n", "T", "trials",
                                          "base_seed", "sweep", "em", "constants"});
    for (const char* key : {"truth", "n"}) {
        if (!doc.contains(key)) {
            throw ConfigError(std::string("scenario.") + key + ": missing");
        }
    }
    Scenario s;
    if (doc.contains("id")) s.id = get_string(doc, "id", "scenario");
    s.truth_spec = doc.at("truth");
    s.truth = parse_truth(s.truth_spec);
    if (doc.contains("beta_scale")) {
        s.beta_scale = get_number(doc, "beta_scale", "scenario");
        if (!(s.beta_scale > 0.0)) {
            throw ConfigError("scenario.beta_scale: must be > 0");
        }
        s.truth.betas *= s.beta_scale;
    }
    if (doc.contains("init")) s.init = parse_init(doc.at("init"));
    if (doc.contains("estimator")) s.estimator = parse_estimator(get_string(doc, "estimator", "scenario"));
    s.n = get_integer(doc, "n", "scenario");
    if (doc.contains("T")) s.batches = get_integer(doc, "T", "scenario");
    if (doc.contains("trials")) s.trials = static_cast<int>(get_integer(doc, "trials", "scenario"));
    if (doc.contains("base_seed")) s.base_seed = get_seed(doc, "base_seed", "scenario");
    if (s.n < 1) throw ConfigError("scenario.n: must be >= 1");
    if (s.batches < 1) throw ConfigError("scenario.T: must be >= 1");
    if (s.batches > s.n) throw ConfigError("scenario.T: cannot exceed n");
    if (s.trials < 1) throw ConfigError("scenario.trials: must be >= 1");
    if (s.init.kind == InitKind::random && s.n < s.truth.k() * s.truth.d()) {
        throw ConfigError("scenario.n: random init needs n >= k*d");
    }

    if (doc.contains("sweep") && !doc.at("sweep").is_null()) {
        const Json& sw = doc.at("sweep");
        if (!sw.is_object() || !sw.contains("axis") || !sw.contains("values")) {
            throw ConfigError("sweep: expected {\"axis\": ..., \"values\": [...]}");
        }
        reject_unknown_keys(sw, "sweep", {"axis", "values"});
        Sweep sweep;
        sweep.axis = parse_axis(get_string(sw, "axis", "sweep"));
        if (!sw.at("values").is_array() || sw.at("values").empty()) {
            throw ConfigError("sweep.values: expected a nonempty array");
        }
        for (const Json& v : sw.at("values")) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) {
                throw ConfigError("sweep.values: entries must be positive numbers");
            }
            sweep.values.push_back(v.get<double>());
        }
        const auto& vals = sweep.values;
        const bool up = std::adjacent_find(vals.begin(), vals.end(), std::greater_equal<>()) == vals.end();
        const bool down = std::adjacent_find(vals.begin(), vals.end(), std::less_equal<>()) == vals.end();
        if (!up && !down) {
            throw ConfigError("sweep.values: must be strictly increasing or strictly decreasing");
        }
        s.sweep = std::move(sweep);
    }

    if (doc.contains("em")) s.em = parse_em(doc.at("em"), s.truth.k());
    s.em.sigma = s.truth.sigma;
    s.em.validate(s.truth.k());

    if (doc.contains("constants")) {
        const Json& c = doc.at("constants");
        if (!c.is_object()) throw ConfigError("constants: expected an object");
        reject_unknown_keys(c, "constants", {"C", "c"});
        if (c.contains("C")) s.constants.big_c = get_number(c, "C", "constants");
        if (c.contains("c")) s.constants.small_c = get_number(c, "c", "constants");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json_file(path));
}

Json scenario_to_json(const Scenario& s) {
    Json em{{"sigma", s.em.sigma},
            {"weight_mode", s.em.weight_mode == WeightMode::estimated ? "estimated" : "fixed"},
            {"ridge", s.em.ridge ? Json(*s.em.ridge) : Json(nullptr)},
            {"ridge_default", "1e-10 * batch size"},
            {"max_iters", s.em.max_iters},
            {"tol", std::isinf(s.em.tol) ? Json("inf") : Json(s.em.tol)},
            {"min_weight_floor", s.em.min_weight_floor}};
    Json out{{"id", s.id},
             {"truth", params_to_json(s.truth)},
             {"truth_spec", s.truth_spec},
             {"beta_scale", s.beta_scale},
             {"init",
              {{"kind", s.init.kind == InitKind::perturbed_oracle ? "perturbed-oracle" : "random"},
               {"beta_radius", s.init.beta_radius},
               {"weight_rel_radius", s.init.weight_rel_radius},
               {"seed", s.init.seed}}},
             {"estimator", to_string(s.estimator)},
             {"n", s.n},
             {"T", s.batches},
             {"trials", s.trials},
             {"base_seed", s.base_seed},
             {"em", em},
             {"constants", {{"C", s.constants.big_c}, {"c", s.constants.small_c}}}};
    if (s.sweep) {
        out["sweep"] = {{"axis", to_string(s.sweep->axis)}, {"values", s.sweep->values}};
    } else {
        out["sweep"] = nullptr;
    }
    return out;
}

Scenario with_axis_value(const Scenario& scenario, SweepAxis axis, double value) {
    Scenario s = scenario;
    switch (axis) {
        case SweepAxis::n:
            s.n = static_cast<Index>(std::llround(value));
            if (s.n < s.batches) throw ConfigError("sweep.values: n below T");
            break;
        case SweepAxis::sigma:
            s.truth.sigma = value;
            s.em.sigma = value;
            break;
        case SweepAxis::beta_scale:
            s.truth.betas *= value;
            s.init.beta_radius *= value;
            s.beta_scale *= value;
            break;
        case SweepAxis::init_radius:
            s.init.beta_radius = value;
            break;
    }
    s.sweep.reset();
    return s;
}

Dataset trial_dataset(const Scenario& scenario, int trial) {
    return sample_dataset(scenario.truth, scenario.n, scenario.trial_seed(trial));
}

EMState trial_init(const Scenario& scenario, const Dataset& data, int trial) {
    InitSpec spec = scenario.init;
    spec.seed = derive_seed(scenario.trial_seed(trial), scenario.init.seed);
    if (spec.kind == InitKind::perturbed_oracle) {
        return perturbed_init(scenario.truth, spec);
    }
    return random_init(data.samples, scenario.truth.k(), spec.seed);
}

double label_oracle_error(const MixtureParams& truth, const Dataset& data) {
    if (!data.labels) {
        throw ConfigError("label_oracle_error: dataset has no labels");
    }
    double worst = 0.0;
    for (Index j = 0; j < truth.k(); ++j) {
        std::vector<Index> rows;
        for (Index i = 0; i < data.n(); ++i) {
            if ((*data.labels)[static_cast<std::size_t>(i)] == j) rows.push_back(i);
        }
        if (rows.empty()) {
            return kInf;
        }
        Matrix x(static_cast<Index>(rows.size()), data.d());
        Vector y(static_cast<Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            x.row(static_cast<Index>(r)) = data.samples.design.row(rows[r]);
            y[static_cast<Index>(r)] = data.samples.response[rows[r]];
        }
        const Vector fit = ols(x, y, 1e-10 * static_cast<double>(data.n()));
        worst = std::max(worst, (fit - truth.betas.row(j).transpose()).norm());
    }
    return worst;
}

TrialResult run_trial(const Scenario& scenario, int trial) {
    const Dataset data = trial_dataset(scenario, trial);
    const EMState init = trial_init(scenario, data, trial);

    TrialResult result;
    result.trial = trial;
    result.seed = scenario.trial_seed(trial);
    result.condition = check_local_conditions(scenario.truth, init, scenario.constants);
    switch (scenario.estimator) {
        case Estimator::em_split:
            result.trace = run_sample_splitting_em(init, data.samples, scenario.batches, scenario.em);
            break;
        case Estimator::em_pooled:
            result.trace = run_pooled_em(init, data.samples, scenario.em);
            break;
        case Estimator::am:
            result.trace = run_alternating_minimization(init, data.samples, scenario.em);
            break;
    }
    for (const EMState& state : result.trace.states) {
        if (!state.betas.allFinite() || !state.weights.allFinite()) {
            throw NumericalError("trial " + std::to_string(trial) + ": non-finite iterate");
        }
    }
    result.contraction = contraction_trace(result.trace, scenario.truth);
    result.final_error = matched_error(result.trace.final_state(), scenario.truth);

    if (scenario.estimator == Estimator::em_split) {
        const auto parts = split_batches(data, scenario.batches);
        const std::size_t last = result.trace.iterations_used > 0
                                     ? static_cast<std::size_t>(result.trace.iterations_used - 1)
                                     : 0;
        result.oracle_error = label_oracle_error(scenario.truth, parts[last]);
    } else {
        result.oracle_error = label_oracle_error(scenario.truth, data);
    }
    return result;
}

std::vector<TrialResult> run_trials(const Scenario& scenario, int jobs) {
    std::vector<TrialResult> results(static_cast<std::size_t>(scenario.trials));
    const int workers = std::max(1, std::min(jobs, scenario.trials));
    if (workers == 1) {
        for (int t = 0; t < scenario.trials; ++t) {
            results[static_cast<std::size_t>(t)] = run_trial(scenario, t);
        }
        return results;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int t = next++; t < scenario.trials; t = next++) {
                try {
                    results[static_cast<std::size_t>(t)] = run_trial(scenario, t);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& thread : pool) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

Json summarize(const Scenario& scenario, const std::vector<TrialResult>& results) {
    Json trials = Json::array();
    std::vector<double> finals, oracles, iterations;
    int degenerate_total = 0;
    int satisfied = 0;
    std::size_t longest = 0;
    for (const TrialResult& r : results) {
        finals.push_back(r.final_error.max_beta_err);
        oracles.push_back(r.oracle_error);
        iterations.push_back(r.trace.iterations_used);
        degenerate_total += r.trace.degenerate_count();
        satisfied += r.condition.satisfied ? 1 : 0;
        longest = std::max(longest, r.contraction.d_m.size());
        trials.push_back({{"trial", r.trial},
                          {"seed", r.seed},
                          {"final_error", r.final_error.max_beta_err},
                          {"final_rel_weight_error", r.final_error.max_rel_weight_err},
                          {"oracle_error", r.oracle_error},
                          {"iterations", r.trace.iterations_used},
                          {"converged", r.trace.converged},
                          {"degenerate_count", r.trace.degenerate_count()},
                          {"condition_satisfied", r.condition.satisfied},
                          {"d_m", r.contraction.d_m}});
    }

    Json per_iteration = Json::array();
    for (std::size_t t = 0; t < longest; ++t) {
        std::vector<double> at;
        for (const TrialResult& r : results) {
            if (t < r.contraction.d_m.size()) at.push_back(r.contraction.d_m[t]);
        }
        per_iteration.push_back({{"iter", t},
                                 {"count", at.size()},
                                 {"median", median(at)},
                                 {"q1", quantile(at, 0.25)},
                                 {"q3", quantile(at, 0.75)}});
    }

    const int n_trials = static_cast<int>(results.size());
    const char* verdict = satisfied == n_trials ? "satisfied" : (satisfied == 0 ? "violated" : "mixed");
    return Json{{"tool_version", kToolVersion},
                {"scenario_id", scenario.id},
                {"estimator", to_string(scenario.estimator)},
                {"scenario", scenario_to_json(scenario)},
                {"trials", trials},
                {"per_iteration", per_iteration},
                {"final_error", stats_json(finals)},
                {"oracle_error", stats_json(oracles)},
                {"iterations", stats_json(iterations)},
                {"degenerate_count", degenerate_total},
                {"condition",
                 {{"verdict", verdict},
                  {"satisfied_trials", satisfied},
                  {"trials", n_trials},
                  {"report_trial0", results.empty() ? Json(nullptr)
                                                    : condition_report_to_json(results.front().condition)}}}};
}

Json cmd_run(const Scenario& scenario, const std::filesystem::path& out_dir, int jobs) {
    const std::vector<TrialResult> results = run_trials(scenario, jobs);
    ensure_dir(out_dir);
    for (const TrialResult& r : results) {
        std::ostringstream csv;
        write_trace_csv(csv, r.trace, &scenario.truth, to_string(scenario.estimator));
        write_text_file(out_dir / trace_file_name(r.trial), csv.str());
    }
    Json summary = summarize(scenario, results);
    write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

Json cmd_sweep(const Scenario& scenario, const std::filesystem::path& out_dir, int jobs) {
    if (!scenario.sweep) {
        throw ConfigError("sweep: scenario has no sweep axis");
    }
    ensure_dir(out_dir);
    const Sweep& sweep = *scenario.sweep;
    std::ostringstream csv;
    csv << "axis,value,trial,final_error,iterations,degenerate_count\n";
    std::vector<double> medians;
    Json points = Json::array();
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
        const Scenario point = with_axis_value(scenario, sweep.axis, sweep.values[i]);
        const Json summary = cmd_run(point, out_dir / axis_dir_name(sweep.axis, i), jobs);
        for (const Json& trial : summary.at("trials")) {
            csv << to_string(sweep.axis) << ',' << format_double(sweep.values[i]) << ','
                << trial.at("trial").get<int>() << ',' << format_double(trial.at("final_error").get<double>()) << ','
                << trial.at("iterations").get<int>() << ',' << trial.at("degenerate_count").get<int>() << '\n';
        }
        const double med = summary.at("final_error").at("median").get<double>();
        medians.push_back(med);
        points.push_back({{"value", sweep.values[i]},
                          {"median_final_error", med},
                          {"median_oracle_error", summary.at("oracle_error").at("median")},
                          {"dir", axis_dir_name(sweep.axis, i)}});
    }
    write_text_file(out_dir / "sweep.csv", csv.str());

    Json out{{"tool_version", kToolVersion},
             {"scenario_id", scenario.id},
             {"estimator", to_string(scenario.estimator)},
             {"scenario", scenario_to_json(scenario)},
             {"axis", to_string(sweep.axis)},
             {"points", points}};
    if (sweep.values.size() >= 2) {
        out["loglog_slope"] = loglog_slope(sweep.values, medians);
        out["max_over_min_median"] =
            *std::max_element(medians.begin(), medians.end()) / *std::min_element(medians.begin(), medians.end());
    } else {
        out["loglog_slope"] = nullptr;
        out["max_over_min_median"] = nullptr;
    }
    write_text_file(out_dir / "sweep_summary.json", out.dump(2) + "\n");
    return out;
}

std::string cmd_report(const std::vector<std::filesystem::path>& summaries, std::ostream& warnings) {
    if (summaries.empty()) {
        throw ConfigError("report: need at least one summary file");
    }
    struct Row {
        std::string id;
        std::string estimator;
        double median_error;
        double median_iterations;
        std::string verdict;
    };
    std::map<std::pair<std::string, std::string>, Row> rows;
    for (const auto& path : summaries) {
        const Json doc = read_json_file(path);
        Row row;
        try {
            row.id = doc.at("scenario_id").get<std::string>();
            row.estimator = doc.at("estimator").get<std::string>();
            const Json& med = doc.at("final_error").at("median");
            row.median_error = med.is_null() ? std::nan("") : med.get<double>();
            row.median_iterations = doc.at("iterations").at("median").get<double>();
            row.verdict = doc.at("condition").at("verdict").get<std::string>();
        } catch (const Json::exception& e) {
            throw ConfigError(path.string() + ": not a run summary (" + e.what() + ")");
        }
        const auto key = std::make_pair(row.id, row.estimator);
        if (rows.contains(key)) {
            warnings << "warning: duplicate summary for scenario '" << row.id << "' (" << row.estimator
                     << ") ignored: " << path.string() << '\n';
            continue;
        }
        rows.emplace(key, std::move(row));
    }

    std::vector<Row> ordered;
    for (auto& [key, row] : rows) ordered.push_back(row);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Row& a, const Row& b) {
        if (a.id != b.id) return a.id < b.id;
        return estimator_rank(a.estimator) < estimator_rank(b.estimator);
    });

    std::ostringstream out;
    out << "| scenario | estimator | median final D_m | median iterations | conditions |\n";
    out << "|---|---|---|---|---|\n";
    char buf[64];
    for (const Row& row : ordered) {
        out << "| " << row.id << " | " << row.estimator << " | ";
        std::snprintf(buf, sizeof buf, "%.6g", row.median_error);
        out << buf << " | ";
        std::snprintf(buf, sizeof buf, "%g", row.median_iterations);
        out << buf << " | " << row.verdict << " |\n";
    }
    return out.str();
}

}  // namespace mlrem
