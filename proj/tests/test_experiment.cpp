#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mlrem/errors.hpp"
#include "mlrem/experiment.hpp"

using namespace mlrem;

namespace {

Json small_scenario() {
    return Json::parse(R"({
        "id": "small",
        "truth": {"construction": "orthogonal-scaled", "k": 2, "d": 3, "r": 3.0, "sigma": 0.2},
        "init": {"kind": "perturbed-oracle", "beta_radius": 0.5, "weight_rel_radius": 0.1, "seed": 3},
        "estimator": "em-split",
        "n": 2000, "T": 4, "trials": 3, "base_seed": 10,
        "em": {"max_iters": 50, "tol": 0}
    })");
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void expect_config_error(const Json& doc, const std::string& fragment) {
    try {
        scenario_from_json(doc);
        FAIL("expected ConfigError mentioning " << fragment);
    } catch (const ConfigError& e) {
        CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
}

}  // namespace

TEST_CASE("scenario: orthogonal-scaled construction and defaults") {
    const Scenario s = scenario_from_json(small_scenario());
    CHECK(s.truth.k() == 2);
    CHECK(s.truth.betas(0, 0) == 3.0);
    CHECK(s.truth.betas(1, 1) == 3.0);
    CHECK(s.truth.betas(0, 1) == 0.0);
    CHECK(s.truth.weights == Vector::Constant(2, 0.5));
    CHECK(s.em.sigma == 0.2);
    CHECK(s.em.tol == 0.0);
    CHECK(s.batches == 4);
    CHECK(s.trial_seed(2) == 12);
    const Json resolved = scenario_to_json(s);
    CHECK(resolved.at("em").at("min_weight_floor").get<double>() == 1e-8);
    CHECK(resolved.at("truth").at("betas").at(1).at(1).get<double>() == 3.0);
    CHECK(resolved.at("sweep").is_null());
}

TEST_CASE("scenario: explicit truth and beta_scale") {
    Json doc = small_scenario();
    doc["truth"] = Json::parse(R"({"betas": [[1, 0], [0, 2]], "weights": [0.25, 0.75], "sigma": 0.5})");
    doc["beta_scale"] = 2.0;
    const Scenario s = scenario_from_json(doc);
    CHECK(s.truth.betas(1, 1) == 4.0);
    CHECK(s.truth.weights[1] == 0.75);
}

TEST_CASE("scenario: validation names the offending field") {
    Json doc = small_scenario();
    doc["truth"]["weights"] = {0.3, 0.3};
    expect_config_error(doc, "truth.weights");

    doc = small_scenario();
    doc["trials"] = 0;
    expect_config_error(doc, "trials");

    doc = small_scenario();
    doc["colour"] = "blue";
    expect_config_error(doc, "colour");

    doc = small_scenario();
    doc["estimator"] = "gd";
    expect_config_error(doc, "estimator");

    doc = small_scenario();
    doc["init"]["weight_rel_radius"] = 0.9;
    expect_config_error(doc, "init");

    doc = small_scenario();
    doc["sweep"] = Json::parse(R"({"axis": "n", "values": [1000, 500, 2000]})");
    expect_config_error(doc, "sweep.values");

    doc["sweep"] = Json::parse(R"({"axis": "n", "values": [1000, -5]})");
    expect_config_error(doc, "sweep.values");

    doc["sweep"] = Json::parse(R"({"axis": "depth", "values": [1]})");
    expect_config_error(doc, "sweep.axis");

    doc = small_scenario();
    doc["T"] = 5000;
    expect_config_error(doc, "T");

    doc = small_scenario();
    doc.erase("n");
    expect_config_error(doc, "n");
}

TEST_CASE("scenario: sweep values may be given in either order") {
    Json doc = small_scenario();
    doc["sweep"] = Json::parse(R"({"axis": "sigma", "values": [0.2, 0.1, 0.05]})");
    CHECK(scenario_from_json(doc).sweep->values.size() == 3);
    doc["sweep"] = Json::parse(R"({"axis": "sigma", "values": [0.05, 0.1, 0.2]})");
    CHECK(scenario_from_json(doc).sweep->values.front() == 0.05);
}

TEST_CASE("with_axis_value") {
    const Scenario s = scenario_from_json(small_scenario());
    CHECK(with_axis_value(s, SweepAxis::n, 800).n == 800);
    const Scenario noisy = with_axis_value(s, SweepAxis::sigma, 0.4);
    CHECK(noisy.truth.sigma == 0.4);
    CHECK(noisy.em.sigma == 0.4);
    const Scenario scaled = with_axis_value(s, SweepAxis::beta_scale, 3.0);
    CHECK(scaled.truth.betas(0, 0) == 9.0);
    CHECK(scaled.init.beta_radius == 1.5);
    CHECK(with_axis_value(s, SweepAxis::init_radius, 0.7).init.beta_radius == 0.7);
}

TEST_CASE("run_trial: deterministic, and independent of the thread count") {
    const Scenario s = scenario_from_json(small_scenario());
    const auto a = run_trials(s, 1);
    const auto b = run_trials(s, 3);
    REQUIRE(a.size() == 3);
    for (std::size_t t = 0; t < a.size(); ++t) {
        CHECK(a[t].trial == static_cast<int>(t));
        CHECK(a[t].seed == 10 + t);
        CHECK(a[t].final_error.max_beta_err == b[t].final_error.max_beta_err);
        CHECK(a[t].trace.final_state().betas == b[t].trace.final_state().betas);
    }
    CHECK(a[0].final_error.max_beta_err != a[1].final_error.max_beta_err);
}

TEST_CASE("run_trial: estimators share data and init") {
    Scenario s = scenario_from_json(small_scenario());
    const Dataset data = trial_dataset(s, 1);
    const EMState init = trial_init(s, data, 1);
    s.estimator = Estimator::am;
    CHECK(trial_init(s, trial_dataset(s, 1), 1).betas == init.betas);
    CHECK(run_trial(s, 1).trace.states.front().betas == init.betas);
}

TEST_CASE("label_oracle_error is the per-component least squares error") {
    const Scenario s = scenario_from_json(small_scenario());
    const Dataset data = trial_dataset(s, 0);
    const double err = label_oracle_error(s.truth, data);
    CHECK(err > 0.0);
    CHECK(err < 0.05);
    Dataset unlabeled = data;
    unlabeled.labels.reset();
    CHECK_THROWS_AS(label_oracle_error(s.truth, unlabeled), ConfigError);
}

TEST_CASE("cmd_run: zero iterations report only the initial distance") {
    Json doc = small_scenario();
    doc["trials"] = 1;
    doc["em"]["max_iters"] = 0;
    const Scenario s = scenario_from_json(doc);
    fixtures::TempDir dir("exp_zero");
    const Json summary = cmd_run(s, dir.path(), 1);
    REQUIRE(summary.at("per_iteration").size() == 1);
    CHECK(summary.at("per_iteration").at(0).at("median").get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(summary.at("iterations").at("median").get<double>() == 0.0);
    CHECK(std::filesystem::exists(dir / "trace_trial_000.csv"));
}

TEST_CASE("cmd_run: byte-identical reruns and a self-describing summary") {
    const Scenario s = scenario_from_json(small_scenario());
    fixtures::TempDir a("exp_a"), b("exp_b");
    cmd_run(s, a.path(), 1);
    cmd_run(s, b.path(), 1);
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "trace_trial_002.csv") == slurp(b / "trace_trial_002.csv"));
    const Json summary = read_json_file(a / "summary.json");
    CHECK(summary.at("tool_version") == kToolVersion);
    CHECK(summary.at("scenario").at("n") == 2000);
    CHECK(summary.at("estimator") == "em-split");
    CHECK(summary.at("trials").size() == 3);
}

TEST_CASE("cmd_run: em-pooled and am summaries differ only in estimator and numbers") {
    Json doc = small_scenario();
    doc["estimator"] = "em-pooled";
    fixtures::TempDir dir("exp_pair");
    Json em = cmd_run(scenario_from_json(doc), dir / "em", 1);
    doc["estimator"] = "am";
    Json am = cmd_run(scenario_from_json(doc), dir / "am", 1);
    CHECK(em.at("estimator") == "em-pooled");
    CHECK(am.at("estimator") == "am");
    em["scenario"].erase("estimator");
    am["scenario"].erase("estimator");
    CHECK(em.at("scenario") == am.at("scenario"));
    for (const auto& [key, value] : em.items()) CHECK(am.contains(key));
}

TEST_CASE("cmd_sweep: subdirectories, long CSV and slope") {
    Json doc = small_scenario();
    doc["trials"] = 2;
    doc["sweep"] = Json::parse(R"({"axis": "sigma", "values": [0.4, 0.2, 0.1]})");
    fixtures::TempDir dir("exp_sweep");
    const Json out = cmd_sweep(scenario_from_json(doc), dir.path(), 1);
    CHECK(std::filesystem::exists(dir / "sigma_00/summary.json"));
    CHECK(std::filesystem::exists(dir / "sigma_02/summary.json"));
    CHECK(std::filesystem::exists(dir / "sweep_summary.json"));
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("axis,value,trial,final_error,iterations,degenerate_count\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(out.at("loglog_slope").get<double>() > 0.5);
    CHECK(out.at("max_over_min_median").get<double>() >= 1.0);
}

TEST_CASE("cmd_sweep requires an axis") {
    fixtures::TempDir dir("exp_noaxis");
    CHECK_THROWS_AS(cmd_sweep(scenario_from_json(small_scenario()), dir.path(), 1), ConfigError);
}

TEST_CASE("cmd_report: ordering, adjacency and duplicates") {
    fixtures::TempDir dir("exp_report");
    Json doc = small_scenario();
    doc["trials"] = 1;
    doc["id"] = "zeta";
    cmd_run(scenario_from_json(doc), dir / "z", 1);
    doc["id"] = "alpha";
    doc["estimator"] = "am";
    cmd_run(scenario_from_json(doc), dir / "a_am", 1);
    doc["estimator"] = "em-pooled";
    cmd_run(scenario_from_json(doc), dir / "a_em", 1);

    std::ostringstream warnings;
    const std::string one = cmd_report({dir / "z/summary.json"}, warnings);
    CHECK(std::count(one.begin(), one.end(), '\n') == 3);

    const std::string table = cmd_report(
        {dir / "z/summary.json", dir / "a_am/summary.json", dir / "a_em/summary.json", dir / "a_em/summary.json"},
        warnings);
    const auto em_pos = table.find("| alpha | em-pooled");
    const auto am_pos = table.find("| alpha | am");
    const auto z_pos = table.find("| zeta | em-split");
    REQUIRE(em_pos != std::string::npos);
    REQUIRE(am_pos != std::string::npos);
    REQUIRE(z_pos != std::string::npos);
    CHECK(em_pos < am_pos);
    CHECK(am_pos < z_pos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
    CHECK(warnings.str().find("duplicate") != std::string::npos);
    const std::string warned = warnings.str();
    CHECK(std::count(warned.begin(), warned.end(), '\n') == 1);
}

TEST_CASE("cmd_report: schema mismatch is a config error") {
    fixtures::TempDir dir("exp_schema");
    write_text_file(dir / "x.json", R"({"hello": 1})");
    std::ostringstream warnings;
    CHECK_THROWS_AS(cmd_report({dir / "x.json"}, warnings), ConfigError);
}
