#include "mlrem/cli.hpp"

#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlrem/errors.hpp"
#include "mlrem/experiment.hpp"
#include "mlrem/io.hpp"

namespace mlrem {

namespace {

struct GlobalOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
    std::string out;
};

Scenario load_with_overrides(const std::string& path, const GlobalOptions& opts) {
    Scenario scenario = load_scenario(path);
    if (opts.seed_override) {
        scenario.base_seed = *opts.seed_override;
    }
    return scenario;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"EM for mixtures of linear regressions: data generation and Monte Carlo experiments", "mlrem"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    GlobalOptions opts;
    std::uint64_t seed_override = 0;
    app.add_option("--jobs", opts.jobs, "Trials run in parallel")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed-override", seed_override, "Replace the scenario's base_seed");
    app.add_option("--out", opts.out, "Output file (gen, report) or directory (run, sweep)");

    std::string scenario_path;
    bool csv = false;
    auto* gen = app.add_subcommand("gen", "Generate the trial-0 dataset of a scenario");
    gen->add_option("scenario", scenario_path, "Scenario JSON")->required();
    gen->add_flag("--csv", csv, "Write CSV (x0,...,y,label) instead of the binary container");

    auto* run = app.add_subcommand("run", "Run all trials of a scenario");
    run->add_option("scenario", scenario_path, "Scenario JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "Run a scenario across its sweep axis");
    sweep->add_option("scenario", scenario_path, "Scenario JSON")->required();

    std::vector<std::string> summary_paths;
    auto* report = app.add_subcommand("report", "Tabulate run summaries");
    report->add_option("summaries", summary_paths, "summary.json files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (seed_opt->count() > 0) {
        opts.seed_override = seed_override;
    }

    try {
        if (gen->parsed()) {
            const Scenario scenario = load_with_overrides(scenario_path, opts);
            const Dataset data = trial_dataset(scenario, 0);
            const std::string path = opts.out.empty() ? (csv ? "dataset.csv" : "dataset.mlrd") : opts.out;
            if (csv) {
                write_dataset_csv(path, data);
            } else {
                write_dataset(path, data);
            }
            out << "n=" << data.n() << " d=" << data.d() << " k=" << scenario.truth.k() << " seed=" << data.seed
                << '\n';
        } else if (run->parsed()) {
            const Scenario scenario = load_with_overrides(scenario_path, opts);
            const std::string dir = opts.out.empty() ? "out" : opts.out;
            const Json summary = cmd_run(scenario, dir, opts.jobs);
            out << "scenario=" << scenario.id << " estimator=" << to_string(scenario.estimator)
                << " trials=" << scenario.trials
                << " median_final_error=" << format_double(summary.at("final_error").at("median").get<double>())
                << " degenerate=" << summary.at("degenerate_count").get<int>() << '\n';
        } else if (sweep->parsed()) {
            const Scenario scenario = load_with_overrides(scenario_path, opts);
            const std::string dir = opts.out.empty() ? "out" : opts.out;
            const Json summary = cmd_sweep(scenario, dir, opts.jobs);
            out << "axis=" << summary.at("axis").get<std::string>();
            if (!summary.at("loglog_slope").is_null()) {
                out << " slope=" << format_double(summary.at("loglog_slope").get<double>())
                    << " max_over_min=" << format_double(summary.at("max_over_min_median").get<double>());
            }
            out << '\n';
        } else if (report->parsed()) {
            std::vector<std::filesystem::path> paths(summary_paths.begin(), summary_paths.end());
            const std::string table = cmd_report(paths, err);
            if (!opts.out.empty()) {
                write_text_file(opts.out, table);
            }
            out << table;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace mlrem
