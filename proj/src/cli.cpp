#include "rmpc/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "rmpc/config.hpp"
#include "rmpc/csv.hpp"
#include "rmpc/errors.hpp"
#include "rmpc/sim.hpp"

namespace rmpc {

namespace {

namespace fs = std::filesystem;

std::vector<std::pair<std::string, std::string>> split_overrides(
    const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override must look like key=value, got '" + s + "'");
        }
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
}

std::string default_out_dir() {
    const char* env = std::getenv("ROBUST_MPC_OUT");
    return env && *env ? std::string(env) : std::string(".");
}

void write_outputs(const std::string& out_dir, const std::vector<ScenarioResult>& results) {
    fs::create_directories(out_dir);
    for (const auto& r : results) {
        write_trace_csv((fs::path(out_dir) / (r.name + ".csv")).string(), r);
    }
    write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), results);
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::vector<std::string>& sets, std::optional<std::uint64_t> seed,
            bool quiet, std::ostream& out, std::ostream& err) {
    const auto scenarios = load_scenarios(scenario_path, split_overrides(sets), seed);
    const auto results = run_batch(scenarios, true);
    write_outputs(out_dir, results);

    ComparisonTable table;
    table.results = results;
    table.ranking.resize(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) table.ranking[i] = i;
    std::stable_sort(table.ranking.begin(), table.ranking.end(),
                     [&results](std::size_t a, std::size_t b) {
                         return results[a].metrics.tracking_rmse_settled <
                                results[b].metrics.tracking_rmse_settled;
                     });
    if (!quiet) out << table.format();

    for (const auto& r : results) {
        if (r.failed) {
            err << "run '" << r.name << "' diverged: " << r.failure << "\n";
            return 1;
        }
    }
    return 0;
}

int cmd_reproduce(const std::string& out_dir, std::uint64_t seed, bool quiet,
                  std::ostream& out, std::ostream& err) {
    const auto sim1 = benchmark_suite(PlantKind::LinearNominal, seed);
    const auto sim2 = benchmark_suite(PlantKind::NonlinearPerturbed, seed);

    std::vector<Scenario> all(sim1);
    all.insert(all.end(), sim2.begin(), sim2.end());
    const auto results = run_batch(all, true);
    write_outputs(out_dir, results);

    ComparisonTable table;
    table.results = results;
    table.ranking.resize(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) table.ranking[i] = i;
    if (!quiet) out << table.format();

    const double s1_smpc = results[0].metrics.tracking_rmse_settled;
    const double s1_rmpc1 = results[1].metrics.tracking_rmse_settled;
    const double s1_rmpc2 = results[2].metrics.tracking_rmse_settled;
    const double s2_smpc = results[3].metrics.tracking_rmse_settled;
    const double s2_rmpc1 = results[4].metrics.tracking_rmse_settled;
    const double s2_rmpc2 = results[5].metrics.tracking_rmse_settled;

    int status = 0;
    if (!(s1_smpc < 0.05 && s1_rmpc1 < 0.05 && s1_rmpc2 < 0.05)) {
        err << "property violated: linear-nominal settled RMSE < 0.05 rad for all "
               "controllers\n";
        status = 1;
    }
    if (!(s2_rmpc2 < s2_rmpc1 && s2_rmpc1 < s2_smpc)) {
        err << "property violated: perturbed-plant RMSE ordering "
               "R-MPC(c=1) < R-MPC(c=0.1) < S-MPC\n";
        status = 1;
    }
    return status;
}

int cmd_validate(const std::string& scenario_path, const std::vector<std::string>& sets,
                 std::optional<std::uint64_t> seed, std::ostream& out) {
    const auto scenarios = load_scenarios(scenario_path, split_overrides(sets), seed);
    out << scenario_path << ": " << scenarios.size() << " scenario(s)\n";
    for (const auto& sc : scenarios) {
        out << "  " << sc.name << ": "
            << (sc.plant == PlantKind::LinearNominal ? "linear-nominal"
                                                     : "nonlinear-perturbed")
            << ", " << sc.controller_label() << ", " << sc.duration << " s @ "
            << sc.sample_time << " s, seed " << sc.seed << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"robust-MPC servo benchmark harness"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = default_out_dir();
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario) {
            cmd->add_option("--scenario", scenario_path, "scenario configuration file")
                ->required();
        }
        cmd->add_option("--out", out_dir, "output directory for CSV traces");
        cmd->add_option("--set", sets, "override a configuration key (key=value)");
        cmd->add_option("--seed", seed, "override the noise seed");
        cmd->add_flag("--quiet", quiet, "suppress the metrics table");
    };

    CLI::App* run = app.add_subcommand("run", "run the scenarios of a configuration file");
    add_common(run, true);
    CLI::App* repro = app.add_subcommand(
        "reproduce-paper", "run the built-in benchmark comparison and check its properties");
    add_common(repro, false);
    CLI::App* validate =
        app.add_subcommand("validate-config", "parse and validate a configuration file");
    validate->add_option("--scenario", scenario_path, "scenario configuration file")
        ->required();
    validate->add_option("--set", sets, "override a configuration key (key=value)");
    validate->add_option("--seed", seed, "override the noise seed");

    std::vector<const char*> argv;
    argv.push_back("rmpc");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(run)) {
            return cmd_run(scenario_path, out_dir, sets, seed, quiet, out, err);
        }
        if (app.got_subcommand(repro)) {
            return cmd_reproduce(out_dir, seed.value_or(1), quiet, out, err);
        }
        return cmd_validate(scenario_path, sets, seed, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace rmpc
