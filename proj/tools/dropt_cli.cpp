// Command line front end: run scenarios, compare runs, produce theory
// reports and plots. Exit code 0 only when the invoked action (including a
// run's configured checks) fully passes.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dropt/experiment.hpp"
#include "dropt/util.hpp"

namespace fs = std::filesystem;

namespace {

fs::path output_root() {
    if (const char* env = std::getenv("DROPT_OUTPUT_ROOT")) return fs::path(env);
    return fs::path("runs");
}

int cmd_run(const std::string& config_path, const std::string& out) {
    const auto config = dropt::ExperimentConfig::from_file(config_path);
    const fs::path dir = out.empty() ? output_root() / config.scenario : fs::path(out);
    const auto result = dropt::run_scenario(config, dir);

    for (const auto& w : result.warnings) std::cout << "warning: " << w << '\n';
    std::cout << "scenario " << config.scenario << " finished: "
              << result.epochs_or_ticks_run << " steps, final max error "
              << dropt::format_double(result.final_max_error) << ", consensus value "
              << dropt::format_double(result.consensus_value) << '\n';
    if (result.naive_worst_case > 0)
        std::cout << "naive flood: worst case " << result.naive_worst_case
                  << " ticks, slowest completion " << result.naive_max_completion
                  << '\n';
    if (result.tracker_within_5pct_tick >= 0)
        std::cout << "tracker within 5% of the weighted average from tick "
                  << result.tracker_within_5pct_tick << '\n';
    for (const auto& c : result.checks)
        std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << " (measured "
                  << dropt::format_double(c.measured) << ")\n";
    std::cout << "outputs in " << dir.string() << '\n';
    return result.checks_passed ? 0 : 1;
}

nlohmann::json load_summary(const fs::path& dir) {
    std::ifstream in(dir / "summary.json");
    if (!in)
        throw std::invalid_argument("no summary.json in " + dir.string());
    nlohmann::json j;
    in >> j;
    return j;
}

// Accepts either a finished run directory or a scenario config, which is
// then run under the output root first.
nlohmann::json summary_for(const std::string& arg) {
    const fs::path path(arg);
    if (fs::is_directory(path)) return load_summary(path);
    const auto config = dropt::ExperimentConfig::from_file(path);
    const fs::path dir = output_root() / config.scenario;
    dropt::run_scenario(config, dir);
    std::cout << "ran " << config.scenario << " into " << dir.string() << '\n';
    return load_summary(dir);
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, double tol) {
    const auto a = summary_for(dir_a);
    const auto b = summary_for(dir_b);
    const double ca = a.at("consensus_value").get<double>();
    const double cb = b.at("consensus_value").get<double>();
    std::cout << "consensus values: " << dropt::format_double(ca) << " vs "
              << dropt::format_double(cb) << " (difference "
              << dropt::format_double(std::abs(ca - cb)) << ")\n";
    std::cout << "final max errors: "
              << dropt::format_double(a.at("final_max_error").get<double>()) << " vs "
              << dropt::format_double(b.at("final_max_error").get<double>()) << '\n';
    const bool ok = std::abs(ca - cb) <= tol;
    std::cout << (ok ? "runs agree" : "runs disagree") << " at tolerance "
              << dropt::format_double(tol) << '\n';
    return ok ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    const auto report = dropt::report_on_run(dir);
    std::cout << report.to_text();
    std::cout << (report.all_pass() ? "all checks passed" : "some checks FAILED")
              << '\n';
    return report.all_pass() ? 0 : 1;
}

int cmd_plot(const std::string& dir) {
    dropt::emit_plots(dir);
    std::cout << "plots written to " << dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"delay-robust distributed optimization scenarios"};
    app.require_subcommand(1);

    std::string config_path, out_dir, dir_a, dir_b, run_dir;
    double tol = 1e-8;

    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir,
                    "output directory (default $DROPT_OUTPUT_ROOT/<scenario>)");

    auto* compare = app.add_subcommand(
        "compare", "compare two scenarios (config files or finished run dirs)");
    compare->add_option("a", dir_a)->required();
    compare->add_option("b", dir_b)->required();
    compare->add_option("--tol", tol, "consensus-value tolerance");

    auto* report = app.add_subcommand("report", "theory checks over a finished run");
    report->add_option("dir", run_dir)->required();

    auto* plot = app.add_subcommand("plot", "emit SVG plots for a finished run");
    plot->add_option("dir", run_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (compare->parsed()) return cmd_compare(dir_a, dir_b, tol);
        if (report->parsed()) return cmd_report(run_dir);
        if (plot->parsed()) return cmd_plot(run_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
