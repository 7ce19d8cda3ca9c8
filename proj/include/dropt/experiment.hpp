/**
 * Config-driven scenario runner. A scenario is one JSON document naming the
 * graph, weights, objectives, algorithm, delay model and budgets; a run
 * produces deterministic CSV traces plus a summary, with the fully resolved
 * config embedded next to them. Plots are derived from the CSVs afterwards.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dropt/analysis.hpp"
#include "dropt/async_frost.hpp"
#include "dropt/delay.hpp"
#include "dropt/graph.hpp"
#include "dropt/naive_baseline.hpp"
#include "dropt/objectives.hpp"

namespace dropt {

enum class Algorithm { dgd, gradient_tracking, addopt, frost, async_frost, naive_averaging };

enum class AlphaKind { adaptive, fixed, diminishing };

enum class TrackerTraceMode { none, first_window, all };

struct ExperimentConfig {
    std::string scenario;

    // graph + weights
    Topology topology = Topology::random_strongly_connected;
    int nodes = 0;
    std::uint64_t graph_seed = 0;
    std::vector<std::pair<int, int>> edges;  // from_edge_list only
    StochasticityClass weight_class = StochasticityClass::row_stochastic;
    WeightRule weight_rule = WeightRule::uniform_in_degree;

    // objectives: "indexed_quadratic" f_i = (x + (i+1))^2, optionally with the
    // first shift overridden ("outlier_shift"), or an explicit list.
    std::string objective_kind = "indexed_quadratic";
    std::optional<double> outlier_shift;
    std::vector<std::vector<double>> shifts;      // quadratic_list
    std::vector<double> curvatures;               // quadratic_list

    Algorithm algorithm = Algorithm::async_frost;

    // delays
    DelayDistribution delay_distribution = DelayDistribution::constant;
    int delay_tau = 0;          // constant
    int delay_lo = 0, delay_hi = 0;
    std::uint64_t delay_seed = 0;
    bool delay_per_edge = true;

    // tracker / epoch machinery
    double kappa = 0.01;
    int t_g = 0;                // 0: auto
    int settle_ticks = 0;       // 0: default 40/kappa

    AlphaKind alpha_kind = AlphaKind::adaptive;
    double alpha_value = 0.0;   // fixed value or diminishing alpha0

    int epochs = 60;            // async budget
    long ticks = 2000;          // sync / naive budget
    bool early_stop = false;
    double early_stop_tol = 1e-10;

    std::vector<double> x0;     // broadcast per dimension; empty = zeros
    TrackerTraceMode tracker_trace = TrackerTraceMode::none;

    nlohmann::json checks = nlohmann::json::array();

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// Every violated assumption, empty when runnable. Warnings (e.g. weight
    /// class vs algorithm guarantees) are reported separately by the run.
    std::vector<std::string> validate() const;

    // Resolved builders (throw on invalid confs).
    DirectedGraph build_graph_spec() const;
    WeightMatrix build_weight_matrix(const DirectedGraph& g) const;
    GlobalProblem build_problem() const;
    DelayModel build_delay_model() const;
    AgentVectors initial_states(int agents, int dimension) const;
};

struct CheckOutcome {
    std::string name;
    bool pass = false;
    double measured = 0.0;
};

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<std::string> warnings;
    std::vector<CheckOutcome> checks;
    bool checks_passed = true;

    // Optimisation runs.
    double final_max_error = 0.0;       // max_i ||x_i - x*||
    double consensus_value = 0.0;       // u-weighted mean, first coordinate
    long epochs_or_ticks_run = 0;
    long steps_to_tolerance = -1;       // first epoch/tick with error < 1e-2

    // Naive baseline runs.
    long naive_worst_case = 0;
    long naive_max_completion = 0;

    // Tracker trace summary (async runs with a recorded first window).
    long tracker_within_5pct_tick = -1;
};

/// Runs one scenario, writing traces, summary.json and config_resolved.json
/// under output_dir (created if needed). Deterministic for fixed seeds.
RunResult run_scenario(const ExperimentConfig& config,
                       const std::filesystem::path& output_dir);

/// Re-reads a finished asynchronous run directory and produces the theory
/// report (contraction coefficients, consensus contraction, co-coercivity).
TheoryReport report_on_run(const std::filesystem::path& run_dir);

/// Emits SVG plots from the CSV traces of a finished run. Throws when the
/// directory holds no usable trace.
void emit_plots(const std::filesystem::path& run_dir);

// Parsed epoch trace (used by report_on_run and the CLI compare command).
std::vector<AsyncEpochRow> load_epoch_trace(const std::filesystem::path& csv_path,
                                            int agents, int dimension);

} // namespace dropt
