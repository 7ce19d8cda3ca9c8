// Acceptance suite: the project's exit criteria, each asserted at its stated
// tolerance and printed as one PASS/FAIL line. Criteria 1-3 exercise the
// shipped 22-agent scenarios end to end; 4-10 are property and oracle based;
// 11 checks byte-identical replays of every shipped scenario.
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dropt/analysis.hpp"
#include "dropt/experiment.hpp"
#include "dropt/naive_baseline.hpp"
#include "dropt/sync_optimizers.hpp"

using namespace dropt;
namespace fs = std::filesystem;

namespace {

void verdict(int criterion, const std::string& label, bool pass,
             const std::string& detail) {
    std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                label.c_str(), detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(pass, "criterion ", criterion, ": ", label, " -- ", detail);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dropt_accept_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig shipped(const std::string& name) {
    return ExperimentConfig::from_file(fs::path(DROPT_CONFIG_DIR) / name);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

AgentVectors scalars(const std::vector<double>& values) {
    AgentVectors out;
    for (double v : values) out.push_back(Vector::Constant(1, v));
    return out;
}

} // namespace

TEST_CASE("criterion 1: regular-quadratics scenario reaches -11.5") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_scenario(shipped("s1.json"), fresh_dir("c1"));
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Every agent within 1e-2 of -11.5 (final_max_error is measured against
    // the analytic optimum -11.5).
    std::ostringstream detail;
    detail << "max |x_i + 11.5| = " << result.final_max_error << ", runtime "
           << seconds << " s";
    verdict(1, "22 agents, tau_max 157, kappa 0.01 converge to -11.5",
            result.final_max_error < 1e-2 && seconds < 60.0, detail.str());
}

TEST_CASE("criterion 2: outlier scenario reaches the analytic -16") {
    const auto result = run_scenario(shipped("s2.json"), fresh_dir("c2"));
    std::ostringstream detail;
    detail << "max |x_i + 16| = " << result.final_max_error
           << ", consensus value " << result.consensus_value
           << ", gap to the reported -16.045: "
           << std::abs(result.consensus_value - (-16.045)) << " (reported, not asserted)";
    verdict(2, "outlier objective set converges to -16.0 within 1e-1",
            result.final_max_error < 1e-1, detail.str());
}

TEST_CASE("criterion 3: tracker beats the naive flood's 3297-tick worst case") {
    // Tracker side: the first window of the shipped s1 run.
    const auto s1 = run_scenario(shipped("s1.json"), fresh_dir("c3_tracker"));
    // Naive side: same graph and delay model.
    const auto naive = run_scenario(shipped("naive_s1.json"), fresh_dir("c3_naive"));
    // Worst case realised exactly: constant-157 delays on the 22-cycle.
    const auto pessimal =
        run_scenario(shipped("naive_worstcase.json"), fresh_dir("c3_pessimal"));

    std::ostringstream detail;
    detail << "tracker within 5% from tick " << s1.tracker_within_5pct_tick
           << "; naive worst case " << naive.naive_worst_case
           << ", realised pessimal completion " << pessimal.naive_max_completion;
    verdict(3, "tracker within 5% before tick 3000, naive worst case exactly 3297",
            s1.tracker_within_5pct_tick >= 0 && s1.tracker_within_5pct_tick < 3000 &&
                naive.naive_worst_case == 3297 &&
                pessimal.naive_max_completion == 3297 &&
                pessimal.naive_worst_case == 3297,
            detail.str());
}

TEST_CASE("criterion 4: tau_max = 0 degeneration matches the synchronous reference") {
    const auto g = build_graph(4, Topology::random_strongly_connected, 13);
    const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                 WeightRule::uniform_in_degree);
    std::vector<LocalObjective> f;
    AgentVectors x0;
    for (int i = 0; i < 4; ++i) {
        Vector c(2), x(2);
        c << double(i + 1), 0.5 - 0.25 * i;
        x << 0.4 * i, -0.3 * i;
        f.push_back(quadratic(c, 1.0));
        x0.push_back(x);
    }
    AsyncFrostConfig cfg;
    cfg.exact_settle = true;
    cfg.t_g = 2;
    AsyncFrost sim(w, f, DelayModel::constant(0), cfg, x0);
    const int epochs = 30;
    const auto reference = epoch_reference_trajectory(w, f, x0, cfg, epochs);
    double worst = 0.0;
    for (int k = 1; k <= epochs; ++k) {
        sim.run_epoch();
        for (int i = 0; i < 4; ++i)
            worst = std::max(worst,
                             (sim.x()[i] - reference[k][i]).cwiseAbs().maxCoeff());
    }
    std::ostringstream detail;
    detail << "max epoch-boundary deviation " << worst << " over " << epochs
           << " epochs (4 nodes, dimension 2)";
    verdict(4, "synchronous degeneration matches the reference to 1e-8", worst < 1e-8,
            detail.str());
}

TEST_CASE("criterion 5: eigenvector-weighted tracking identity") {
    std::mt19937_64 rng(501);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    std::uniform_real_distribution<double> curv(0.5, 1.5);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n_agents = 2 + trial % 4;  // N <= 5
        const int dim = 1 + trial % 2;       // n <= 2
        const auto g =
            build_graph(n_agents, Topology::random_strongly_connected, 600 + trial);
        const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                     WeightRule::uniform_in_degree);
        std::vector<LocalObjective> f;
        AgentVectors x0;
        for (int i = 0; i < n_agents; ++i) {
            Vector c(dim), x(dim);
            for (int d = 0; d < dim; ++d) { c[d] = shift(rng); x[d] = shift(rng); }
            f.push_back(quadratic(c, curv(rng)));
            x0.push_back(x);
        }
        auto s = frost_init(x0, f);
        for (long t = 0; t < 60; ++t) {
            Vector lhs = Vector::Zero(dim), rhs = Vector::Zero(dim);
            for (int i = 0; i < n_agents; ++i) {
                lhs += w.fle[i] * s.z[i];
                rhs += w.fle[i] * f[i].grad(s.x[i]) / s.y[i][i];
            }
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
            s = frost_step(s, w, f, 0.02);
        }
    }
    std::ostringstream detail;
    detail << "max identity residual " << worst << " over 20 problems x 60 ticks";
    verdict(5, "weighted gradient-tracking identity holds to 1e-10", worst < 1e-10,
            detail.str());
}

TEST_CASE("criterion 6: gradient tracking conservation") {
    std::mt19937_64 rng(601);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    std::uniform_real_distribution<double> curv(0.5, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int n_agents = 2 + trial % 4;  // N <= 5
        const int dim = 1 + trial % 2;
        const auto g =
            build_graph(n_agents, Topology::random_strongly_connected, 700 + trial);
        const auto w = build_weights(g, StochasticityClass::doubly_stochastic,
                                     WeightRule::uniform_in_degree);
        std::vector<LocalObjective> f;
        AgentVectors x0;
        for (int i = 0; i < n_agents; ++i) {
            Vector c(dim), x(dim);
            for (int d = 0; d < dim; ++d) { c[d] = shift(rng); x[d] = shift(rng); }
            f.push_back(quadratic(c, curv(rng)));
            x0.push_back(x);
        }
        auto s = gradient_tracking_init(x0, f);
        for (long t = 0; t < 150; ++t) {
            Vector mean_y = Vector::Zero(dim), mean_g = Vector::Zero(dim);
            for (int i = 0; i < n_agents; ++i) {
                mean_y += s.y[i];
                mean_g += f[i].grad(s.x[i]);
            }
            worst = std::max(worst,
                             (mean_y - mean_g).cwiseAbs().maxCoeff() / n_agents);
            s = gradient_tracking_step(s, w, f, 0.05);
        }
    }
    std::ostringstream detail;
    detail << "max conservation residual " << worst;
    verdict(6, "average-gradient conservation holds to 1e-12", worst < 1e-12,
            detail.str());
}

TEST_CASE("criterion 7: consensus contraction equality and rate") {
    // Directed cycles with self-loops are normal matrices, so the error
    // ratio equals the contraction factor at every late epoch.
    bool pass = true;
    std::ostringstream detail;
    for (int n : {3, 4, 5}) {
        const auto g = build_graph(n, Topology::cycle, 0);
        const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                     WeightRule::uniform_in_degree);
        std::vector<double> x0(n);
        for (int i = 0; i < n; ++i) x0[i] = (i % 2) ? -1.5 : 2.0 + i;
        const auto report = consensus_contraction_check(w, scalars(x0), 20);
        pass &= report.all_pass();
        detail << "N=" << n << " equality gap " << report.checks[0].measured
               << " rate gap " << report.checks[1].measured << "; ";
    }
    verdict(7, "simulated error equals matrix powers to 1e-10, rate to 1e-6", pass,
            detail.str());
}

TEST_CASE("criterion 8: co-coercivity sweep") {
    std::mt19937_64 rng(801);
    std::uniform_real_distribution<double> curv(0.05, 5.0);  // sigma, L in [0.1, 10]
    double worst = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 50; ++trial) {
        Vector diag(2), c(2);
        diag << curv(rng), curv(rng);
        c << 0.5, -1.5;
        const auto report =
            cocoercivity_check(anisotropic_quadratic(diag, c), 1000, 8000 + trial);
        pass &= report.all_pass();
        worst = std::min(worst, report.checks[0].measured);
    }
    std::ostringstream detail;
    detail << "worst margin " << worst << " over 50 quadratics x 1000 pairs";
    verdict(8, "co-coercivity holds with -1e-9 slack", pass && worst >= -1e-9,
            detail.str());
}

TEST_CASE("criterion 9: adaptive step size closed form and rejection") {
    const int n = 22;
    std::vector<double> l(n, 2.0);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / n);
    const auto r = optimal_step_size(l, u, u);
    const double alpha_expected = 44.0 / (22.0 * 88.0);  // sum l / (N sum l^2)
    const bool closed_form = std::abs(r.alpha - alpha_expected) < 1e-12 &&
                             std::abs(r.coefficient) < 1e-12;

    // Heterogeneous smoothness violating the 3/4 ratio is rejected when the
    // scenario requests the adaptive policy.
    auto config = shipped("s1.json");
    config.objective_kind = "quadratic_list";
    config.shifts.assign(22, {0.0});
    config.curvatures.assign(22, 1.0);
    config.curvatures[0] = 20.0;  // ratio collapses below 3/4
    const auto violations = config.validate();
    bool rejected = false;
    for (const auto& v : violations) rejected |= v.find("3/4") != std::string::npos;

    std::ostringstream detail;
    detail << "alpha = " << r.alpha << " (expected " << alpha_expected << "), coefficient = "
           << r.coefficient << ", config rejection: " << (rejected ? "yes" : "no");
    verdict(9, "alpha = sum l/(N sum l^2) with coefficient 0; violations rejected at "
               "config time",
            closed_form && rejected, detail.str());
}

TEST_CASE("criterion 10: the consensus limit is delay invariant") {
    auto base = shipped("s1.json");
    base.tracker_trace = TrackerTraceMode::none;
    base.checks = nlohmann::json::array();

    std::vector<double> limits;
    int run_id = 0;
    for (int tau_max : {0, 20, 157}) {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
            auto config = base;
            if (tau_max == 0) {
                config.delay_distribution = DelayDistribution::constant;
                config.delay_tau = 0;
            } else {
                config.delay_distribution = DelayDistribution::uniform_integer;
                config.delay_lo = 0;
                config.delay_hi = tau_max;
                config.delay_seed = seed;
            }
            const auto result = run_scenario(
                config, fresh_dir("c10_" + std::to_string(run_id++)));
            limits.push_back(result.consensus_value);
            if (tau_max == 0) break;  // seed has no effect without randomness
        }
    }
    const double spread = *std::max_element(limits.begin(), limits.end()) -
                          *std::min_element(limits.begin(), limits.end());
    std::ostringstream detail;
    detail << "consensus values span " << spread << " across " << limits.size()
           << " runs (tau_max in {0, 20, 157}, 5 seeds)";
    verdict(10, "final consensus value varies by < 1e-2 across delays", spread < 1e-2,
            detail.str());
}

TEST_CASE("criterion 11: shipped scenarios replay byte-identically") {
    const std::vector<std::string> configs{
        "s1.json",      "s2.json",          "s1_tau0.json",
        "naive_s1.json", "naive_worstcase.json", "frost_demo.json",
        "gradient_tracking_demo.json",      "addopt_demo.json", "dgd_demo.json"};
    bool pass = true;
    std::ostringstream detail;
    for (const auto& name : configs) {
        const auto config = shipped(name);
        const auto dir_a = fresh_dir("c11_a_" + config.scenario);
        const auto dir_b = fresh_dir("c11_b_" + config.scenario);
        const auto res_a = run_scenario(config, dir_a);
        run_scenario(config, dir_b);
        bool identical = true;
        for (const auto& entry : fs::directory_iterator(dir_a)) {
            const auto file = entry.path().filename();
            identical &= slurp(dir_a / file) == slurp(dir_b / file);
        }
        pass &= identical && res_a.checks_passed;
        if (!identical) detail << name << " differs; ";
        if (!res_a.checks_passed) detail << name << " checks failed; ";
    }
    if (pass) detail << "all " << configs.size() << " scenarios identical and green";
    verdict(11, "identical configs produce byte-identical outputs", pass,
            detail.str());
}
