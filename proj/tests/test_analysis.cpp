#include <doctest.h>

#include <cmath>
#include <random>

#include "dropt/analysis.hpp"

using namespace dropt;

namespace {

WeightMatrix cycle3_row() {
    const auto g = build_graph(3, Topology::cycle, 0);
    return build_weights(g, StochasticityClass::row_stochastic,
                         WeightRule::uniform_in_degree);
}

AgentVectors scalars(std::initializer_list<double> values) {
    AgentVectors out;
    for (double v : values) {
        Vector x(1);
        x << v;
        out.push_back(x);
    }
    return out;
}

GlobalProblem indexed_problem(int count) {
    GlobalProblem p;
    for (int i = 1; i <= count; ++i) p.objectives.push_back(quadratic(double(i), 1.0));
    return p;
}

} // namespace

TEST_CASE("cocoercivity holds with equality for the isotropic quadratic") {
    // f = x^2 has sigma = L = 2, so the inequality is tight.
    const auto report = cocoercivity_check(quadratic(0.0, 1.0), 500, 3);
    REQUIRE(report.checks.size() == 1);
    CHECK(report.checks[0].pass);
    CHECK(std::abs(report.checks[0].measured) < 1e-12);
}

TEST_CASE("cocoercivity on anisotropic quadratics") {
    Vector curv(2), c(2);
    curv << 1.0, 5.0;  // sigma = 2, L = 10
    c << 0.5, -1.0;
    const auto report = cocoercivity_check(anisotropic_quadratic(curv, c), 1000, 11);
    CHECK(report.checks[0].pass);
    CHECK(report.checks[0].measured >= -1e-9);
}

TEST_CASE("cocoercivity detects overstated strong convexity") {
    Vector curv(2), c(2);
    curv << 1.0, 5.0;
    c << 0.0, 0.0;
    auto f = anisotropic_quadratic(curv, c);
    f.strong_convexity = 5.0;  // true constant is 2
    const auto report = cocoercivity_check(f, 1000, 12);
    CHECK_FALSE(report.checks[0].pass);
}

TEST_CASE("cocoercivity sweep over random quadratics") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> curv(0.05, 5.0);  // sigma, L in [0.1, 10]
    for (int trial = 0; trial < 50; ++trial) {
        Vector diag(2), c(2);
        diag << curv(rng), curv(rng);
        c << 1.0, -2.0;
        const auto report = cocoercivity_check(anisotropic_quadratic(diag, c), 200,
                                               1000 + trial);
        CHECK(report.checks[0].pass);
    }
}

TEST_CASE("cocoercivity reports are reproducible bit for bit") {
    const auto a = cocoercivity_check(quadratic(1.0, 1.3), 300, 42);
    const auto b = cocoercivity_check(quadratic(1.0, 1.3), 300, 42);
    CHECK(a.checks[0].measured == b.checks[0].measured);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("consensus contraction equality and rate") {
    const auto w = cycle3_row();
    const auto report =
        consensus_contraction_check(w, scalars({3.0, -1.0, 0.5}), 20);
    REQUIRE(report.checks.size() == 2);
    CHECK(report.checks[0].pass);  // equality of both routes to 1e-10
    CHECK(report.checks[1].pass);  // rate equals the contraction factor
    CHECK(report.checks[1].bound == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("consensus contraction with an already consensual start") {
    const auto w = cycle3_row();
    const auto report = consensus_contraction_check(w, scalars({2.0, 2.0, 2.0}), 8);
    CHECK(report.checks[0].pass);
    CHECK(report.checks[0].measured < 1e-14);
}

TEST_CASE("rank-one weights contract in a single step") {
    WeightMatrix flat;
    flat.entries = Eigen::MatrixXd::Constant(2, 2, 0.5);
    flat.cls = StochasticityClass::doubly_stochastic;
    flat.fle = Eigen::VectorXd::Constant(2, 0.5);
    const auto report = consensus_contraction_check(flat, scalars({1.0, -1.0}), 5);
    CHECK(report.all_pass());
}

TEST_CASE("contraction coefficients over an asynchronous run") {
    // Asymmetric graph so the eigenvector-mismatch term does not cancel.
    const auto g = build_graph(4, Topology::random_strongly_connected, 19);
    const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                 WeightRule::uniform_in_degree);
    GlobalProblem prob = indexed_problem(4);
    AsyncFrostConfig cfg;
    cfg.exact_settle = true;
    cfg.t_g = 2;
    AsyncFrost sim(w, prob.objectives, DelayModel::constant(0), cfg,
                   scalars({0.0, 0.0, 0.0, 0.0}));
    for (int k = 0; k < 40; ++k) sim.run_epoch();

    const auto report = contraction_trace_checks(sim.trace(), prob, w);
    REQUIRE(report.checks.size() == 4);
    CHECK(report.checks[0].pass);  // coefficient < 1 past the transient
    CHECK(report.checks[1].pass);  // per-epoch contraction inequality
    CHECK(report.checks[2].pass);  // distance envelope monotone
    CHECK(report.checks[3].pass);  // geometric decay fit
    CHECK(report.checks[3].measured > 0.0);
    CHECK(report.checks[3].measured < 1.0);
}

TEST_CASE("symmetric problems cancel the mismatch term entirely") {
    // On the 3-cycle all [e_i(k)]_i coincide, so the optimality condition
    // zeroes the term and the decay check passes trivially.
    const auto w = cycle3_row();
    GlobalProblem prob = indexed_problem(3);
    AsyncFrostConfig cfg;
    cfg.exact_settle = true;
    cfg.t_g = 2;
    AsyncFrost sim(w, prob.objectives, DelayModel::constant(0), cfg,
                   scalars({0.0, 0.0, 0.0}));
    for (int k = 0; k < 40; ++k) sim.run_epoch();
    const auto report = contraction_trace_checks(sim.trace(), prob, w);
    CHECK(report.all_pass());
    CHECK(report.checks[3].measured == 0.0);
}

TEST_CASE("zero step size fails the contraction check") {
    const auto w = cycle3_row();
    GlobalProblem prob = indexed_problem(3);
    AsyncFrostConfig cfg;
    cfg.exact_settle = true;
    cfg.t_g = 2;
    cfg.alpha_policy = AlphaPolicy::fixed;
    cfg.fixed_alpha = 0.0;
    AsyncFrost sim(w, prob.objectives, DelayModel::constant(0), cfg,
                   scalars({1.0, 0.0, -1.0}));
    for (int k = 0; k < 10; ++k) sim.run_epoch();

    for (const auto& row : sim.trace()) CHECK(row.contraction == doctest::Approx(4.0));
    const auto report = contraction_trace_checks(sim.trace(), prob, w);
    CHECK_FALSE(report.checks[0].pass);
    CHECK(report.checks[0].measured == doctest::Approx(4.0));
}

TEST_CASE("report serialisation") {
    const auto report = cocoercivity_check(quadratic(0.0, 1.0), 50, 1);
    const std::string text = report.to_text();
    CHECK(text.find("PASS") != std::string::npos);
    CHECK(text.find("cocoercivity_extension") != std::string::npos);
    const std::string json = report.to_json();
    CHECK(json.find("\"check_id\"") != std::string::npos);
    CHECK(json.find("\"pass\": true") != std::string::npos);
}
