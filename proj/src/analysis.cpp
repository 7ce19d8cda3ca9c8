#include "dropt/analysis.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dropt/util.hpp"

namespace dropt {

bool TheoryReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string TheoryReport::to_text() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.pass ? "PASS" : "FAIL") << "  " << c.check_id
            << "  measured=" << format_double(c.measured)
            << " bound=" << format_double(c.bound)
            << " tol=" << format_double(c.tolerance) << "  " << c.description << '\n';
    }
    return out.str();
}

std::string TheoryReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : checks) {
        j.push_back({{"check_id", c.check_id},
                     {"description", c.description},
                     {"pass", c.pass},
                     {"measured", c.measured},
                     {"bound", c.bound},
                     {"tolerance", c.tolerance}});
    }
    return j.dump(2);
}

TheoryReport cocoercivity_check(const LocalObjective& f, int samples,
                                std::uint64_t seed) {
    const double sigma = f.strong_convexity;
    const double smooth = f.smoothness;
    const double mu1 = 1.0 / (sigma + smooth);
    const double mu2 = sigma * smooth / (sigma + smooth);
    const double slack = -1e-9;

    std::mt19937_64 rng(mix64(seed));
    std::normal_distribution<double> normal(0.0, 2.0);

    double worst_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Vector x(f.dimension), y(f.dimension);
        for (int d = 0; d < f.dimension; ++d) { x[d] = normal(rng); y[d] = normal(rng); }
        const Vector gx = f.grad(x), gy = f.grad(y);
        const double lhs = (x - y).dot(gx - gy);
        const double rhs = mu1 * (gx - gy).squaredNorm() + mu2 * (x - y).squaredNorm();
        worst_margin = std::min(worst_margin, lhs - rhs);
    }

    TheoryCheck check;
    check.check_id = "cocoercivity_extension";
    check.description = "<x-y, grad(x)-grad(y)> >= ||grad diff||^2/(sigma+L) + "
                        "sigma L ||x-y||^2/(sigma+L) on sampled pairs";
    check.measured = worst_margin;
    check.bound = 0.0;
    check.tolerance = -slack;
    check.pass = worst_margin >= slack;

    TheoryReport report;
    report.checks.push_back(check);
    return report;
}

TheoryReport consensus_contraction_check(const WeightMatrix& w, const AgentVectors& x0,
                                      int epochs) {
    const int n_agents = w.size();
    if (static_cast<int>(x0.size()) != n_agents)
        throw std::invalid_argument("initial state count mismatch");
    const int dim = static_cast<int>(x0[0].size());
    const Eigen::VectorXd& u = w.fle;
    const double rho = contraction_factor(w);

    // Route 1: simulate the consensus-only epoch recursion.
    AgentVectors x = x0;
    // Route 2: dense powers of the deflated matrix applied to x(0).
    const Eigen::MatrixXd deflated =
        w.entries - Eigen::VectorXd::Ones(n_agents) * u.transpose();
    Eigen::MatrixXd stacked0(n_agents, dim);
    for (int i = 0; i < n_agents; ++i) stacked0.row(i) = x0[i].transpose();
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n_agents, n_agents);

    double worst_gap = 0.0;
    double prev_err = 0.0, rate_gap = 0.0;
    bool have_rate = false;
    for (int k = 1; k <= epochs; ++k) {
        AgentVectors next(n_agents);
        for (int i = 0; i < n_agents; ++i) {
            Vector acc = Vector::Zero(dim);
            for (int j = 0; j < n_agents; ++j)
                if (w(i, j) != 0.0) acc += w(i, j) * x[j];
            next[i] = std::move(acc);
        }
        x = std::move(next);

        Vector mean = Vector::Zero(dim);
        for (int i = 0; i < n_agents; ++i) mean += u[i] * x[i];
        double err_sim2 = 0.0;
        for (int i = 0; i < n_agents; ++i) err_sim2 += (x[i] - mean).squaredNorm();
        const double err_sim = std::sqrt(err_sim2);

        power = deflated * power;
        const double err_direct = (power * stacked0).norm();

        worst_gap = std::max(worst_gap, std::abs(err_sim - err_direct));
        if (k == epochs && prev_err > 1e-12) {
            rate_gap = std::abs(err_sim / prev_err - rho);
            have_rate = true;
        }
        prev_err = err_sim;
    }

    TheoryReport report;
    TheoryCheck equality;
    equality.check_id = "consensus_contraction_equality";
    equality.description = "simulated consensus error equals ||(A - 1 u^T)^k x(0)|| "
                           "for every epoch";
    equality.measured = worst_gap;
    equality.bound = 0.0;
    equality.tolerance = 1e-10;
    equality.pass = worst_gap <= 1e-10;
    report.checks.push_back(equality);

    TheoryCheck rate;
    rate.check_id = "consensus_contraction_rate";
    rate.description = "late-epoch error ratio matches the contraction factor";
    rate.measured = have_rate ? rate_gap : 0.0;
    rate.bound = rho;
    rate.tolerance = 1e-6;
    rate.pass = !have_rate || rate_gap <= 1e-6;
    report.checks.push_back(rate);
    return report;
}

namespace {

// Least squares y ~ a + b k; returns (b, r_squared).
std::pair<double, double> fit_line(const std::vector<double>& ks,
                                   const std::vector<double>& ys) {
    const double n = static_cast<double>(ks.size());
    double sk = 0, sy = 0, skk = 0, sky = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        sk += ks[i];
        sy += ys[i];
        skk += ks[i] * ks[i];
        sky += ks[i] * ys[i];
    }
    const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
    const double intercept = (sy - slope * sk) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double fit = intercept + slope * ks[i];
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return {slope, r2};
}

} // namespace

TheoryReport contraction_trace_checks(const std::vector<AsyncEpochRow>& trace,
                                        const GlobalProblem& problem,
                                        const WeightMatrix& w) {
    if (trace.empty()) throw std::invalid_argument("empty run trace");
    const int n_agents = w.size();
    const Eigen::VectorXd& u = w.fle;
    const Vector x_star = global_optimum(problem);

    TheoryReport report;

    // Transient cutoff: first epoch after which the coefficient stays below 1.
    int cutoff = -1;
    for (int k = static_cast<int>(trace.size()) - 1; k >= 0; --k) {
        if (trace[k].contraction >= 1.0) { cutoff = k + 1; break; }
    }
    cutoff = std::max(cutoff, 0);
    double max_coeff_after = 0.0;
    if (cutoff >= static_cast<int>(trace.size())) {
        // Never contracts: report the worst coefficient seen.
        for (const auto& row : trace) max_coeff_after = std::max(max_coeff_after, row.contraction);
    }
    for (std::size_t k = cutoff; k < trace.size(); ++k)
        max_coeff_after = std::max(max_coeff_after, trace[k].contraction);

    TheoryCheck contraction;
    contraction.check_id = "contraction_coefficient_below_one";
    contraction.description = "contraction coefficient below 1 for every epoch past "
                              "the transient (cutoff epoch " +
                              std::to_string(cutoff < static_cast<int>(trace.size())
                                                 ? trace[cutoff].epoch
                                                 : -1) + ")";
    contraction.measured = max_coeff_after;
    contraction.bound = 1.0;
    contraction.tolerance = 0.0;
    contraction.pass = cutoff < static_cast<int>(trace.size()) && max_coeff_after < 1.0;
    report.checks.push_back(contraction);

    // Per-epoch contraction inequality. The distance to the optimum may
    // wiggle inside a decaying envelope: the coupling to the consensus error
    // enters the bound explicitly as
    //   dist(k+1)^2 <= c(k) dist(k)^2
    //                  + 2 alpha^2 (sum_i u_i l_i ||mean - x_i|| / e_i)^2
    //                  + 4 ||alpha sum_i grad f_i(x*)(1 - u_i/e_i)||^2.
    std::vector<double> dist(trace.size());
    std::vector<double> coupling(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
        Vector mean = Vector::Zero(x_star.size());
        for (int i = 0; i < n_agents; ++i) mean += u[i] * trace[k].x[i];
        dist[k] = (mean - x_star).norm();

        double lip_term = 0.0;
        for (int i = 0; i < n_agents; ++i)
            lip_term += u[i] * problem.objectives[i].smoothness *
                        (mean - trace[k].x[i]).norm() / trace[k].e_diag[i];
        Vector mismatch = Vector::Zero(x_star.size());
        for (int i = 0; i < n_agents; ++i)
            mismatch += problem.objectives[i].grad(x_star) *
                        (1.0 - u[i] / trace[k].e_diag[i]);
        const double a = trace[k].alpha;
        coupling[k] = 2.0 * a * a * lip_term * lip_term +
                      4.0 * a * a * mismatch.squaredNorm();
    }
    double worst_violation = 0.0;
    for (std::size_t k = cutoff; k + 1 < trace.size(); ++k) {
        const double bound = trace[k].contraction * dist[k] * dist[k] + coupling[k];
        worst_violation = std::max(worst_violation, dist[k + 1] * dist[k + 1] - bound);
    }
    TheoryCheck contraction_step;
    contraction_step.check_id = "per_epoch_contraction_inequality";
    contraction_step.description =
        "dist(k+1)^2 <= c(k) dist(k)^2 + consensus/eigenvector coupling terms "
        "past the transient";
    contraction_step.measured = worst_violation;
    contraction_step.bound = 0.0;
    contraction_step.tolerance = 1e-9;
    contraction_step.pass = worst_violation <= 1e-9;
    report.checks.push_back(contraction_step);

    // Envelope monotonicity: the 5-epoch running maximum of the distance is
    // non-increasing past the transient, up to the additive residual term
    // (the same coupling bound as above, which sets the floor the distance
    // hovers at on delayed runs).
    const int window = 5;
    double residual = 1e-9;
    for (std::size_t k = cutoff; k < trace.size(); ++k)
        residual = std::max(residual, std::sqrt(coupling[k]));
    double worst_env_increase = 0.0;
    double prev_env = -1.0;
    for (std::size_t k = cutoff; k < trace.size(); ++k) {
        double env = 0.0;
        for (std::size_t j = k >= window - 1 ? k - (window - 1) : 0; j <= k; ++j)
            env = std::max(env, dist[j]);
        if (prev_env >= 0.0)
            worst_env_increase = std::max(worst_env_increase, env - prev_env);
        prev_env = env;
    }
    TheoryCheck monotone;
    monotone.check_id = "distance_envelope_monotone";
    monotone.description = "5-epoch envelope of ||u-weighted mean of x(k) - x*|| "
                           "non-increasing past the transient, within the "
                           "additive residual";
    monotone.measured = worst_env_increase;
    monotone.bound = residual;
    monotone.tolerance = residual;
    monotone.pass = worst_env_increase <= residual;
    report.checks.push_back(monotone);

    // Geometric decay of the eigenvector-mismatch term. The theory gives an
    // upper bound C lambda^k; the raw term oscillates below it (complex
    // contraction modes can null the sum at isolated epochs), so the fit
    // runs over 3-epoch envelope maxima past the transient cutoff.
    std::vector<double> raw;
    std::vector<int> raw_epoch;
    for (std::size_t k = cutoff; k < trace.size(); ++k) {
        const auto& row = trace[k];
        Vector term = Vector::Zero(x_star.size());
        for (int i = 0; i < n_agents; ++i)
            term += row.alpha * problem.objectives[i].grad(x_star) *
                    (1.0 - u[i] / row.e_diag[i]);
        raw.push_back(term.squaredNorm());
        raw_epoch.push_back(row.epoch);
    }
    std::vector<double> ks, logs;
    for (std::size_t j = 0; j + 3 <= raw.size(); j += 3) {
        const double env = std::max({raw[j], raw[j + 1], raw[j + 2]});
        if (env > 1e-250) {
            ks.push_back(raw_epoch[j + 1]);
            logs.push_back(std::log(env));
        }
    }
    TheoryCheck decay;
    decay.check_id = "eigenvector_mismatch_geometric_decay";
    decay.description = "3-epoch envelope of ||alpha_k sum_i grad f_i(x*)"
                        "(1 - u_i/[e_i(k)]_i)||^2 fits C lambda^k with lambda in "
                        "(0,1), R^2 > 0.95";
    if (ks.size() >= 3) {
        const auto [slope, r2] = fit_line(ks, logs);
        const double lambda = std::exp(slope);
        decay.measured = lambda;
        decay.bound = r2;
        decay.tolerance = 0.95;
        decay.pass = lambda > 0.0 && lambda < 1.0 && r2 > 0.95;
    } else {
        // Term vanished immediately (e.g. e = u exactly); decay is trivial.
        decay.measured = 0.0;
        decay.bound = 1.0;
        decay.tolerance = 0.95;
        decay.pass = true;
    }
    report.checks.push_back(decay);
    return report;
}

} // namespace dropt
