#include "dropt/async_frost.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dropt {

StepSizeResult optimal_step_size(const std::vector<double>& smoothness,
                                 const Eigen::VectorXd& fle_estimate_diag,
                                 const Eigen::VectorXd& u) {
    const int n = static_cast<int>(smoothness.size());
    if (fle_estimate_diag.size() != n || u.size() != n)
        throw std::invalid_argument("step size inputs must have one entry per agent");
    double a_coef = 0.0, b_coef = 0.0;
    for (int i = 0; i < n; ++i) {
        if (fle_estimate_diag[i] <= 0.0)
            throw std::runtime_error("eigenvector estimate lost positivity");
        const double wl = smoothness[i] * u[i] / fle_estimate_diag[i];
        a_coef += wl * wl;
        b_coef += wl;
    }
    a_coef *= 4.0 * n;
    b_coef *= -8.0;

    StepSizeResult r;
    r.alpha = -b_coef / (2.0 * a_coef);
    r.coefficient = 4.0 + a_coef * r.alpha * r.alpha + b_coef * r.alpha;
    if (!(r.coefficient >= 0.0 && r.coefficient < 1.0)) {
        std::ostringstream msg;
        msg << "adaptive step size inadmissible: contraction minimum " << r.coefficient
            << " is not in [0, 1); smoothness ratio (sum w l)^2/(N sum (w l)^2) = "
            << (b_coef * b_coef) / (16.0 * a_coef) << " must exceed 3/4";
        throw std::invalid_argument(msg.str());
    }
    return r;
}

double contraction_coefficient(const std::vector<double>& smoothness,
                               const Eigen::VectorXd& fle_estimate_diag,
                               const Eigen::VectorXd& u, double alpha) {
    const int n = static_cast<int>(smoothness.size());
    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < n; ++i) {
        const double wl = smoothness[i] * u[i] / fle_estimate_diag[i];
        quad += wl * wl;
        lin += wl;
    }
    return 4.0 + 4.0 * n * quad * alpha * alpha - 8.0 * lin * alpha;
}

AsyncFrost::AsyncFrost(const WeightMatrix& w, std::vector<LocalObjective> objectives,
                       DelayModel delays, AsyncFrostConfig config, AgentVectors x0)
    : w_(&w),
      objectives_(std::move(objectives)),
      delays_(std::move(delays)),
      config_(config),
      half_period_([&] {
          int settle = config.settle_ticks > 0
                           ? config.settle_ticks
                           : static_cast<int>(std::ceil(40.0 / config.kappa));
          int h = config.t_g > 0 ? config.t_g / 2 : delays_.tau_max + settle;
          return h;
      }()),
      clock_(2 * half_period_) {
    const int n_agents = w.size();
    if (static_cast<int>(x0.size()) != n_agents ||
        static_cast<int>(objectives_.size()) != n_agents)
        throw std::invalid_argument("agent count mismatch");
    if (config.t_g > 0 && config.t_g % 2 != 0)
        throw std::invalid_argument("square wave period must be even");
    if (half_period_ <= delays_.tau_max)
        throw std::invalid_argument("half period must exceed tau_max so delayed boundary "
                                    "reads stay within the previous epoch");
    if (config_.exact_settle && delays_.tau_max != 0)
        throw std::invalid_argument("exact settling is a tau_max = 0 validation mode");
    if (config_.alpha_policy == AlphaPolicy::fixed && config_.fixed_alpha < 0.0)
        throw std::invalid_argument("fixed step size must be nonnegative");

    x_ = std::move(x0);
    e_.reserve(n_agents);
    norm_grad_.reserve(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        e_.push_back(Vector::Unit(n_agents, i));
        norm_grad_.push_back(objectives_[i].grad(x_[i]));  // [e_i(0)]_i = 1
    }
    p_.assign(n_agents, Vector::Zero(x_[0].size()));

    // Window baselines: r's pre-history equilibrium is 0 and the s tracker
    // pre-history is 0, so the zeroth window measures the initialisation
    // jumps themselves.
    prev_end_r_.assign(n_agents, Vector::Zero(x_[0].size()));
    prev_end_s_.assign(n_agents, 0.0);

    if (config_.exact_settle) {
        exact_r_ = norm_grad_;
        exact_s_.assign(n_agents, 1.0);
    } else {
        TrackerConfig tc;
        tc.kappa = config_.kappa;
        tc.settle_tol = config_.settle_tol;
        tc.settle_window = config_.settle_window;
        tc.s_pre_history = 0.0;
        tracker_.emplace(*w_, delays_, tc, norm_grad_, std::vector<double>(n_agents, 1.0));
    }
}

double AsyncFrost::pick_alpha(const Eigen::VectorXd& e_diag) const {
    if (config_.alpha_policy == AlphaPolicy::fixed) return config_.fixed_alpha;
    // Decentralised form: each agent substitutes its own eigenvector-entry
    // estimate for the unknown u_i, so the weights u_i / e_i collapse to 1.
    std::vector<double> l(objectives_.size());
    for (std::size_t i = 0; i < objectives_.size(); ++i) l[i] = objectives_[i].smoothness;
    return optimal_step_size(l, e_diag, e_diag).alpha;
}

void AsyncFrost::run_epoch() {
    const int n_agents = agent_count();

    AgentVectors window_end_r;
    std::vector<double> window_end_s;
    bool r_settled = false, s_settled = false;

    if (config_.exact_settle) {
        // Jump to the tau = 0 equilibrium: the consensus dynamics conserve
        // the fle-weighted mean, which is also the limit.
        Vector c_r = Vector::Zero(x_[0].size());
        double c_s = 0.0;
        for (int i = 0; i < n_agents; ++i) {
            c_r += w_->fle[i] * exact_r_[i];
            c_s += w_->fle[i] * exact_s_[i];
        }
        exact_r_.assign(n_agents, c_r);
        exact_s_.assign(n_agents, c_s);
        window_end_r = exact_r_;
        window_end_s = exact_s_;
        r_settled = s_settled = true;
    } else {
        // Tick up to the last tick before the boundary.
        for (int step = 0; step < half_period_ - 1; ++step) {
            tracker_->advance(nullptr, 0.0);
            if (tick_observer_) tick_observer_(tracker_->tick(), *tracker_);
        }
        window_end_r = tracker_->r_all();
        window_end_s = tracker_->s_all();
        r_settled = tracker_->r_settled();
        s_settled = tracker_->s_settled();
    }

    boundary_step(window_end_r, window_end_s, r_settled, s_settled);
}

void AsyncFrost::boundary_step(const AgentVectors& window_end_r,
                               const std::vector<double>& window_end_s,
                               bool r_settled, bool s_settled) {
    const int n_agents = agent_count();
    const int k = epoch_ + 1;
    const long boundary_tick = static_cast<long>(k) * half_period_;

    // Eigenvector estimate update. H > tau_max resolves every delayed read
    // of the piecewise-constant e to the previous epoch snapshot.
    std::vector<Vector> e_next(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        Vector acc = Vector::Zero(n_agents);
        for (int j = 0; j < n_agents; ++j)
            if ((*w_)(i, j) != 0.0) acc += (*w_)(i, j) * e_[j];
        e_next[i] = std::move(acc);
    }
    Eigen::VectorXd e_diag(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        e_diag[i] = e_next[i][i];
        if (e_diag[i] <= 0.0)
            throw std::runtime_error("eigenvector estimate lost positivity at epoch " +
                                     std::to_string(k));
    }

    // Accumulate the window's normalised equilibrium shift into p.
    std::vector<double> s_jumps(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        const double jump = window_end_s[i] - prev_end_s_[i];
        s_jumps[i] = std::abs(jump);
        if (s_jumps[i] < 1e-9) {
            std::ostringstream msg;
            msg << "s-tracker jump vanished (" << s_jumps[i] << ") for agent " << i
                << " at epoch " << k << "; epoch unsettled or kappa*tau too large";
            throw std::runtime_error(msg.str());
        }
        p_[i] += (window_end_r[i] - prev_end_r_[i]) / s_jumps[i];
    }

    const double alpha = pick_alpha(e_diag);

    // Descent over the previous epoch's estimates.
    AgentVectors x_next(n_agents);
    double step_change = 0.0;
    for (int i = 0; i < n_agents; ++i) {
        Vector acc = Vector::Zero(x_[0].size());
        for (int j = 0; j < n_agents; ++j)
            if ((*w_)(i, j) != 0.0) acc += (*w_)(i, j) * x_[j];
        acc -= alpha * p_[i];
        step_change = std::max(step_change, (acc - x_[i]).cwiseAbs().maxCoeff());
        x_next[i] = std::move(acc);
    }

    // Fresh normalised gradients; their change enters the r tracker at the
    // boundary tick, aligned with the square wave edge driving s.
    AgentVectors delta(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        Vector ng = objectives_[i].grad(x_next[i]) / e_diag[i];
        delta[i] = ng - norm_grad_[i];
        norm_grad_[i] = std::move(ng);
    }

    if (config_.exact_settle) {
        const double s_edge = (k % 2 == 1) ? -1.0 : 1.0;  // wave is 1 on even epochs
        for (int i = 0; i < n_agents; ++i) {
            exact_r_[i] += delta[i];
            exact_s_[i] += s_edge;
        }
    } else {
        tracker_->advance(&delta, clock_.delta(boundary_tick));
        if (tick_observer_) tick_observer_(tracker_->tick(), *tracker_);
    }

    e_ = std::move(e_next);
    x_ = std::move(x_next);
    prev_end_r_ = window_end_r;
    prev_end_s_ = window_end_s;
    last_step_change_ = step_change;
    epoch_ = k;

    AsyncEpochRow row;
    row.epoch = k;
    row.alpha = alpha;
    std::vector<double> l(objectives_.size());
    for (std::size_t i = 0; i < objectives_.size(); ++i) l[i] = objectives_[i].smoothness;
    row.contraction = contraction_coefficient(l, e_diag, w_->fle, alpha);
    row.r_settled = r_settled;
    row.s_settled = s_settled;
    row.x = x_;
    row.p = p_;
    row.e_diag.assign(e_diag.data(), e_diag.data() + n_agents);
    row.e_error.resize(n_agents);
    for (int i = 0; i < n_agents; ++i)
        row.e_error[i] = (e_[i] - w_->fle).cwiseAbs().maxCoeff();
    row.s_jump = std::move(s_jumps);
    trace_.push_back(std::move(row));
}

std::vector<AgentVectors> epoch_reference_trajectory(
    const WeightMatrix& w, const std::vector<LocalObjective>& objectives,
    AgentVectors x0, const AsyncFrostConfig& config, int epochs) {
    const int n_agents = w.size();
    std::vector<Vector> e;
    e.reserve(n_agents);
    for (int i = 0; i < n_agents; ++i) e.push_back(Vector::Unit(n_agents, i));
    std::vector<double> l(objectives.size());
    for (std::size_t i = 0; i < objectives.size(); ++i) l[i] = objectives[i].smoothness;

    std::vector<AgentVectors> out;
    out.push_back(x0);
    AgentVectors x = std::move(x0);
    for (int k = 1; k <= epochs; ++k) {
        // Weighted average of the previous epoch's normalised gradients.
        Vector correction = Vector::Zero(x[0].size());
        for (int i = 0; i < n_agents; ++i)
            correction += w.fle[i] * objectives[i].grad(x[i]) / e[i][i];

        std::vector<Vector> e_next(n_agents);
        for (int i = 0; i < n_agents; ++i) {
            Vector acc = Vector::Zero(n_agents);
            for (int j = 0; j < n_agents; ++j)
                if (w(i, j) != 0.0) acc += w(i, j) * e[j];
            e_next[i] = std::move(acc);
        }
        Eigen::VectorXd e_diag(n_agents);
        for (int i = 0; i < n_agents; ++i) e_diag[i] = e_next[i][i];

        double alpha = config.fixed_alpha;
        if (config.alpha_policy == AlphaPolicy::adaptive)
            alpha = optimal_step_size(l, e_diag, e_diag).alpha;

        AgentVectors x_next(n_agents);
        for (int i = 0; i < n_agents; ++i) {
            Vector acc = Vector::Zero(x[0].size());
            for (int j = 0; j < n_agents; ++j)
                if (w(i, j) != 0.0) acc += w(i, j) * x[j];
            x_next[i] = acc - alpha * correction;
        }
        e = std::move(e_next);
        x = std::move(x_next);
        out.push_back(x);
    }
    return out;
}

} // namespace dropt
