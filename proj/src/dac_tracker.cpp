#include "dropt/dac_tracker.hpp"

#include <sstream>
#include <stdexcept>

namespace dropt {

SquareWaveClock::SquareWaveClock(int period) : period_(period) {
    if (period <= 0 || period % 2 != 0)
        throw std::invalid_argument("square wave period must be a positive even tick count");
}

int SquareWaveClock::value(long tick) const {
    if (tick < 0) return 0;
    return (tick % period_) < half_period() ? 1 : 0;
}

AgentVectors consensus_step(const AgentVectors& states, const WeightMatrix& w,
                            double kappa_prime) {
    const int n_agents = w.size();
    if (static_cast<int>(states.size()) != n_agents)
        throw std::invalid_argument("state count does not match weight matrix");
    AgentVectors next(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        Vector lap = Vector::Zero(states[i].size());
        for (int j = 0; j < n_agents; ++j) {
            const double a = w(i, j);
            if (a != 0.0) lap += a * (states[i] - states[j]);
        }
        next[i] = states[i] - kappa_prime * lap;
    }
    return next;
}

std::string consensus_gain_warning(const WeightMatrix& w, double kappa_prime) {
    double max_row = 0.0;
    for (int i = 0; i < w.size(); ++i)
        max_row = std::max(max_row, w.entries.row(i).sum());
    if (kappa_prime * max_row >= 1.0) {
        std::ostringstream msg;
        msg << "consensus gain " << kappa_prime << " with row sum " << max_row
            << " reaches the stability limit (kappa' * row_sum >= 1)";
        return msg.str();
    }
    return {};
}

Vector equilibrium_shift_prediction(const Eigen::VectorXd& u, const AgentVectors& delta_b,
                                    double kappa, double tau_bar) {
    if (u.size() != static_cast<long>(delta_b.size()))
        throw std::invalid_argument("eigenvector / input dimension mismatch");
    Vector acc = Vector::Zero(delta_b.empty() ? 0 : delta_b[0].size());
    for (std::size_t i = 0; i < delta_b.size(); ++i) acc += u[i] * delta_b[i];
    return acc / (1.0 + kappa * tau_bar);
}

Vector normalized_average(const Vector& c_r, double c_s_jump) {
    const double jump = std::abs(c_s_jump);
    if (jump < 1e-9)
        throw std::runtime_error("s-tracker jump below 1e-9; epoch unsettled or "
                                 "kappa * tau_bar too large to normalise");
    return c_r / jump;
}

DelayedTracker::DelayedTracker(const WeightMatrix& w, DelayModel delays,
                               TrackerConfig config, AgentVectors r0,
                               std::vector<double> s0)
    : w_(&w), delays_(std::move(delays)), config_(config) {
    const int n_agents = w.size();
    if (static_cast<int>(r0.size()) != n_agents || static_cast<int>(s0.size()) != n_agents)
        throw std::invalid_argument("initial tracker state count mismatch");
    if (config_.kappa <= 0.0)
        throw std::invalid_argument("tracker gain must be positive");

    row_entries_.resize(n_agents);
    kappa_prime_.resize(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n_agents; ++j) {
            const double a = w(i, j);
            if (a != 0.0) {
                row_entries_[i].emplace_back(j, a);
                row_sum += a;
            }
        }
        if (row_sum <= 0.0)
            throw std::invalid_argument("weight matrix has an empty row");
        kappa_prime_[i] = config_.kappa / row_sum;
    }

    const int dim = static_cast<int>(r0[0].size());
    const double s_pre = config_.s_pre_history.value_or(s0[0]);
    r_hist_.reserve(n_agents);
    s_hist_.reserve(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        r_hist_.emplace_back(delays_.tau_max, Vector::Zero(dim));  // r is 0 before tick 0
        s_hist_.emplace_back(delays_.tau_max, s_pre);
        r_hist_[i].publish(0, r0[i]);
        s_hist_[i].publish(0, s0[i]);
    }
    r_ = std::move(r0);
    s_ = std::move(s0);
}

void DelayedTracker::advance(const AgentVectors* r_impulse, double s_impulse) {
    const int n_agents = agent_count();
    const long t = tick_;
    AgentVectors r_next(n_agents);
    std::vector<double> s_next(n_agents);
    double r_change = 0.0, s_change = 0.0;

    for (int i = 0; i < n_agents; ++i) {
        Vector r_lap = Vector::Zero(r_[i].size());
        double s_lap = 0.0;
        for (const auto& [j, a] : row_entries_[i]) {
            const int tau = sample_delay(delays_, j, i, t);
            r_lap += a * (r_[i] - stale_read(r_hist_[j], t, tau, delays_.tau_max));
            s_lap += a * (s_[i] - stale_read(s_hist_[j], t, tau, delays_.tau_max));
        }
        r_next[i] = r_[i] - kappa_prime_[i] * r_lap;
        if (r_impulse) r_next[i] += (*r_impulse)[i];
        s_next[i] = s_[i] + s_impulse - kappa_prime_[i] * s_lap;

        r_change = std::max(r_change, (r_next[i] - r_[i]).cwiseAbs().maxCoeff());
        s_change = std::max(s_change, std::abs(s_next[i] - s_[i]));
    }

    ++tick_;
    for (int i = 0; i < n_agents; ++i) {
        r_hist_[i].publish(tick_, r_next[i]);
        s_hist_[i].publish(tick_, s_next[i]);
    }
    r_ = std::move(r_next);
    s_ = std::move(s_next);

    r_changes_.push_back(r_change);
    s_changes_.push_back(s_change);
    while (static_cast<int>(r_changes_.size()) > config_.settle_window) r_changes_.pop_front();
    while (static_cast<int>(s_changes_.size()) > config_.settle_window) s_changes_.pop_front();
}

namespace {
bool all_below(const std::deque<double>& changes, int window, double tol) {
    if (static_cast<int>(changes.size()) < window) return false;
    for (double c : changes)
        if (c >= tol) return false;
    return true;
}
} // namespace

bool DelayedTracker::r_settled() const {
    return all_below(r_changes_, config_.settle_window, config_.settle_tol);
}

bool DelayedTracker::s_settled() const {
    return all_below(s_changes_, config_.settle_window, config_.settle_tol);
}

} // namespace dropt
