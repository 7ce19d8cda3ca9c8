/**
 * Delay-robust dynamic average consensus.
 *
 * The tracker pair (r, s) advances one tick at a time:
 *
 *   r_i(t+1) = r_i(t) + db_i(t+1) - k'_i sum_j a_ij (r_i(t) - r_j(t - tau_ij(t)))
 *   s_i(t+1) = s_i(t) + dg(t+1)   - k'_i sum_j a_ij (s_i(t) - s_j(t - tau_ij(t)))
 *
 * where db are input increments injected at square-wave edges and dg is the
 * wave's own edge. Every weighted term, the node's own a_ii term included,
 * is read from the published history at the edge's sampled delay; with a
 * constant delay d this makes the equilibrium shift after an input step Db
 * exactly (sum_i u_i Db_i) / (1 + kappa d). Reading the self term undelayed
 * would shrink the delay factor to 1 + kappa d (1 - sum_i u_i a_ii) and the
 * r/s-jump normalisation would no longer measure 1/(1 + kappa tau_bar).
 *
 * Buffers follow the double-buffered tick contract: one owner publishes per
 * tick, all delayed reads target already-published ticks.
 */
#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "dropt/delay.hpp"
#include "dropt/graph.hpp"
#include "dropt/objectives.hpp"

namespace dropt {

/// Synchronised binary square wave shared by all agents. Value is 1 on the
/// first half-period [0, T/2) of each period, 0 on the second, so edges
/// (|delta| = 1) arrive exactly at integer multiples of T/2 and g(0) = 1.
class SquareWaveClock {
public:
    explicit SquareWaveClock(int period);

    int period() const { return period_; }
    int half_period() const { return period_ / 2; }

    int value(long tick) const;                 // 0 before tick 0
    int delta(long tick) const { return value(tick) - value(tick - 1); }
    bool is_edge(long tick) const { return tick >= 0 && tick % half_period() == 0; }

private:
    int period_;
};

/// One synchronous consensus tick (the delay-free dynamics):
/// x_i <- x_i - kappa_prime * sum_j a_ij (x_i - x_j).
/// States converge to the fle-weighted mean of the initial values.
AgentVectors consensus_step(const AgentVectors& states, const WeightMatrix& w,
                            double kappa_prime);

/// Non-empty warning when the gain can destabilise the consensus dynamics
/// (kappa_prime * row_sum >= 1 for some row).
std::string consensus_gain_warning(const WeightMatrix& w, double kappa_prime);

/// Closed-form equilibrium shift after a step `delta_b` in the inputs:
/// (sum_i u_i delta_b_i) / (1 + kappa tau_bar). Test oracle only; agents
/// never see tau_bar.
Vector equilibrium_shift_prediction(const Eigen::VectorXd& u, const AgentVectors& delta_b,
                                    double kappa, double tau_bar);

/// Delay-factor cancellation: c_p = c_r / |c_s jump|. Throws when the jump
/// is below 1e-9 (unsettled epoch or overflowing kappa tau_bar).
Vector normalized_average(const Vector& c_r, double c_s_jump);

struct TrackerConfig {
    double kappa = 0.01;
    double settle_tol = 1e-9;  // max-norm change per tick counted as settled
    int settle_window = 10;    // ticks the change must stay below settle_tol
    // Value delayed reads return for ticks < 0. r pre-history is always 0;
    // s defaults to its initial value and may be overridden (the asynchronous
    // optimizer uses 0 so the very first window carries a measurable s-jump).
    std::optional<double> s_pre_history;
};

class DelayedTracker {
public:
    DelayedTracker(const WeightMatrix& w, DelayModel delays, TrackerConfig config,
                   AgentVectors r0, std::vector<double> s0);

    /// Advances one tick. `r_impulse` (nullable) is added to r at the new
    /// tick; `s_impulse` is the square wave increment at the new tick.
    void advance(const AgentVectors* r_impulse, double s_impulse);

    long tick() const { return tick_; }
    int agent_count() const { return static_cast<int>(r_.size()); }
    const Vector& r(int agent) const { return r_[agent]; }
    double s(int agent) const { return s_[agent]; }
    const AgentVectors& r_all() const { return r_; }
    const std::vector<double>& s_all() const { return s_; }

    // Settled: max-norm change below settle_tol for settle_window ticks.
    bool r_settled() const;
    bool s_settled() const;

    const WeightMatrix& weights() const { return *w_; }
    const DelayModel& delays() const { return delays_; }
    double kappa() const { return config_.kappa; }

private:
    const WeightMatrix* w_;
    DelayModel delays_;
    TrackerConfig config_;
    std::vector<std::vector<std::pair<int, double>>> row_entries_;  // (j, a_ij), a_ij > 0
    std::vector<double> kappa_prime_;                               // kappa / d_ii

    long tick_ = 0;
    AgentVectors r_;
    std::vector<double> s_;
    std::vector<HistoryBuffer<Vector>> r_hist_;
    std::vector<HistoryBuffer<double>> s_hist_;
    std::deque<double> r_changes_;
    std::deque<double> s_changes_;
};

} // namespace dropt
