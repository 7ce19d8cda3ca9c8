/**
 * Delay-robust asynchronous FROST.
 *
 * Time is organised in epochs of half a square-wave period H = T_g / 2.
 * Within an epoch the (r, s) tracker pair runs every tick against delayed
 * neighbour reads; at epoch boundaries the slow variables advance:
 *
 *   e_i(k) = sum_j a_ij e_j(k-1)            eigenvector estimate
 *   p_i(k) = p_i(k-1) + [r-jump]/|s-jump|   accumulated weighted average of
 *                                           eigenvector-normalised gradients
 *   x_i(k) = sum_j a_ij x_j(k-1) - alpha_k p_i(k)
 *
 * and the change in normalised gradient, grad f_i(x_i(k)) / [e_i(k)]_i minus
 * the previous epoch's value, is injected into the r tracker together with
 * the square wave edge into the s tracker. Requiring H > tau_max means every
 * delayed boundary read lands in the previous epoch's snapshot, so the
 * boundary recursions above hold verbatim under any admissible delay draw.
 *
 * The per-window r/s jump ratio cancels the delay factor 1/(1 + kappa
 * tau_bar) without any agent knowing tau_bar. The s tracker's pre-history is
 * 0, which turns tick 0 into the wave's first rising edge: the zeroth window
 * then carries a measurable s-jump and the p accumulator starts from the
 * weighted average of the initial normalised gradients.
 */
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dropt/dac_tracker.hpp"
#include "dropt/delay.hpp"
#include "dropt/graph.hpp"
#include "dropt/objectives.hpp"

namespace dropt {

struct StepSizeResult {
    double alpha = 0.0;  // minimiser of the contraction quadratic
    double coefficient = 0.0;  // contraction coefficient at that alpha, in [0, 1)
};

/// Adaptive step size from the contraction quadratic
/// c(alpha) = 4 + A alpha^2 + B alpha with
///   A = 4 N sum_i (l_i u_i / e_i)^2,  B = -8 sum_i l_i u_i / e_i,
/// evaluated at the quadratic's minimiser alpha = -B / (2A). Throws when the
/// minimum is not below 1, i.e. when (sum w_i l_i)^2 / (N sum (w_i l_i)^2)
/// with w_i = u_i / e_i fails to exceed 3/4 (the smoothness-homogeneity
/// condition, violated at the boundary as well).
StepSizeResult optimal_step_size(const std::vector<double>& smoothness,
                                 const Eigen::VectorXd& fle_estimate_diag,
                                 const Eigen::VectorXd& u);

/// The coefficient evaluated at a given step size (no admissibility
/// requirement).
double contraction_coefficient(const std::vector<double>& smoothness,
                               const Eigen::VectorXd& fle_estimate_diag,
                               const Eigen::VectorXd& u, double alpha);

enum class AlphaPolicy { adaptive, fixed };

struct AsyncFrostConfig {
    double kappa = 0.01;
    int settle_ticks = 0;   // 0: default ceil(40 / kappa)
    int t_g = 0;            // 0: derived as 2 * (tau_max + settle_ticks)
    AlphaPolicy alpha_policy = AlphaPolicy::adaptive;
    double fixed_alpha = 0.0;
    double settle_tol = 1e-9;
    int settle_window = 10;
    // Validation mode (tau_max == 0 only): replace intra-epoch ticking by a
    // jump to the exact consensus equilibrium, making epoch boundaries match
    // the synchronous reference recursion bit for bit.
    bool exact_settle = false;
};

struct AsyncEpochRow {
    int epoch = 0;
    double alpha = 0.0;
    double contraction = 0.0;  // contraction coefficient against the true fle
    bool r_settled = false;   // settling criterion met in the closing window
    bool s_settled = false;
    AgentVectors x;
    AgentVectors p;
    std::vector<double> e_diag;   // [e_i(k)]_i
    std::vector<double> e_error;  // ||e_i(k) - u||_inf
    std::vector<double> s_jump;   // per-agent |s-jump| of the closing window
};

class AsyncFrost {
public:
    AsyncFrost(const WeightMatrix& w, std::vector<LocalObjective> objectives,
               DelayModel delays, AsyncFrostConfig config, AgentVectors x0);

    /// Advances one full epoch (H tracker ticks ending in one boundary step).
    void run_epoch();

    int epoch() const { return epoch_; }
    int half_period() const { return half_period_; }
    int agent_count() const { return static_cast<int>(x_.size()); }

    const AgentVectors& x() const { return x_; }
    const std::vector<Vector>& fle_estimates() const { return e_; }
    const AgentVectors& p() const { return p_; }
    const std::vector<AsyncEpochRow>& trace() const { return trace_; }

    /// Largest per-agent estimate change at the last boundary (early-stop
    /// criterion input).
    double last_step_change() const { return last_step_change_; }

    /// Per-tick observer over the tracker state (tick, r, s per agent);
    /// inactive in exact-settle mode.
    using TickObserver = std::function<void(long tick, const DelayedTracker&)>;
    void set_tick_observer(TickObserver obs) { tick_observer_ = std::move(obs); }

    const WeightMatrix& weights() const { return *w_; }
    const std::vector<LocalObjective>& objectives() const { return objectives_; }

private:
    void boundary_step(const AgentVectors& window_end_r,
                       const std::vector<double>& window_end_s, bool r_settled,
                       bool s_settled);
    double pick_alpha(const Eigen::VectorXd& e_diag) const;

    const WeightMatrix* w_;
    std::vector<LocalObjective> objectives_;
    DelayModel delays_;
    AsyncFrostConfig config_;
    int half_period_ = 0;
    SquareWaveClock clock_;

    int epoch_ = 0;
    AgentVectors x_;
    std::vector<Vector> e_;        // rows e_i(k)
    AgentVectors p_;
    AgentVectors norm_grad_;       // grad f_i(x_i(k)) / [e_i(k)]_i
    AgentVectors prev_end_r_;      // previous window's settled readings
    std::vector<double> prev_end_s_;
    double last_step_change_ = 0.0;

    std::optional<DelayedTracker> tracker_;  // absent in exact-settle mode
    AgentVectors exact_r_;                   // exact-settle state
    std::vector<double> exact_s_;

    std::vector<AsyncEpochRow> trace_;
    TickObserver tick_observer_;
};

/// Synchronous reference recursion for the tau_max = 0 degeneration:
///   e(k) = A e(k-1),
///   x(k) = A x(k-1) - alpha_k * [sum_j u_j grad f_j(x_j(k-1)) / [e_j(k-1)]_j]
/// (the same correction applied to every agent). Returns x per epoch,
/// including epoch 0.
std::vector<AgentVectors> epoch_reference_trajectory(
    const WeightMatrix& w, const std::vector<LocalObjective>& objectives,
    AgentVectors x0, const AsyncFrostConfig& config, int epochs);

} // namespace dropt
