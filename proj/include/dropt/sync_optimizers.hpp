/**
 * Synchronous (delay-free) baselines: distributed gradient descent,
 * gradient tracking, ADD-OPT (column-stochastic) and FROST (row-stochastic).
 *
 * Steps are pure functions of the previous tick's state, so agents within
 * a tick can be evaluated in any order.
 */
#pragma once

#include <string>
#include <vector>

#include "dropt/graph.hpp"
#include "dropt/objectives.hpp"

namespace dropt {

// --- distributed gradient descent (diminishing steps) -----------------------

struct DgdState {
    AgentVectors x;
    long tick = 0;
};

DgdState dgd_init(AgentVectors x0);
DgdState dgd_step(const DgdState& s, const WeightMatrix& w,
                  const std::vector<LocalObjective>& f, double alpha_t);

/// Default diminishing schedule alpha_t = alpha0 / (t + 1), which satisfies
/// sum alpha_t = inf and sum alpha_t^2 < inf.
double dgd_default_alpha(double alpha0, long tick);

// --- gradient tracking (constant step, doubly stochastic) -------------------

struct GradientTrackingState {
    AgentVectors x;
    AgentVectors y;  // tracks the average gradient; y_i(0) = grad f_i(x_i(0))
    long tick = 0;
};

GradientTrackingState gradient_tracking_init(AgentVectors x0,
                                             const std::vector<LocalObjective>& f);
GradientTrackingState gradient_tracking_step(const GradientTrackingState& s,
                                             const WeightMatrix& w,
                                             const std::vector<LocalObjective>& f,
                                             double alpha);

// --- ADD-OPT (column stochastic) ---------------------------------------------

struct AddOptState {
    AgentVectors x;
    std::vector<double> y;  // scalar mass, y_i(0) = 1; sum is conserved
    AgentVectors z;         // de-biased estimate x_i / y_i
    AgentVectors w;         // gradient tracker, w_i(0) = grad f_i(z_i(0))
    long tick = 0;
};

AddOptState addopt_init(AgentVectors x0, const std::vector<LocalObjective>& f);
AddOptState addopt_step(const AddOptState& s, const WeightMatrix& w,
                        const std::vector<LocalObjective>& f, double alpha);

// --- FROST (row stochastic, uncoordinated steps) -----------------------------

struct FrostState {
    AgentVectors x;
    std::vector<Vector> y;  // y_i in R^N estimates the first left eigenvector
    AgentVectors z;         // eigenvector-normalised gradient tracker
    long tick = 0;
};

FrostState frost_init(AgentVectors x0, const std::vector<LocalObjective>& f);
FrostState frost_step(const FrostState& s, const WeightMatrix& w,
                      const std::vector<LocalObjective>& f, double alpha);
FrostState frost_step(const FrostState& s, const WeightMatrix& w,
                      const std::vector<LocalObjective>& f,
                      const std::vector<double>& alpha_per_agent);

/// Non-empty warning when the weight class voids an algorithm's convergence
/// guarantee (the step still runs). Algorithm names: "dgd",
/// "gradient_tracking", "addopt", "frost".
std::string weight_class_warning(const std::string& algorithm, const WeightMatrix& w);

} // namespace dropt
