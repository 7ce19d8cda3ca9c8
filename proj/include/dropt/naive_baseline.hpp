/**
 * Naive gradient-flooding baseline: every node relays all gradients it
 * knows to its out-neighbours and averages directly once it holds all N.
 * A relay hop costs max(tau, 1) ticks (a hop takes at least one tick, and
 * a delayed read of tau ticks delivers the sender's knowledge from tau
 * ticks ago), so with constant delays the farthest node completes after
 * tau_max * eccentricity ticks — tau_max * (N - 1) in the worst case.
 */
#pragma once

#include <vector>

#include "dropt/delay.hpp"
#include "dropt/graph.hpp"
#include "dropt/objectives.hpp"

namespace dropt {

struct NaiveFloodResult {
    std::vector<long> completion_tick;  // first tick each node knows all N values
    long worst_case_bound = 0;          // max(tau_max, 1) * (N - 1)

    struct TickRow {
        long tick = 0;
        std::vector<int> known_count;
        // Partial estimate: fle-weighted mean over the known set,
        // renormalised by the known fle mass.
        AgentVectors estimate;
    };
    std::vector<TickRow> trace;
};

/// Floods the values grad f_i(x_i(0)) (the quantities the tracker averages)
/// through the delayed graph. Limited to 64 nodes.
NaiveFloodResult naive_flood(const WeightMatrix& w,
                             const std::vector<LocalObjective>& objectives,
                             const AgentVectors& x0, const DelayModel& delays,
                             long max_ticks);

} // namespace dropt
