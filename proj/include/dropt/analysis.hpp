/**
 * Offline numerical validation of the convergence theory. Checks consume
 * finished run traces or standalone inputs and never feed back into the
 * dynamics, so a bug here cannot perturb a simulation.
 */
#pragma once

#include <string>
#include <vector>

#include "dropt/async_frost.hpp"
#include "dropt/graph.hpp"
#include "dropt/objectives.hpp"

namespace dropt {

struct TheoryCheck {
    std::string check_id;
    std::string description;  // the property being validated, in math terms
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
};

struct TheoryReport {
    std::vector<TheoryCheck> checks;

    bool all_pass() const;
    std::string to_text() const;  // one pass/fail line per check
    std::string to_json() const;
};

/// Co-coercivity extension for a sigma-strongly-convex, L-smooth function:
/// <x - y, grad(x) - grad(y)> >= mu1 ||grad(x) - grad(y)||^2 + mu2 ||x - y||^2
/// with mu1 = 1/(sigma + L), mu2 = sigma L / (sigma + L), checked on random
/// pairs with -1e-9 slack for roundoff.
TheoryReport cocoercivity_check(const LocalObjective& f, int samples,
                                std::uint64_t seed);

/// Consensus-only contraction: ||x(k) - consensus(k)|| computed by simulating
/// x(k) = A x(k-1) must equal the dense matrix power ||(A - 1 u^T)^k x(0)||
/// to 1e-10 for every k, and the late-k decay ratio must match the
/// contraction factor to 1e-6.
TheoryReport consensus_contraction_check(const WeightMatrix& w, const AgentVectors& x0,
                                      int epochs);

/// Per-epoch contraction coefficient c(k) over a finished asynchronous run.
/// Four checks: c(k) < 1 past the transient cutoff; the per-epoch
/// contraction inequality dist(k+1)^2 <= c(k) dist(k)^2 + coupling terms;
/// the 5-epoch envelope of ||weighted mean of x(k) - x*|| non-increasing;
/// and a geometric fit of || alpha_k sum_i grad f_i(x*)(1 - u_i/[e_i(k)]_i)
/// ||^2 against C lambda^k with lambda in (0,1), R^2 > 0.95.
TheoryReport contraction_trace_checks(const std::vector<AsyncEpochRow>& trace,
                                        const GlobalProblem& problem,
                                        const WeightMatrix& w);

} // namespace dropt
