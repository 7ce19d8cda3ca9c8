/**
 * Per-agent local objectives f_i and the global problem they define:
 * minimise F(x) = (1/N) sum_i f_i(x) over strongly convex, smooth f_i.
 *
 * Objectives are pure values (no internal state) and freely shareable.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace dropt {

using Vector = Eigen::VectorXd;
using AgentVectors = std::vector<Vector>;  // one n-vector per agent

// Parameters of an isotropic quadratic a * ||x + c||^2, kept alongside the
// generic callables so the global optimum has a closed form.
struct IsotropicQuadratic {
    Vector shift;      // c
    double curvature;  // a
};

struct LocalObjective {
    int dimension = 1;
    std::function<double(const Vector&)> eval;
    std::function<Vector(const Vector&)> grad;
    double smoothness = 0.0;        // l_i: gradient Lipschitz constant
    double strong_convexity = 0.0;  // sigma_i, 0 < sigma_i <= l_i
    std::optional<IsotropicQuadratic> quadratic_form;
};

/// f(x) = a * ||x + c||^2 with l = sigma = 2a. Rejects a <= 0.
LocalObjective quadratic(const Vector& shift, double curvature);

/// Scalar convenience overload.
LocalObjective quadratic(double shift, double curvature);

/// f(x) = sum_d a_d (x_d + c_d)^2 with sigma = 2 min a, l = 2 max a.
/// Exercises the generic (non-closed-form) optimum path.
LocalObjective anisotropic_quadratic(const Vector& diag_curvatures, const Vector& shift);

struct GlobalProblem {
    std::vector<LocalObjective> objectives;

    int dimension() const { return objectives.empty() ? 0 : objectives.front().dimension; }
    int agent_count() const { return static_cast<int>(objectives.size()); }

    /// Minimiser of F, computed on first use and cached.
    const Vector& optimum() const;

private:
    mutable std::optional<Vector> cached_optimum_;
};

/// Minimiser of F = (1/N) sum f_i. Closed form (curvature-weighted mean of
/// the minimisers) when every objective is an isotropic quadratic; otherwise
/// gradient descent on F until ||grad F|| < 1e-10.
Vector global_optimum(const GlobalProblem& p);

struct HomogeneityResult {
    double ratio = 0.0;  // (sum l_i)^2 / (N sum l_i^2), in (0, 1] by Cauchy-Schwarz
    bool pass = false;   // ratio > 3/4
};

/// Smoothness-homogeneity condition required by the adaptive step-size rule.
HomogeneityResult check_smoothness_homogeneity(const GlobalProblem& p);

/// Validates an objective numerically: gradient against central finite
/// differences (1e-6 relative) and the smoothness / strong-convexity
/// inequalities on sampled pairs. Throws on violation.
void validate_objective(const LocalObjective& f, int samples, std::uint64_t seed);

} // namespace dropt
