#include "dropt/objectives.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dropt/util.hpp"

namespace dropt {

LocalObjective quadratic(const Vector& shift, double curvature) {
    if (curvature <= 0.0)
        throw std::invalid_argument("quadratic curvature must be positive");
    LocalObjective f;
    f.dimension = static_cast<int>(shift.size());
    f.eval = [shift, curvature](const Vector& x) {
        return curvature * (x + shift).squaredNorm();
    };
    f.grad = [shift, curvature](const Vector& x) -> Vector {
        return 2.0 * curvature * (x + shift);
    };
    f.smoothness = 2.0 * curvature;
    f.strong_convexity = 2.0 * curvature;
    f.quadratic_form = IsotropicQuadratic{shift, curvature};
    return f;
}

LocalObjective quadratic(double shift, double curvature) {
    Vector c(1);
    c << shift;
    return quadratic(c, curvature);
}

LocalObjective anisotropic_quadratic(const Vector& diag_curvatures, const Vector& shift) {
    if (diag_curvatures.size() != shift.size())
        throw std::invalid_argument("curvature/shift dimension mismatch");
    if ((diag_curvatures.array() <= 0.0).any())
        throw std::invalid_argument("curvatures must be positive");
    LocalObjective f;
    f.dimension = static_cast<int>(shift.size());
    f.eval = [diag_curvatures, shift](const Vector& x) {
        return (diag_curvatures.array() * (x + shift).array().square()).sum();
    };
    f.grad = [diag_curvatures, shift](const Vector& x) -> Vector {
        return 2.0 * diag_curvatures.cwiseProduct(x + shift);
    };
    f.smoothness = 2.0 * diag_curvatures.maxCoeff();
    f.strong_convexity = 2.0 * diag_curvatures.minCoeff();
    return f;
}

namespace {

void require_consistent(const GlobalProblem& p) {
    if (p.objectives.empty())
        throw std::invalid_argument("problem has no objectives");
    for (const auto& f : p.objectives) {
        if (f.dimension != p.dimension())
            throw std::invalid_argument("objectives have mixed dimensions");
        if (f.strong_convexity <= 0.0)
            throw std::invalid_argument("global optimum requires strongly convex objectives");
    }
}

Vector sum_gradient(const GlobalProblem& p, const Vector& x) {
    Vector g = Vector::Zero(p.dimension());
    for (const auto& f : p.objectives) g += f.grad(x);
    return g;
}

} // namespace

const Vector& GlobalProblem::optimum() const {
    if (!cached_optimum_) cached_optimum_ = global_optimum(*this);
    return *cached_optimum_;
}

Vector global_optimum(const GlobalProblem& p) {
    require_consistent(p);

    bool all_isotropic = true;
    for (const auto& f : p.objectives)
        if (!f.quadratic_form) { all_isotropic = false; break; }

    if (all_isotropic) {
        // sum 2 a_i (x + c_i) = 0  =>  x* = -(sum a_i c_i) / (sum a_i)
        Vector weighted = Vector::Zero(p.dimension());
        double total = 0.0;
        for (const auto& f : p.objectives) {
            weighted += f.quadratic_form->curvature * f.quadratic_form->shift;
            total += f.quadratic_form->curvature;
        }
        return -weighted / total;
    }

    // Gradient descent on F with the classic 2/(sigma+L) step.
    double sigma = 0.0, smooth = 0.0;
    for (const auto& f : p.objectives) {
        sigma += f.strong_convexity;
        smooth += f.smoothness;
    }
    const int n = p.agent_count();
    sigma /= n;
    smooth /= n;
    const double step = 2.0 / (sigma + smooth);
    Vector x = Vector::Zero(p.dimension());
    for (long it = 0; it < 1000000; ++it) {
        const Vector g = sum_gradient(p, x) / n;
        if (g.norm() < 1e-10) return x;
        x -= step * g;
    }
    throw std::runtime_error("global optimum search did not converge");
}

HomogeneityResult check_smoothness_homogeneity(const GlobalProblem& p) {
    if (p.objectives.empty())
        throw std::invalid_argument("problem has no objectives");
    double sum_l = 0.0, sum_l2 = 0.0;
    for (const auto& f : p.objectives) {
        sum_l += f.smoothness;
        sum_l2 += f.smoothness * f.smoothness;
    }
    HomogeneityResult r;
    r.ratio = sum_l * sum_l / (p.agent_count() * sum_l2);
    r.pass = r.ratio > 0.75;
    return r;
}

void validate_objective(const LocalObjective& f, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(mix64(seed));
    std::normal_distribution<double> normal(0.0, 2.0);
    const int n = f.dimension;
    const double h = 1e-5;

    for (int s = 0; s < samples; ++s) {
        Vector x(n), y(n);
        for (int d = 0; d < n; ++d) { x[d] = normal(rng); y[d] = normal(rng); }

        // Central finite differences against the analytic gradient.
        const Vector gx = f.grad(x);
        for (int d = 0; d < n; ++d) {
            Vector xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            const double fd = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
            const double scale = std::max(1.0, std::abs(gx[d]));
            if (std::abs(fd - gx[d]) > 1e-6 * scale) {
                std::ostringstream msg;
                msg << "gradient/finite-difference mismatch: component " << d
                    << " analytic " << gx[d] << " numeric " << fd;
                throw std::runtime_error(msg.str());
            }
        }

        const Vector gy = f.grad(y);
        const double dist2 = (x - y).squaredNorm();
        const double gdist = (gx - gy).norm();
        const double inner = (gx - gy).dot(x - y);
        const double slack = 1e-9 * std::max(1.0, dist2);
        if (gdist > f.smoothness * std::sqrt(dist2) + slack)
            throw std::runtime_error("smoothness constant violated on sampled pair");
        if (inner < f.strong_convexity * dist2 - slack)
            throw std::runtime_error("strong convexity constant violated on sampled pair");
    }
}

} // namespace dropt
