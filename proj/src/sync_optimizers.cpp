#include "dropt/sync_optimizers.hpp"

#include <stdexcept>

namespace dropt {

namespace {

void require_sizes(const AgentVectors& x, const WeightMatrix& w,
                   const std::vector<LocalObjective>& f) {
    if (static_cast<int>(x.size()) != w.size() || x.size() != f.size())
        throw std::invalid_argument("agent count mismatch between state, weights and objectives");
}

// Weighted mix of neighbour vectors: out_i = sum_j a_ij in_j.
AgentVectors mix(const WeightMatrix& w, const AgentVectors& in) {
    const int n_agents = w.size();
    AgentVectors out(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        Vector acc = Vector::Zero(in[0].size());
        for (int j = 0; j < n_agents; ++j) {
            const double a = w(i, j);
            if (a != 0.0) acc += a * in[j];
        }
        out[i] = std::move(acc);
    }
    return out;
}

} // namespace

DgdState dgd_init(AgentVectors x0) { return DgdState{std::move(x0), 0}; }

DgdState dgd_step(const DgdState& s, const WeightMatrix& w,
                  const std::vector<LocalObjective>& f, double alpha_t) {
    require_sizes(s.x, w, f);
    DgdState next;
    next.x = mix(w, s.x);
    for (std::size_t i = 0; i < next.x.size(); ++i)
        next.x[i] -= alpha_t * f[i].grad(s.x[i]);
    next.tick = s.tick + 1;
    return next;
}

double dgd_default_alpha(double alpha0, long tick) {
    return alpha0 / static_cast<double>(tick + 1);
}

GradientTrackingState gradient_tracking_init(AgentVectors x0,
                                             const std::vector<LocalObjective>& f) {
    GradientTrackingState s;
    s.y.reserve(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) s.y.push_back(f[i].grad(x0[i]));
    s.x = std::move(x0);
    return s;
}

GradientTrackingState gradient_tracking_step(const GradientTrackingState& s,
                                             const WeightMatrix& w,
                                             const std::vector<LocalObjective>& f,
                                             double alpha) {
    require_sizes(s.x, w, f);
    GradientTrackingState next;
    next.x = mix(w, s.x);
    for (std::size_t i = 0; i < next.x.size(); ++i) next.x[i] -= alpha * s.y[i];
    next.y = mix(w, s.y);
    for (std::size_t i = 0; i < next.y.size(); ++i)
        next.y[i] += f[i].grad(next.x[i]) - f[i].grad(s.x[i]);
    next.tick = s.tick + 1;
    return next;
}

AddOptState addopt_init(AgentVectors x0, const std::vector<LocalObjective>& f) {
    AddOptState s;
    s.y.assign(x0.size(), 1.0);
    s.z = x0;  // z_i(0) = x_i(0) / y_i(0)
    s.w.reserve(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) s.w.push_back(f[i].grad(s.z[i]));
    s.x = std::move(x0);
    return s;
}

AddOptState addopt_step(const AddOptState& s, const WeightMatrix& w,
                        const std::vector<LocalObjective>& f, double alpha) {
    require_sizes(s.x, w, f);
    const int n_agents = w.size();
    AddOptState next;
    next.x = mix(w, s.x);
    for (int i = 0; i < n_agents; ++i) next.x[i] -= alpha * s.w[i];

    next.y.assign(n_agents, 0.0);
    for (int i = 0; i < n_agents; ++i)
        for (int j = 0; j < n_agents; ++j)
            if (w(i, j) != 0.0) next.y[i] += w(i, j) * s.y[j];

    // De-biasing divides by the previous tick's mass, matching the update
    // order x, y, z, w.
    next.z.resize(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        if (s.y[i] < 1e-12)
            throw std::runtime_error("ADD-OPT mass collapsed; weights are not primitive");
        next.z[i] = s.x[i] / s.y[i];
    }

    next.w = mix(w, s.w);
    for (int i = 0; i < n_agents; ++i)
        next.w[i] += f[i].grad(next.z[i]) - f[i].grad(s.z[i]);
    next.tick = s.tick + 1;
    return next;
}

FrostState frost_init(AgentVectors x0, const std::vector<LocalObjective>& f) {
    const int n_agents = static_cast<int>(x0.size());
    FrostState s;
    s.y.reserve(n_agents);
    s.z.reserve(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        s.y.push_back(Vector::Unit(n_agents, i));
        s.z.push_back(f[i].grad(x0[i]));
    }
    s.x = std::move(x0);
    return s;
}

namespace {

FrostState frost_step_impl(const FrostState& s, const WeightMatrix& w,
                           const std::vector<LocalObjective>& f,
                           const std::vector<double>& alpha) {
    require_sizes(s.x, w, f);
    const int n_agents = w.size();
    FrostState next;
    next.y = mix(w, s.y);
    next.x = mix(w, s.x);
    for (int i = 0; i < n_agents; ++i) next.x[i] -= alpha[i] * s.z[i];
    next.z = mix(w, s.z);
    for (int i = 0; i < n_agents; ++i) {
        const double yi_new = next.y[i][i];
        const double yi_old = s.y[i][i];
        if (yi_new <= 0.0 || yi_old <= 0.0)
            throw std::runtime_error("FROST eigenvector estimate lost positivity; "
                                     "weights are not primitive");
        next.z[i] += f[i].grad(next.x[i]) / yi_new - f[i].grad(s.x[i]) / yi_old;
    }
    next.tick = s.tick + 1;
    return next;
}

} // namespace

FrostState frost_step(const FrostState& s, const WeightMatrix& w,
                      const std::vector<LocalObjective>& f, double alpha) {
    return frost_step_impl(s, w, f, std::vector<double>(s.x.size(), alpha));
}

FrostState frost_step(const FrostState& s, const WeightMatrix& w,
                      const std::vector<LocalObjective>& f,
                      const std::vector<double>& alpha_per_agent) {
    if (alpha_per_agent.size() != s.x.size())
        throw std::invalid_argument("one step size per agent required");
    return frost_step_impl(s, w, f, alpha_per_agent);
}

std::string weight_class_warning(const std::string& algorithm, const WeightMatrix& w) {
    const auto cls = w.cls;
    if ((algorithm == "dgd" || algorithm == "gradient_tracking") &&
        cls != StochasticityClass::doubly_stochastic)
        return algorithm + " assumes doubly stochastic weights; running anyway, "
                           "convergence to the optimum is not guaranteed";
    if (algorithm == "addopt" && cls != StochasticityClass::column_stochastic)
        return "addopt assumes column stochastic weights; running anyway, "
               "convergence to the optimum is not guaranteed";
    if ((algorithm == "frost" || algorithm == "async_frost") &&
        cls == StochasticityClass::column_stochastic)
        return algorithm + " assumes row stochastic weights; running anyway, "
                           "convergence to the optimum is not guaranteed";
    return {};
}

} // namespace dropt
