#include "dropt/experiment.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "dropt/dac_tracker.hpp"
#include "dropt/svg_plot.hpp"
#include "dropt/sync_optimizers.hpp"
#include "dropt/util.hpp"

namespace dropt {

namespace {

// --- enum <-> string --------------------------------------------------------

template <typename E>
struct EnumNames {
    std::vector<std::pair<E, const char*>> entries;
    const char* name(E v) const {
        for (const auto& [e, n] : entries)
            if (e == v) return n;
        throw std::logic_error("unnamed enum value");
    }
    E value(const std::string& s, const char* what) const {
        for (const auto& [e, n] : entries)
            if (s == n) return e;
        throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
    }
};

const EnumNames<Topology> kTopology{{{Topology::cycle, "cycle"},
                                     {Topology::random_strongly_connected,
                                      "random_strongly_connected"},
                                     {Topology::from_edge_list, "from_edge_list"}}};
const EnumNames<StochasticityClass> kClass{
    {{StochasticityClass::row_stochastic, "row_stochastic"},
     {StochasticityClass::column_stochastic, "column_stochastic"},
     {StochasticityClass::doubly_stochastic, "doubly_stochastic"}}};
const EnumNames<WeightRule> kRule{{{WeightRule::uniform_in_degree, "uniform_in_degree"},
                                   {WeightRule::uniform_out_degree,
                                    "uniform_out_degree"}}};
const EnumNames<Algorithm> kAlgorithm{{{Algorithm::dgd, "dgd"},
                                       {Algorithm::gradient_tracking, "gradient_tracking"},
                                       {Algorithm::addopt, "addopt"},
                                       {Algorithm::frost, "frost"},
                                       {Algorithm::async_frost, "async_frost"},
                                       {Algorithm::naive_averaging, "naive_averaging"}}};
const EnumNames<DelayDistribution> kDelayDist{
    {{DelayDistribution::constant, "constant"},
     {DelayDistribution::uniform_integer, "uniform_integer"},
     {DelayDistribution::deterministic_schedule, "deterministic_schedule"}}};
const EnumNames<AlphaKind> kAlphaKind{{{AlphaKind::adaptive, "adaptive"},
                                       {AlphaKind::fixed, "fixed"},
                                       {AlphaKind::diminishing, "diminishing"}}};
const EnumNames<TrackerTraceMode> kTrackerTrace{{{TrackerTraceMode::none, "none"},
                                                 {TrackerTraceMode::first_window,
                                                  "first_window"},
                                                 {TrackerTraceMode::all, "all"}}};

std::string algorithm_name(Algorithm a) { return kAlgorithm.name(a); }

// --- small csv helpers -------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<int>(k);
        throw std::invalid_argument("trace is missing column " + name);
    }
};

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open trace " + path.string());
    CsvTable table;
    std::string line;
    const auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (std::getline(in, line)) table.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) table.rows.push_back(split(line));
    return table;
}

Vector weighted_mean(const Eigen::VectorXd& u, const AgentVectors& v) {
    Vector acc = Vector::Zero(v[0].size());
    for (std::size_t i = 0; i < v.size(); ++i) acc += u[i] * v[i];
    return acc;
}

double consensus_error(const Eigen::VectorXd& u, const AgentVectors& v) {
    const Vector mean = weighted_mean(u, v);
    double acc = 0.0;
    for (const auto& x : v) acc += (x - mean).squaredNorm();
    return std::sqrt(acc);
}

} // namespace

// --- config ------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.scenario = j.value("scenario", std::string("unnamed"));

    const auto& graph = j.at("graph");
    c.topology = kTopology.value(graph.value("topology", "random_strongly_connected"),
                                 "topology");
    c.nodes = graph.at("nodes").get<int>();
    c.graph_seed = graph.value("seed", 0ULL);
    if (graph.contains("edges"))
        for (const auto& e : graph["edges"])
            c.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());

    if (j.contains("weights")) {
        c.weight_class = kClass.value(j["weights"].value("class", "row_stochastic"),
                                      "stochasticity class");
        c.weight_rule = kRule.value(j["weights"].value("rule", "uniform_in_degree"),
                                    "weight rule");
    }

    const auto& obj = j.at("objectives");
    c.objective_kind = obj.value("kind", "indexed_quadratic");
    if (obj.contains("outlier_shift")) c.outlier_shift = obj["outlier_shift"].get<double>();
    if (obj.contains("shifts"))
        for (const auto& s : obj["shifts"])
            c.shifts.push_back(s.get<std::vector<double>>());
    if (obj.contains("curvatures")) c.curvatures = obj["curvatures"].get<std::vector<double>>();

    c.algorithm = kAlgorithm.value(j.at("algorithm").get<std::string>(), "algorithm");

    if (j.contains("delay")) {
        const auto& d = j["delay"];
        c.delay_distribution = kDelayDist.value(d.value("distribution", "constant"),
                                                "delay distribution");
        c.delay_tau = d.value("tau", 0);
        c.delay_lo = d.value("lo", 0);
        c.delay_hi = d.value("hi", 0);
        c.delay_seed = d.value("seed", 0ULL);
        c.delay_per_edge = d.value("per_edge", true);
    }

    c.kappa = j.value("kappa", 0.01);
    c.t_g = j.value("t_g", 0);
    c.settle_ticks = j.value("settle_ticks", 0);

    if (j.contains("alpha")) {
        c.alpha_kind = kAlphaKind.value(j["alpha"].value("policy", "adaptive"),
                                        "alpha policy");
        c.alpha_value = j["alpha"].value("value", 0.0);
    }

    c.epochs = j.value("epochs", 60);
    c.ticks = j.value("ticks", 2000L);
    c.early_stop = j.value("early_stop", false);
    c.early_stop_tol = j.value("early_stop_tol", 1e-10);
    if (j.contains("x0")) c.x0 = j["x0"].get<std::vector<double>>();
    c.tracker_trace = kTrackerTrace.value(j.value("tracker_trace", "none"),
                                          "tracker trace mode");
    if (j.contains("checks")) c.checks = j["checks"];
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["graph"] = {{"topology", kTopology.name(topology)},
                  {"nodes", nodes},
                  {"seed", graph_seed}};
    if (!edges.empty()) {
        nlohmann::json e = nlohmann::json::array();
        for (const auto& [from, to] : edges) e.push_back({from, to});
        j["graph"]["edges"] = e;
    }
    j["weights"] = {{"class", kClass.name(weight_class)},
                    {"rule", kRule.name(weight_rule)}};
    j["objectives"] = {{"kind", objective_kind}};
    if (outlier_shift) j["objectives"]["outlier_shift"] = *outlier_shift;
    if (!shifts.empty()) j["objectives"]["shifts"] = shifts;
    if (!curvatures.empty()) j["objectives"]["curvatures"] = curvatures;
    j["algorithm"] = kAlgorithm.name(algorithm);
    j["delay"] = {{"distribution", kDelayDist.name(delay_distribution)},
                  {"tau", delay_tau},
                  {"lo", delay_lo},
                  {"hi", delay_hi},
                  {"seed", delay_seed},
                  {"per_edge", delay_per_edge}};
    j["kappa"] = kappa;
    j["t_g"] = t_g;
    j["settle_ticks"] = settle_ticks;
    j["alpha"] = {{"policy", kAlphaKind.name(alpha_kind)}, {"value", alpha_value}};
    j["epochs"] = epochs;
    j["ticks"] = ticks;
    j["early_stop"] = early_stop;
    j["early_stop_tol"] = early_stop_tol;
    if (!x0.empty()) j["x0"] = x0;
    j["tracker_trace"] = kTrackerTrace.name(tracker_trace);
    j["checks"] = checks;
    return j;
}

DirectedGraph ExperimentConfig::build_graph_spec() const {
    return build_graph(nodes, topology, graph_seed, edges);
}

WeightMatrix ExperimentConfig::build_weight_matrix(const DirectedGraph& g) const {
    return build_weights(g, weight_class, weight_rule);
}

GlobalProblem ExperimentConfig::build_problem() const {
    GlobalProblem p;
    if (objective_kind == "indexed_quadratic") {
        for (int i = 1; i <= nodes; ++i) {
            const double shift = (i == 1 && outlier_shift) ? *outlier_shift : double(i);
            p.objectives.push_back(quadratic(shift, 1.0));
        }
    } else if (objective_kind == "quadratic_list") {
        for (std::size_t i = 0; i < shifts.size(); ++i) {
            Vector c = Eigen::Map<const Vector>(shifts[i].data(), shifts[i].size());
            p.objectives.push_back(quadratic(c, curvatures.at(i)));
        }
    } else {
        throw std::invalid_argument("unknown objective kind: " + objective_kind);
    }
    return p;
}

DelayModel ExperimentConfig::build_delay_model() const {
    switch (delay_distribution) {
    case DelayDistribution::constant:
        return DelayModel::constant(delay_tau);
    case DelayDistribution::uniform_integer:
        return DelayModel::uniform(delay_lo, delay_hi, delay_seed, delay_per_edge);
    case DelayDistribution::deterministic_schedule:
        throw std::invalid_argument(
            "deterministic schedules are loaded programmatically, not from configs");
    }
    throw std::logic_error("unknown delay distribution");
}

AgentVectors ExperimentConfig::initial_states(int agents, int dimension) const {
    Vector x = Vector::Zero(dimension);
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != dimension)
            throw std::invalid_argument("x0 dimension mismatch");
        x = Eigen::Map<const Vector>(x0.data(), x0.size());
    }
    return AgentVectors(agents, x);
}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> violations;
    if (nodes < 1) violations.push_back("graph.nodes must be >= 1");

    DirectedGraph g;
    bool have_graph = false;
    if (nodes >= 1) {
        try {
            g = build_graph_spec();
            have_graph = true;
        } catch (const std::exception& e) {
            violations.push_back(std::string("graph: ") + e.what());
        }
    }

    GlobalProblem problem;
    bool have_problem = false;
    try {
        problem = build_problem();
        have_problem = static_cast<int>(problem.objectives.size()) == nodes;
        if (!have_problem)
            violations.push_back("objectives count does not match graph.nodes");
    } catch (const std::exception& e) {
        violations.push_back(std::string("objectives: ") + e.what());
    }

    try {
        build_delay_model();
    } catch (const std::exception& e) {
        violations.push_back(std::string("delay: ") + e.what());
    }

    const bool needs_tracker = algorithm == Algorithm::async_frost;
    if (needs_tracker) {
        if (kappa <= 0.0) violations.push_back("kappa must be positive");
        const int tau_max =
            delay_distribution == DelayDistribution::constant ? delay_tau : delay_hi;
        if (t_g != 0) {
            if (t_g % 2 != 0) violations.push_back("t_g must be even");
            else if (t_g / 2 <= tau_max)
                violations.push_back("t_g/2 must exceed the maximum delay");
        }
        if (epochs < 1) violations.push_back("epochs must be >= 1");
    } else if (algorithm != Algorithm::naive_averaging && ticks < 1) {
        violations.push_back("ticks must be >= 1");
    }

    switch (alpha_kind) {
    case AlphaKind::adaptive:
        if (algorithm == Algorithm::naive_averaging) {
            // no step size involved
        } else if (algorithm != Algorithm::async_frost) {
            violations.push_back("adaptive step policy applies to async_frost only");
        } else if (have_problem) {
            const auto a5 = check_smoothness_homogeneity(problem);
            if (!a5.pass) {
                std::ostringstream msg;
                msg << "smoothness homogeneity (sum l)^2/(N sum l^2) = " << a5.ratio
                    << " must exceed 3/4 for the adaptive step policy";
                violations.push_back(msg.str());
            }
        }
        break;
    case AlphaKind::fixed:
        if (alpha_value < 0.0) violations.push_back("alpha.value must be >= 0");
        break;
    case AlphaKind::diminishing:
        if (algorithm != Algorithm::dgd)
            violations.push_back("diminishing steps are the dgd schedule");
        if (alpha_value <= 0.0) violations.push_back("alpha.value must be > 0");
        break;
    }

    if (have_graph && have_problem && !x0.empty() &&
        static_cast<int>(x0.size()) != problem.dimension())
        violations.push_back("x0 dimension does not match the objectives");
    return violations;
}

// --- run ----------------------------------------------------------------------

namespace {

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::filesystem::path& path) : out(path) {
        if (!out) throw std::runtime_error("cannot write " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out << ',';
            out << cells[k];
        }
        out << '\n';
    }
};

std::vector<std::string> vector_columns(const char* prefix, int dim) {
    std::vector<std::string> names;
    for (int d = 0; d < dim; ++d)
        names.push_back(std::string(prefix) + "_" + std::to_string(d));
    return names;
}

void append_vector(std::vector<std::string>& cells, const Vector& v) {
    for (int d = 0; d < v.size(); ++d) cells.push_back(format_double(v[d]));
}

struct CheckEvaluator {
    const nlohmann::json& specs;
    RunResult& result;

    void evaluate() {
        for (const auto& spec : specs) {
            const std::string type = spec.at("type").get<std::string>();
            CheckOutcome outcome;
            outcome.name = type;
            if (type == "final_error_below") {
                outcome.measured = result.final_max_error;
                outcome.pass = result.final_max_error < spec.at("value").get<double>();
            } else if (type == "consensus_near") {
                outcome.measured = result.consensus_value;
                outcome.pass = std::abs(result.consensus_value -
                                        spec.at("value").get<double>()) <=
                               spec.at("tol").get<double>();
            } else if (type == "naive_worst_case_equals") {
                outcome.measured = double(result.naive_worst_case);
                outcome.pass = result.naive_worst_case == spec.at("value").get<long>();
            } else if (type == "naive_completion_equals") {
                outcome.measured = double(result.naive_max_completion);
                outcome.pass =
                    result.naive_max_completion == spec.at("value").get<long>();
            } else if (type == "tracker_within_5pct_before_tick") {
                outcome.measured = double(result.tracker_within_5pct_tick);
                outcome.pass = result.tracker_within_5pct_tick >= 0 &&
                               result.tracker_within_5pct_tick <
                                   spec.at("tick").get<long>();
            } else {
                throw std::invalid_argument("unknown check type: " + type);
            }
            result.checks_passed &= outcome.pass;
            result.checks.push_back(outcome);
        }
    }
};

void run_async(const ExperimentConfig& config, const WeightMatrix& w,
               const GlobalProblem& problem, const std::filesystem::path& dir,
               RunResult& result) {
    const int n_agents = w.size();
    const int dim = problem.dimension();
    const Vector x_star = global_optimum(problem);
    const DelayModel delays = config.build_delay_model();

    AsyncFrostConfig acfg;
    acfg.kappa = config.kappa;
    acfg.t_g = config.t_g;
    acfg.settle_ticks = config.settle_ticks;
    acfg.alpha_policy = config.alpha_kind == AlphaKind::fixed ? AlphaPolicy::fixed
                                                              : AlphaPolicy::adaptive;
    acfg.fixed_alpha = config.alpha_value;

    AsyncFrost sim(w, problem.objectives, delays, acfg,
                   config.initial_states(n_agents, dim));

    // First-window tracker trace and the 5% capture tick against the
    // weighted mean of the initial gradients.
    const Vector tracker_target =
        weighted_mean(w.fle, [&] {
            AgentVectors grads;
            const auto x0 = config.initial_states(n_agents, dim);
            for (int i = 0; i < n_agents; ++i)
                grads.push_back(problem.objectives[i].grad(x0[i]));
            return grads;
        }());
    std::optional<CsvWriter> tracker_csv;
    std::vector<double> first_window_rel_err;
    if (config.tracker_trace != TrackerTraceMode::none) {
        tracker_csv.emplace(dir / "tracker_trace.csv");
        std::vector<std::string> header{"tick", "agent"};
        for (const auto& c : vector_columns("r", dim)) header.push_back(c);
        header.push_back("s");
        tracker_csv->row(header);
        const long window_limit = config.tracker_trace == TrackerTraceMode::first_window
                                      ? sim.half_period()
                                      : std::numeric_limits<long>::max();
        sim.set_tick_observer([&, window_limit](long tick, const DelayedTracker& tr) {
            if (tick > window_limit) return;
            double worst = 0.0;
            for (int i = 0; i < n_agents; ++i) {
                std::vector<std::string> cells{std::to_string(tick), std::to_string(i)};
                append_vector(cells, tr.r(i));
                cells.push_back(format_double(tr.s(i)));
                tracker_csv->row(cells);
                const double denom = std::abs(tr.s(i));
                if (denom > 1e-12 && tick < sim.half_period()) {
                    const double rel = (tr.r(i) / denom - tracker_target).norm() /
                                       std::max(tracker_target.norm(), 1e-12);
                    worst = std::max(worst, rel);
                }
            }
            if (tick < sim.half_period()) first_window_rel_err.push_back(worst);
        });
    }

    CsvWriter epochs_csv(dir / "trace_epochs.csv");
    {
        std::vector<std::string> header{"epoch", "agent"};
        for (const auto& c : vector_columns("x", dim)) header.push_back(c);
        for (const auto& c : vector_columns("p", dim)) header.push_back(c);
        header.insert(header.end(), {"e_self", "e_err", "alpha", "contraction", "s_jump",
                                     "r_settled", "s_settled", "dist_opt",
                                     "consensus_err", "tracking_err"});
        epochs_csv.row(header);
    }

    long steps_to_tol = -1;
    int k = 0;
    for (; k < config.epochs; ++k) {
        sim.run_epoch();
        const auto& row = sim.trace().back();

        // Tracking residual against the weighted normalised gradient at the
        // current estimates.
        Vector target = Vector::Zero(dim);
        for (int i = 0; i < n_agents; ++i)
            target += w.fle[i] * problem.objectives[i].grad(sim.x()[i]) / row.e_diag[i];
        double tracking_err = 0.0;
        double max_err = 0.0;
        for (int i = 0; i < n_agents; ++i) {
            tracking_err = std::max(tracking_err, (sim.p()[i] - target).norm());
            max_err = std::max(max_err, (sim.x()[i] - x_star).norm());
        }
        const double cons_err = consensus_error(w.fle, sim.x());

        for (int i = 0; i < n_agents; ++i) {
            std::vector<std::string> cells{std::to_string(row.epoch), std::to_string(i)};
            append_vector(cells, row.x[i]);
            append_vector(cells, row.p[i]);
            cells.push_back(format_double(row.e_diag[i]));
            cells.push_back(format_double(row.e_error[i]));
            cells.push_back(format_double(row.alpha));
            cells.push_back(format_double(row.contraction));
            cells.push_back(format_double(row.s_jump[i]));
            cells.push_back(row.r_settled ? "1" : "0");
            cells.push_back(row.s_settled ? "1" : "0");
            cells.push_back(format_double((row.x[i] - x_star).norm()));
            cells.push_back(format_double(cons_err));
            cells.push_back(format_double(tracking_err));
            epochs_csv.row(cells);
        }

        if (steps_to_tol < 0 && max_err < 1e-2) steps_to_tol = row.epoch;
        if (config.early_stop && k >= 1 && sim.last_step_change() < config.early_stop_tol)
            break;
    }

    result.epochs_or_ticks_run = sim.epoch();
    result.steps_to_tolerance = steps_to_tol;
    double max_err = 0.0;
    for (int i = 0; i < n_agents; ++i)
        max_err = std::max(max_err, (sim.x()[i] - x_star).norm());
    result.final_max_error = max_err;
    result.consensus_value = weighted_mean(w.fle, sim.x())[0];

    if (!first_window_rel_err.empty()) {
        long capture = -1;
        for (long t = static_cast<long>(first_window_rel_err.size()) - 1; t >= 0; --t) {
            if (first_window_rel_err[t] > 0.05) break;
            capture = t + 1;  // observer tick index starts at 1
        }
        result.tracker_within_5pct_tick = capture;
    }

    nlohmann::json extra;
    extra["weighted_gradient_target"] =
        std::vector<double>(tracker_target.data(), tracker_target.data() + dim);
    extra["optimum"] = std::vector<double>(x_star.data(), x_star.data() + dim);
    std::ofstream(dir / "run_targets.json") << extra.dump(2) << '\n';
}

void run_sync(const ExperimentConfig& config, const WeightMatrix& w,
              const GlobalProblem& problem, const std::filesystem::path& dir,
              RunResult& result) {
    const int n_agents = w.size();
    const int dim = problem.dimension();
    const Vector x_star = global_optimum(problem);
    const auto& f = problem.objectives;
    const AgentVectors x0 = config.initial_states(n_agents, dim);

    const std::string name = algorithm_name(config.algorithm);
    const std::string warning = weight_class_warning(name, w);
    if (!warning.empty()) result.warnings.push_back(warning);

    CsvWriter ticks_csv(dir / "trace_ticks.csv");
    {
        std::vector<std::string> header{"tick", "agent"};
        for (const auto& c : vector_columns("x", dim)) header.push_back(c);
        header.insert(header.end(), {"dist_opt", "consensus_err"});
        ticks_csv.row(header);
    }

    DgdState dgd;
    GradientTrackingState gt;
    AddOptState ao;
    FrostState fr;
    switch (config.algorithm) {
    case Algorithm::dgd: dgd = dgd_init(x0); break;
    case Algorithm::gradient_tracking: gt = gradient_tracking_init(x0, f); break;
    case Algorithm::addopt: ao = addopt_init(x0, f); break;
    case Algorithm::frost: fr = frost_init(x0, f); break;
    default: throw std::logic_error("not a synchronous algorithm");
    }

    const auto estimates = [&]() -> const AgentVectors& {
        switch (config.algorithm) {
        case Algorithm::dgd: return dgd.x;
        case Algorithm::gradient_tracking: return gt.x;
        case Algorithm::addopt: return ao.z;  // de-biased estimate
        default: return fr.x;
        }
    };

    long steps_to_tol = -1;
    long t = 0;
    const auto record_tick = [&](long tick) {
        const AgentVectors& est = estimates();
        double max_err = 0.0;
        for (int i = 0; i < n_agents; ++i)
            max_err = std::max(max_err, (est[i] - x_star).norm());
        const double cons_err = consensus_error(w.fle, est);
        for (int i = 0; i < n_agents; ++i) {
            std::vector<std::string> cells{std::to_string(tick), std::to_string(i)};
            append_vector(cells, est[i]);
            cells.push_back(format_double((est[i] - x_star).norm()));
            cells.push_back(format_double(cons_err));
            ticks_csv.row(cells);
        }
        if (steps_to_tol < 0 && max_err < 1e-2) steps_to_tol = tick;
    };
    for (; t < config.ticks; ++t) {
        record_tick(t);
        const double alpha = config.alpha_kind == AlphaKind::diminishing
                                 ? dgd_default_alpha(config.alpha_value, t)
                                 : config.alpha_value;
        switch (config.algorithm) {
        case Algorithm::dgd: dgd = dgd_step(dgd, w, f, alpha); break;
        case Algorithm::gradient_tracking: gt = gradient_tracking_step(gt, w, f, alpha); break;
        case Algorithm::addopt: ao = addopt_step(ao, w, f, alpha); break;
        default: fr = frost_step(fr, w, f, alpha); break;
        }
    }
    record_tick(t);  // final state

    const AgentVectors& est = estimates();
    double max_err = 0.0;
    for (int i = 0; i < n_agents; ++i)
        max_err = std::max(max_err, (est[i] - x_star).norm());
    result.final_max_error = max_err;
    result.consensus_value = weighted_mean(w.fle, est)[0];
    result.epochs_or_ticks_run = t;
    result.steps_to_tolerance = steps_to_tol;

    nlohmann::json extra;
    extra["optimum"] = std::vector<double>(x_star.data(), x_star.data() + dim);
    std::ofstream(dir / "run_targets.json") << extra.dump(2) << '\n';
}

void run_naive(const ExperimentConfig& config, const WeightMatrix& w,
               const GlobalProblem& problem, const std::filesystem::path& dir,
               RunResult& result) {
    const int n_agents = w.size();
    const int dim = problem.dimension();
    const AgentVectors x0 = config.initial_states(n_agents, dim);
    const DelayModel delays = config.build_delay_model();

    const auto flood = naive_flood(w, problem.objectives, x0, delays, config.ticks);
    result.naive_worst_case = flood.worst_case_bound;
    result.naive_max_completion = -1;
    for (long c : flood.completion_tick)
        result.naive_max_completion = std::max(result.naive_max_completion, c);

    CsvWriter completion_csv(dir / "naive_completion.csv");
    completion_csv.row({"agent", "completion_tick"});
    for (int i = 0; i < n_agents; ++i)
        completion_csv.row({std::to_string(i), std::to_string(flood.completion_tick[i])});

    CsvWriter trace_csv(dir / "naive_trace.csv");
    {
        std::vector<std::string> header{"tick", "agent", "known"};
        for (const auto& c : vector_columns("estimate", dim)) header.push_back(c);
        trace_csv.row(header);
    }
    for (const auto& row : flood.trace)
        for (int i = 0; i < n_agents; ++i) {
            std::vector<std::string> cells{std::to_string(row.tick), std::to_string(i),
                                           std::to_string(row.known_count[i])};
            append_vector(cells, row.estimate[i]);
            trace_csv.row(cells);
        }

    AgentVectors grads;
    for (int i = 0; i < n_agents; ++i)
        grads.push_back(problem.objectives[i].grad(x0[i]));
    const Vector target = weighted_mean(w.fle, grads);
    nlohmann::json extra;
    extra["weighted_gradient_target"] =
        std::vector<double>(target.data(), target.data() + dim);
    std::ofstream(dir / "run_targets.json") << extra.dump(2) << '\n';
}

} // namespace

RunResult run_scenario(const ExperimentConfig& config,
                       const std::filesystem::path& output_dir) {
    const auto violations = config.validate();
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "invalid config (" << violations.size() << " violations):";
        for (const auto& v : violations) msg << "\n  - " << v;
        throw std::invalid_argument(msg.str());
    }

    std::filesystem::create_directories(output_dir);
    RunResult result;
    result.output_dir = output_dir;

    const auto g = config.build_graph_spec();
    const auto w = config.build_weight_matrix(g);
    const auto problem = config.build_problem();

    if (config.algorithm == Algorithm::async_frost) {
        const std::string warning = weight_class_warning("async_frost", w);
        if (!warning.empty()) result.warnings.push_back(warning);
        run_async(config, w, problem, output_dir, result);
    } else if (config.algorithm == Algorithm::naive_averaging) {
        run_naive(config, w, problem, output_dir, result);
    } else {
        run_sync(config, w, problem, output_dir, result);
    }

    CheckEvaluator{config.checks, result}.evaluate();

    std::ofstream(output_dir / "config_resolved.json") << config.to_json().dump(2) << '\n';

    nlohmann::json summary;
    summary["scenario"] = config.scenario;
    summary["algorithm"] = algorithm_name(config.algorithm);
    summary["config"] = config.to_json();
    summary["warnings"] = result.warnings;
    summary["final_max_error"] = result.final_max_error;
    summary["consensus_value"] = result.consensus_value;
    summary["epochs_or_ticks_run"] = result.epochs_or_ticks_run;
    summary["steps_to_tolerance"] = result.steps_to_tolerance;
    summary["naive_worst_case"] = result.naive_worst_case;
    summary["naive_max_completion"] = result.naive_max_completion;
    summary["tracker_within_5pct_tick"] = result.tracker_within_5pct_tick;
    summary["checks_passed"] = result.checks_passed;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : result.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}});
    summary["checks"] = checks;
    std::ofstream(output_dir / "summary.json") << summary.dump(2) << '\n';
    return result;
}

// --- trace loading / reports / plots -------------------------------------------

std::vector<AsyncEpochRow> load_epoch_trace(const std::filesystem::path& csv_path,
                                            int agents, int dimension) {
    const CsvTable table = read_csv(csv_path);
    const int col_epoch = table.column("epoch");
    const int col_agent = table.column("agent");
    const int col_x0 = table.column("x_0");
    const int col_p0 = table.column("p_0");
    const int col_eself = table.column("e_self");
    const int col_eerr = table.column("e_err");
    const int col_alpha = table.column("alpha");
    const int col_contraction = table.column("contraction");
    const int col_sjump = table.column("s_jump");
    const int col_rset = table.column("r_settled");
    const int col_sset = table.column("s_settled");

    std::map<int, AsyncEpochRow> rows;
    for (const auto& cells : table.rows) {
        const int epoch = std::stoi(cells[col_epoch]);
        const int agent = std::stoi(cells[col_agent]);
        auto& row = rows[epoch];
        if (row.x.empty()) {
            row.epoch = epoch;
            row.x.assign(agents, Vector::Zero(dimension));
            row.p.assign(agents, Vector::Zero(dimension));
            row.e_diag.assign(agents, 0.0);
            row.e_error.assign(agents, 0.0);
            row.s_jump.assign(agents, 0.0);
        }
        for (int d = 0; d < dimension; ++d) {
            row.x[agent][d] = std::stod(cells[col_x0 + d]);
            row.p[agent][d] = std::stod(cells[col_p0 + d]);
        }
        row.e_diag[agent] = std::stod(cells[col_eself]);
        row.e_error[agent] = std::stod(cells[col_eerr]);
        row.alpha = std::stod(cells[col_alpha]);
        row.contraction = std::stod(cells[col_contraction]);
        row.s_jump[agent] = std::stod(cells[col_sjump]);
        row.r_settled = cells[col_rset] == "1";
        row.s_settled = cells[col_sset] == "1";
    }
    std::vector<AsyncEpochRow> out;
    out.reserve(rows.size());
    for (auto& [epoch, row] : rows) out.push_back(std::move(row));
    return out;
}

TheoryReport report_on_run(const std::filesystem::path& run_dir) {
    const auto config =
        ExperimentConfig::from_file(run_dir / "config_resolved.json");
    const auto g = config.build_graph_spec();
    const auto w = config.build_weight_matrix(g);
    const auto problem = config.build_problem();

    TheoryReport combined;
    const auto trace_path = run_dir / "trace_epochs.csv";
    if (std::filesystem::exists(trace_path)) {
        const auto trace =
            load_epoch_trace(trace_path, w.size(), problem.dimension());
        const auto t1 = contraction_trace_checks(trace, problem, w);
        combined.checks.insert(combined.checks.end(), t1.checks.begin(), t1.checks.end());
    }

    const auto contraction = consensus_contraction_check(
        w, config.initial_states(w.size(), problem.dimension()), 15);
    combined.checks.insert(combined.checks.end(), contraction.checks.begin(),
                           contraction.checks.end());

    for (std::size_t i = 0; i < problem.objectives.size() && i < 3; ++i) {
        auto coco = cocoercivity_check(problem.objectives[i], 500, 1000 + i);
        coco.checks[0].check_id += "_agent" + std::to_string(i);
        combined.checks.insert(combined.checks.end(), coco.checks.begin(),
                               coco.checks.end());
    }

    std::ofstream(run_dir / "theory_report.json") << combined.to_json() << '\n';
    std::ofstream(run_dir / "theory_report.txt") << combined.to_text();
    return combined;
}

void emit_plots(const std::filesystem::path& run_dir) {
    bool plotted = false;

    const auto plot_estimates = [&](const std::filesystem::path& csv,
                                    const char* time_col, const char* out_name,
                                    const char* title) {
        if (!std::filesystem::exists(csv)) return;
        const CsvTable table = read_csv(csv);
        if (table.rows.empty())
            throw std::invalid_argument("trace " + csv.string() + " has no rows");
        const int ct = table.column(time_col);
        const int ca = table.column("agent");
        const int cx = table.column("x_0");
        std::map<int, PlotSeries> per_agent;
        for (const auto& cells : table.rows) {
            const int agent = std::stoi(cells[ca]);
            auto& s = per_agent[agent];
            if (s.label.empty()) s.label = "agent " + std::to_string(agent);
            s.x.push_back(std::stod(cells[ct]));
            s.y.push_back(std::stod(cells[cx]));
        }
        std::vector<PlotSeries> series;
        for (auto& [agent, s] : per_agent) series.push_back(std::move(s));
        std::ofstream out(run_dir / out_name);
        write_line_plot(out, title, time_col, "estimate", series);
        plotted = true;
    };

    plot_estimates(run_dir / "trace_epochs.csv", "epoch", "convergence.svg",
                   "Agent estimates per epoch");
    plot_estimates(run_dir / "trace_ticks.csv", "tick", "convergence.svg",
                   "Agent estimates per tick");

    // Tracker (r/s ratio) and naive flood estimates for agent 0, when present.
    std::vector<PlotSeries> compare;
    const auto targets_path = run_dir / "run_targets.json";
    if (std::filesystem::exists(run_dir / "tracker_trace.csv")) {
        const CsvTable table = read_csv(run_dir / "tracker_trace.csv");
        if (table.rows.empty())
            throw std::invalid_argument("tracker trace has no rows");
        const int ct = table.column("tick");
        const int ca = table.column("agent");
        const int cr = table.column("r_0");
        const int cs = table.column("s");
        PlotSeries s;
        s.label = "tracker (agent 0)";
        for (const auto& cells : table.rows) {
            if (std::stoi(cells[ca]) != 0) continue;
            const double sval = std::stod(cells[cs]);
            if (std::abs(sval) < 1e-9) continue;
            s.x.push_back(std::stod(cells[ct]));
            s.y.push_back(std::stod(cells[cr]) / std::abs(sval));
        }
        if (!s.x.empty()) compare.push_back(std::move(s));
    }
    if (std::filesystem::exists(run_dir / "naive_trace.csv")) {
        const CsvTable table = read_csv(run_dir / "naive_trace.csv");
        if (table.rows.empty())
            throw std::invalid_argument("naive trace has no rows");
        const int ct = table.column("tick");
        const int ca = table.column("agent");
        const int ce = table.column("estimate_0");
        PlotSeries s;
        s.label = "naive flood (agent 0)";
        for (const auto& cells : table.rows) {
            if (std::stoi(cells[ca]) != 0) continue;
            s.x.push_back(std::stod(cells[ct]));
            s.y.push_back(std::stod(cells[ce]));
        }
        if (!s.x.empty()) compare.push_back(std::move(s));
    }
    if (!compare.empty()) {
        if (std::filesystem::exists(targets_path)) {
            std::ifstream in(targets_path);
            nlohmann::json targets;
            in >> targets;
            if (targets.contains("weighted_gradient_target")) {
                const double target = targets["weighted_gradient_target"][0].get<double>();
                PlotSeries line;
                line.label = "weighted average";
                double x_max = 0.0;
                for (const auto& s : compare)
                    for (double x : s.x) x_max = std::max(x_max, x);
                line.x = {0.0, x_max};
                line.y = {target, target};
                compare.push_back(std::move(line));
            }
        }
        std::ofstream out(run_dir / "tracker_vs_naive.svg");
        write_line_plot(out, "Average tracking vs naive flooding", "tick", "estimate",
                        compare);
        plotted = true;
    }

    if (!plotted)
        throw std::invalid_argument("no usable traces in " + run_dir.string());
}

} // namespace dropt
