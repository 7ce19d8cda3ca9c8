#include "dropt/graph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dropt/util.hpp"

namespace dropt {

namespace {

void rebuild_adjacency(DirectedGraph& g) {
    g.in_neighbors.assign(g.node_count, {});
    g.out_neighbors.assign(g.node_count, {});
    for (const auto& [from, to] : g.edges) {
        g.in_neighbors[to].push_back(from);
        g.out_neighbors[from].push_back(to);
    }
    for (auto& v : g.in_neighbors) std::sort(v.begin(), v.end());
    for (auto& v : g.out_neighbors) std::sort(v.begin(), v.end());
}

DirectedGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
    for (const auto& [from, to] : edges) {
        if (from < 0 || from >= n || to < 0 || to >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (from == to)
            throw std::invalid_argument("explicit self-loop in edge list; "
                                        "self-loops are added during weight construction");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    DirectedGraph g;
    g.node_count = n;
    g.edges = std::move(edges);
    rebuild_adjacency(g);
    return g;
}

// Reachability of every node from `start` following the given adjacency.
bool reaches_all(int n, const std::vector<std::vector<int>>& adj, int start) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

} // namespace

DirectedGraph build_graph(int node_count, Topology topology, std::uint64_t seed,
                          const std::vector<std::pair<int, int>>& edge_list) {
    if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");

    switch (topology) {
    case Topology::cycle: {
        std::vector<std::pair<int, int>> edges;
        if (node_count > 1) {
            edges.reserve(node_count);
            for (int i = 0; i < node_count; ++i)
                edges.emplace_back(i, (i + 1) % node_count);
        }
        return from_edges(node_count, std::move(edges));
    }
    case Topology::random_strongly_connected: {
        // Random permutation cycle guarantees strong connectivity; extra
        // edges with fixed probability give expander-like mixing.
        std::mt19937_64 rng(mix64(seed));
        std::vector<int> perm(node_count);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < node_count && node_count > 1; ++i)
            edges.emplace_back(perm[i], perm[(i + 1) % node_count]);
        const double extra_prob = 0.15;
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (int from = 0; from < node_count; ++from)
            for (int to = 0; to < node_count; ++to)
                if (from != to && coin(rng) < extra_prob)
                    edges.emplace_back(from, to);
        DirectedGraph g = from_edges(node_count, std::move(edges));
        if (!is_strongly_connected(g))
            throw std::logic_error("random graph construction lost strong connectivity");
        return g;
    }
    case Topology::from_edge_list: {
        DirectedGraph g = from_edges(node_count, edge_list);
        if (!is_strongly_connected(g)) {
            std::ostringstream msg;
            msg << "edge list with " << g.edges.size() << " edges on "
                << node_count << " nodes is not strongly connected";
            throw std::invalid_argument(msg.str());
        }
        return g;
    }
    }
    throw std::invalid_argument("unknown topology");
}

bool is_strongly_connected(const DirectedGraph& g) {
    if (g.node_count <= 1) return true;
    // Strongly connected iff node 0 reaches everyone along forward edges
    // and along reversed edges.
    return reaches_all(g.node_count, g.out_neighbors, 0) &&
           reaches_all(g.node_count, g.in_neighbors, 0);
}

namespace {

Eigen::MatrixXd sinkhorn_doubly_stochastic(const DirectedGraph& g) {
    const int n = g.node_count;
    Eigen::MatrixXd pattern = Eigen::MatrixXd::Identity(n, n);
    for (const auto& [from, to] : g.edges) pattern(to, from) = 1.0;

    Eigen::MatrixXd a = pattern;
    const int max_iters = 100000;
    for (int it = 0; it < max_iters; ++it) {
        for (int i = 0; i < n; ++i) a.row(i) /= a.row(i).sum();
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
            const double cs = a.col(j).sum();
            worst = std::max(worst, std::abs(cs - 1.0));
            a.col(j) /= cs;
        }
        if (worst < 1e-13) {
            for (int i = 0; i < n; ++i) a.row(i) /= a.row(i).sum();
            return a;
        }
    }
    throw std::invalid_argument(
        "graph admits no doubly stochastic weights (Sinkhorn scaling did not converge)");
}

void validate_class(const Eigen::MatrixXd& a, StochasticityClass cls) {
    const int n = static_cast<int>(a.rows());
    const double tol = 1e-12;
    if (cls != StochasticityClass::column_stochastic)
        for (int i = 0; i < n; ++i)
            if (std::abs(a.row(i).sum() - 1.0) > tol)
                throw std::invalid_argument("row sums must equal 1 for this class");
    if (cls != StochasticityClass::row_stochastic)
        for (int j = 0; j < n; ++j)
            if (std::abs(a.col(j).sum() - 1.0) > tol)
                throw std::invalid_argument("column sums must equal 1 for this class");
}

} // namespace

WeightMatrix build_weights(const DirectedGraph& g, StochasticityClass cls,
                           WeightRule rule) {
    if (!is_strongly_connected(g))
        throw std::invalid_argument("weight construction requires a strongly connected graph");
    const int n = g.node_count;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);

    switch (cls) {
    case StochasticityClass::row_stochastic: {
        if (rule != WeightRule::uniform_in_degree)
            throw std::invalid_argument("row stochastic weights use the uniform in-degree rule");
        for (int i = 0; i < n; ++i) {
            const double w = 1.0 / (g.in_degree(i) + 1);
            a(i, i) = w;
            for (int j : g.in_neighbors[i]) a(i, j) = w;
        }
        break;
    }
    case StochasticityClass::column_stochastic: {
        if (rule != WeightRule::uniform_out_degree)
            throw std::invalid_argument("column stochastic weights use the uniform out-degree rule");
        for (int j = 0; j < n; ++j) {
            const double w = 1.0 / (g.out_degree(j) + 1);
            a(j, j) = w;
            for (int i : g.out_neighbors[j]) a(i, j) = w;
        }
        break;
    }
    case StochasticityClass::doubly_stochastic:
        a = sinkhorn_doubly_stochastic(g);
        break;
    }

    validate_class(a, cls);
    WeightMatrix w;
    w.entries = std::move(a);
    w.cls = cls;
    w.fle = first_left_eigenvector(w.entries);
    return w;
}

WeightMatrix weights_from_entries(const DirectedGraph& g, Eigen::MatrixXd entries,
                                  StochasticityClass cls) {
    const int n = g.node_count;
    if (entries.rows() != n || entries.cols() != n)
        throw std::invalid_argument("weight matrix dimension mismatch");
    if ((entries.array() < 0.0).any())
        throw std::invalid_argument("weights must be nonnegative");
    // Pattern check: positive exactly on edges and the diagonal.
    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [from, to] : g.edges) pattern(to, from) = 1.0;
    for (int i = 0; i < n; ++i) pattern(i, i) = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (entries(i, j) > 0.0 && pattern(i, j) == 0.0)
                throw std::invalid_argument("positive weight off the graph pattern");
            if (i != j && entries(i, j) == 0.0 && pattern(i, j) == 1.0)
                throw std::invalid_argument("graph edge carries zero weight");
        }
    validate_class(entries, cls);
    WeightMatrix w;
    w.entries = std::move(entries);
    w.cls = cls;
    w.fle = first_left_eigenvector(w.entries);
    return w;
}

Eigen::VectorXd first_left_eigenvector(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.rows() != a.cols())
        throw std::invalid_argument("matrix must be square and non-empty");
    Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / n);
    const Eigen::MatrixXd at = a.transpose();
    const long cap = 1000000;
    for (long it = 0; it < cap; ++it) {
        Eigen::VectorXd next = at * u;
        next /= next.sum();
        const double delta = (next - u).cwiseAbs().maxCoeff();
        u = std::move(next);
        if (delta < 1e-12) {
            if ((u.array() <= 0.0).any())
                throw std::runtime_error("left eigenvector has non-positive entries; "
                                         "matrix is not primitive");
            return u;
        }
    }
    throw std::runtime_error("power iteration did not converge; matrix is likely "
                             "periodic (missing self-loops?)");
}

double contraction_factor(const WeightMatrix& w) {
    const int n = w.size();
    const Eigen::MatrixXd deflated =
        w.entries - Eigen::VectorXd::Ones(n) * w.fle.transpose();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(deflated, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

EdgeListData read_edge_list(std::istream& in) {
    EdgeListData data;
    std::string line;
    bool saw_weight = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int from = 0, to = 0;
        if (!(ls >> from)) continue; // blank or comment-only line
        if (!(ls >> to))
            throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                        ": expected 'from to [weight]'");
        double weight = 0.0;
        if (ls >> weight) {
            saw_weight = true;
            data.weights.push_back(weight);
        } else if (saw_weight) {
            throw std::invalid_argument("edge list mixes weighted and unweighted lines");
        }
        data.edges.emplace_back(from, to);
    }
    if (saw_weight && data.weights.size() != data.edges.size())
        throw std::invalid_argument("edge list mixes weighted and unweighted lines");
    return data;
}

void write_edge_list(std::ostream& out, const DirectedGraph& g, const WeightMatrix* w) {
    for (const auto& [from, to] : g.edges) {
        out << from << ' ' << to;
        if (w) out << ' ' << format_double(w->entries(to, from));
        out << '\n';
    }
}

} // namespace dropt
