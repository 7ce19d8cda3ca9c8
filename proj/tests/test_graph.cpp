#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <sstream>

#include "dropt/graph.hpp"

using namespace dropt;

namespace {

// Oracle: Tarjan's strongly connected components, independent of the
// library's reachability check.
struct Tarjan {
    const DirectedGraph& g;
    std::vector<int> index, lowlink;
    std::vector<char> on_stack;
    std::vector<int> stack;
    int counter = 0, components = 0;

    explicit Tarjan(const DirectedGraph& graph)
        : g(graph), index(graph.node_count, -1), lowlink(graph.node_count, 0),
          on_stack(graph.node_count, 0) {
        for (int v = 0; v < g.node_count; ++v)
            if (index[v] < 0) visit(v);
    }

    void visit(int v) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
        for (int w : g.out_neighbors[v]) {
            if (index[w] < 0) {
                visit(w);
                lowlink[v] = std::min(lowlink[v], lowlink[w]);
            } else if (on_stack[w]) {
                lowlink[v] = std::min(lowlink[v], index[w]);
            }
        }
        if (lowlink[v] == index[v]) {
            ++components;
            while (true) {
                const int w = stack.back();
                stack.pop_back();
                on_stack[w] = 0;
                if (w == v) break;
            }
        }
    }
};

int scc_count(const DirectedGraph& g) { return Tarjan(g).components; }

// Oracle: left Perron vector via a dense eigensolver.
Eigen::VectorXd fle_by_eigensolver(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a.transpose());
    int best = 0;
    for (int i = 1; i < solver.eigenvalues().size(); ++i)
        if (std::abs(solver.eigenvalues()[i] - std::complex<double>(1.0, 0.0)) <
            std::abs(solver.eigenvalues()[best] - std::complex<double>(1.0, 0.0)))
            best = i;
    Eigen::VectorXd u = solver.eigenvectors().col(best).real();
    if (u.sum() < 0) u = -u;
    return u / u.sum();
}

// Oracle: second largest eigenvalue modulus of A itself.
double slem(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    std::vector<double> mods;
    for (int i = 0; i < solver.eigenvalues().size(); ++i)
        mods.push_back(std::abs(solver.eigenvalues()[i]));
    std::sort(mods.rbegin(), mods.rend());
    return mods.size() > 1 ? mods[1] : 0.0;
}

} // namespace

TEST_CASE("cycle topology") {
    const auto g = build_graph(3, Topology::cycle, 0);
    CHECK(g.node_count == 3);
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 0}});
    CHECK(is_strongly_connected(g));

    const auto g1 = build_graph(1, Topology::cycle, 0);
    CHECK(g1.edges.empty());
    CHECK(is_strongly_connected(g1));
}

TEST_CASE("adjacency sets are mutually consistent") {
    const auto g = build_graph(8, Topology::random_strongly_connected, 3);
    for (int i = 0; i < g.node_count; ++i)
        for (int j : g.in_neighbors[i]) {
            const auto& outs = g.out_neighbors[j];
            CHECK(std::find(outs.begin(), outs.end(), i) != outs.end());
        }
}

TEST_CASE("strong connectivity against the Tarjan oracle") {
    // Two disconnected nodes.
    DirectedGraph disconnected;
    disconnected.node_count = 2;
    disconnected.in_neighbors.assign(2, {});
    disconnected.out_neighbors.assign(2, {});
    CHECK_FALSE(is_strongly_connected(disconnected));
    CHECK(scc_count(disconnected) == 2);

    // Chain with no return edge.
    DirectedGraph chain;
    chain.node_count = 3;
    chain.edges = {{0, 1}, {1, 2}};
    chain.in_neighbors = {{}, {0}, {1}};
    chain.out_neighbors = {{1}, {2}, {}};
    CHECK_FALSE(is_strongly_connected(chain));
    CHECK(scc_count(chain) == 3);

    // Builder rejects such edge lists outright.
    CHECK_THROWS_AS(build_graph(2, Topology::from_edge_list, 0, {{0, 1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_graph(3, Topology::from_edge_list, 0, {{0, 1}, {1, 2}}),
                    std::invalid_argument);

    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int n = 2 + static_cast<int>(seed % 9);
        const auto g = build_graph(n, Topology::random_strongly_connected, seed);
        CHECK(is_strongly_connected(g));
        CHECK(scc_count(g) == 1);
    }
}

TEST_CASE("random graphs are deterministic in the seed") {
    const auto a = build_graph(22, Topology::random_strongly_connected, 7);
    const auto b = build_graph(22, Topology::random_strongly_connected, 7);
    const auto c = build_graph(22, Topology::random_strongly_connected, 8);
    CHECK(a.edges == b.edges);
    CHECK(a.edges != c.edges);
    CHECK(scc_count(a) == 1);
}

TEST_CASE("row stochastic weights on the 3-cycle") {
    const auto g = build_graph(3, Topology::cycle, 0);
    const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                 WeightRule::uniform_in_degree);
    for (int i = 0; i < 3; ++i) {
        CHECK(w(i, i) == doctest::Approx(0.5));
        CHECK(w.entries.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(w(1, 0) == doctest::Approx(0.5));
    // Circulant, so the eigenvector is uniform.
    for (int i = 0; i < 3; ++i) CHECK(w.fle[i] == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("column stochastic weights on the 3-cycle") {
    const auto g = build_graph(3, Topology::cycle, 0);
    const auto w = build_weights(g, StochasticityClass::column_stochastic,
                                 WeightRule::uniform_out_degree);
    for (int j = 0; j < 3; ++j) {
        CHECK(w.entries.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w(j, j) == doctest::Approx(0.5));
    }
}

TEST_CASE("stochasticity sums hold on random graphs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int n = 2 + static_cast<int>(seed);
        const auto g = build_graph(n, Topology::random_strongly_connected, seed);
        const auto row = build_weights(g, StochasticityClass::row_stochastic,
                                       WeightRule::uniform_in_degree);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(row.entries.row(i).sum() - 1.0) < 1e-12);
        const auto col = build_weights(g, StochasticityClass::column_stochastic,
                                       WeightRule::uniform_out_degree);
        for (int j = 0; j < n; ++j)
            CHECK(std::abs(col.entries.col(j).sum() - 1.0) < 1e-12);
        const auto dbl = build_weights(g, StochasticityClass::doubly_stochastic,
                                       WeightRule::uniform_in_degree);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(dbl.entries.row(i).sum() - 1.0) < 1e-12);
            CHECK(std::abs(dbl.entries.col(i).sum() - 1.0) < 1e-11);
        }
    }
}

TEST_CASE("first left eigenvector examples") {
    // Doubly stochastic: uniform vector.
    const auto g = build_graph(4, Topology::random_strongly_connected, 5);
    const auto dbl = build_weights(g, StochasticityClass::doubly_stochastic,
                                   WeightRule::uniform_in_degree);
    for (int i = 0; i < 4; ++i) CHECK(dbl.fle[i] == doctest::Approx(0.25).epsilon(1e-9));

    // 2-node chain with explicit weights: stationary equations by hand give
    // u = (2/3, 1/3).
    const auto g2 = build_graph(2, Topology::from_edge_list, 0, {{0, 1}, {1, 0}});
    Eigen::MatrixXd entries(2, 2);
    entries << 0.8, 0.2, 0.4, 0.6;
    const auto w2 = weights_from_entries(g2, entries, StochasticityClass::row_stochastic);
    CHECK(w2.fle[0] == doctest::Approx(2.0 / 3).epsilon(1e-10));
    CHECK(w2.fle[1] == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("eigenvector residual on 100 random graphs") {
    int count = 0;
    for (std::uint64_t seed = 0; count < 100; ++seed) {
        const int n = 2 + static_cast<int>(seed % 9);
        const auto g = build_graph(n, Topology::random_strongly_connected, seed);
        const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                     WeightRule::uniform_in_degree);
        const Eigen::VectorXd residual =
            w.fle.transpose() * w.entries - w.fle.transpose();
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
        CHECK(w.fle.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((w.fle.array() > 0.0).all());
        // Cross-check against the dense solver.
        const Eigen::VectorXd oracle = fle_by_eigensolver(w.entries);
        CHECK((w.fle - oracle).cwiseAbs().maxCoeff() < 1e-9);
        ++count;
    }
}

TEST_CASE("power iteration rejects periodic matrices") {
    // Bipartite star {0} <-> {1, 2} without self-loops has period 2, so the
    // iterates oscillate and never meet the tolerance.
    Eigen::MatrixXd periodic(3, 3);
    periodic << 0.0, 0.5, 0.5,
                1.0, 0.0, 0.0,
                1.0, 0.0, 0.0;
    CHECK_THROWS_AS(first_left_eigenvector(periodic), std::runtime_error);
}

TEST_CASE("contraction factor examples") {
    // Rank-1 doubly stochastic matrix contracts in one step.
    WeightMatrix flat;
    flat.entries = Eigen::MatrixXd::Constant(2, 2, 0.5);
    flat.cls = StochasticityClass::doubly_stochastic;
    flat.fle = Eigen::VectorXd::Constant(2, 0.5);
    CHECK(contraction_factor(flat) < 1e-12);

    // 3-cycle with self-loop weight 1/2: circulant eigenvalues give 1/2.
    const auto g = build_graph(3, Topology::cycle, 0);
    const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                 WeightRule::uniform_in_degree);
    CHECK(contraction_factor(w) == doctest::Approx(0.5).epsilon(1e-10));

    // Periodic swap matrix keeps eigenvalue -1: no contraction. This is why
    // weight construction forces self-loops.
    WeightMatrix swap;
    swap.entries.resize(2, 2);
    swap.entries << 0, 1, 1, 0;
    swap.cls = StochasticityClass::doubly_stochastic;
    swap.fle = Eigen::VectorXd::Constant(2, 0.5);
    CHECK(contraction_factor(swap) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("contraction factor equals the SLEM oracle") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const int n = 2 + static_cast<int>(seed % 5);
        const auto g = build_graph(n, Topology::random_strongly_connected, seed + 40);
        const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                     WeightRule::uniform_in_degree);
        const double factor = contraction_factor(w);
        CHECK(factor < 1.0);
        CHECK(std::abs(factor - slem(w.entries)) < 1e-8);
    }
}

TEST_CASE("edge list round trip") {
    const auto g = build_graph(5, Topology::random_strongly_connected, 2);
    const auto w = build_weights(g, StochasticityClass::row_stochastic,
                                 WeightRule::uniform_in_degree);
    std::stringstream buf;
    write_edge_list(buf, g, &w);
    const auto data = read_edge_list(buf);
    CHECK(data.edges == g.edges);
    REQUIRE(data.weights.size() == data.edges.size());
    for (std::size_t k = 0; k < data.edges.size(); ++k) {
        const auto [from, to] = data.edges[k];
        CHECK(data.weights[k] == w.entries(to, from));
    }

    std::stringstream bad("0 1\n1 0 0.5\n");
    CHECK_THROWS_AS(read_edge_list(bad), std::invalid_argument);
}

TEST_CASE("explicit weights validate pattern and class") {
    const auto g = build_graph(2, Topology::from_edge_list, 0, {{0, 1}, {1, 0}});
    Eigen::MatrixXd wrong_sum(2, 2);
    wrong_sum << 0.7, 0.2, 0.4, 0.6;
    CHECK_THROWS_AS(weights_from_entries(g, wrong_sum, StochasticityClass::row_stochastic),
                    std::invalid_argument);
    Eigen::MatrixXd zero_edge(2, 2);
    zero_edge << 1.0, 0.0, 0.4, 0.6;
    CHECK_THROWS_AS(weights_from_entries(g, zero_edge, StochasticityClass::row_stochastic),
                    std::invalid_argument);
}
