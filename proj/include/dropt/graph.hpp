/**
 * Directed communication graphs and their stochastic weight matrices.
 *
 * A graph edge (j -> i) means node j sends to node i, so row i of the
 * weight matrix holds the coefficients node i applies to its in-neighbours.
 * Weight construction always adds self-loops: strong connectivity alone
 * admits periodic matrices (e.g. the 2-node swap) whose consensus error
 * never contracts, while a positive diagonal makes the matrix primitive.
 *
 * All types here are immutable after construction and safe to share
 * across threads.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace dropt {

struct DirectedGraph {
    int node_count = 0;
    // Ordered (from, to) pairs, deduplicated and sorted; never contains
    // (i, i) — self-loops are a weight-construction flag, not stored edges.
    std::vector<std::pair<int, int>> edges;
    bool self_loops = true;

    // Derived adjacency, kept consistent with `edges`:
    // j is in in_neighbors[i] exactly when i is in out_neighbors[j].
    std::vector<std::vector<int>> in_neighbors;
    std::vector<std::vector<int>> out_neighbors;

    int in_degree(int i) const { return static_cast<int>(in_neighbors[i].size()); }
    int out_degree(int j) const { return static_cast<int>(out_neighbors[j].size()); }
};

enum class Topology { cycle, random_strongly_connected, from_edge_list };
enum class StochasticityClass { row_stochastic, column_stochastic, doubly_stochastic };
enum class WeightRule { uniform_in_degree, uniform_out_degree };

/// Builds a directed graph of the requested topology.
///
/// cycle: edges 0->1->...->(N-1)->0 (empty for N = 1).
/// random_strongly_connected: a seeded random permutation cycle plus extra
///   random edges; strongly connected by construction, identical for equal
///   seeds.
/// from_edge_list: uses `edge_list` verbatim (0-indexed, self-pairs and
///   duplicates rejected) and requires the result to be strongly connected.
DirectedGraph build_graph(int node_count, Topology topology, std::uint64_t seed,
                          const std::vector<std::pair<int, int>>& edge_list = {});

/// True iff every node reaches every other node along directed edges.
bool is_strongly_connected(const DirectedGraph& g);

struct WeightMatrix {
    Eigen::MatrixXd entries;   // N x N, entries(i, j) = a_ij
    StochasticityClass cls = StochasticityClass::row_stochastic;
    Eigen::VectorXd fle;       // first left eigenvector, positive, sums to 1

    int size() const { return static_cast<int>(entries.rows()); }
    double operator()(int i, int j) const { return entries(i, j); }
};

/// Uniform-weight construction over the graph plus forced self-loops.
///
/// row_stochastic    requires uniform_in_degree:  a_ij = 1/(d_i^- + 1)
/// column_stochastic requires uniform_out_degree: a_ij = 1/(d_j^+ + 1)
/// doubly_stochastic is obtained by Sinkhorn scaling of the self-looped
/// pattern; throws if the scaling does not converge (pattern admits no
/// doubly stochastic weights).
WeightMatrix build_weights(const DirectedGraph& g, StochasticityClass cls,
                           WeightRule rule);

/// Wraps an explicit nonnegative matrix (e.g. from a weighted edge list),
/// validating the sparsity pattern against the graph and the requested
/// stochasticity class to 1e-12.
WeightMatrix weights_from_entries(const DirectedGraph& g, Eigen::MatrixXd entries,
                                  StochasticityClass cls);

/// First left eigenvector of a primitive stochastic matrix: u^T A = u^T,
/// sum(u) = 1, u > 0. Power iteration on A^T to 1e-12 in max-norm with a
/// 1e6 step cap; throws on non-convergence (non-primitive matrix).
Eigen::VectorXd first_left_eigenvector(const Eigen::MatrixXd& a);

/// Spectral radius of A - 1 u^T, the per-step consensus contraction rate.
/// Lies in [0, 1) for primitive row-stochastic matrices; the Kronecker
/// extension A (x) I_n replicates eigenvalues, so the scalar case suffices.
double contraction_factor(const WeightMatrix& w);

// --- edge-list text format -------------------------------------------------
// One "from to [weight]" triple per line, 0-indexed. '#' starts a comment.

struct EdgeListData {
    std::vector<std::pair<int, int>> edges;
    // Parallel to `edges` when the file carries weights; empty otherwise.
    std::vector<double> weights;
};

EdgeListData read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const DirectedGraph& g,
                     const WeightMatrix* w = nullptr);

} // namespace dropt
