#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lapest/graph.hpp"

namespace lapest {

/// Counts elementary steps (vertex and incidence visits) so tests can check
/// that the tree routines stay linear in n + m.
struct WorkCounter {
  std::size_t steps = 0;
};

/// Rooted spanning tree over all vertices of a graph. Vertex ids are 0-based.
struct SpanningTree {
  int root = 0;
  std::vector<int> parent;       // root maps to itself
  std::vector<int> parent_edge;  // -1 for the root
  std::vector<int> depth;
  std::vector<int> order;        // BFS order, root first
  std::vector<char> in_tree;     // mask over graph edges

  std::size_t num_tree_edges() const;
};

/// Breadth-first tree; neighbours are explored in ascending edge id.
SpanningTree bfs_tree(const Graph& g, int root = 0, WorkCounter* counter = nullptr);

/// Builds a tree from an explicit list of n-1 edge ids. Throws
/// InvalidArgument if they do not form a spanning tree.
SpanningTree tree_from_edges(const Graph& g, std::span<const int> tree_edges, int root = 0);

/// Default tolerance for sum(f) == 0: 1e-10 * max(1, ||f||).
double compatibility_tolerance(const VertexFunction& f);

/// Throws IncompatibleRHS if f is not in the range of the Laplacian.
void check_compatible(const VertexFunction& f);

/// Flow supported on tree edges whose divergence is f, by accumulating
/// subtree sums of f in reverse BFS order. Off-tree entries are zero.
EdgeFlow tree_flow(const Graph& g, const SpanningTree& t, const VertexFunction& f, WorkCounter* counter = nullptr);

/// Potential x with x_root = 0 and w_e (x_hi - x_lo) = flow_e on every tree
/// edge. Entries of `flow` off the tree are ignored.
VertexFunction tree_potential(const Graph& g, const SpanningTree& t, const EdgeFlow& flow);

struct TreeFlowResult {
  EdgeFlow tau_f;
  SpanningTree tree;
};

/// BFS tree from `root` plus tree_flow: one flow with divergence exactly f.
TreeFlowResult compute_tau_f(const Graph& g, const VertexFunction& f, int root = 0, WorkCounter* counter = nullptr);

}  // namespace lapest
