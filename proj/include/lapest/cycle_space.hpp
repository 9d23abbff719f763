#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lapest/graph.hpp"
#include "lapest/spanning_tree.hpp"

namespace lapest {

struct CycleEntry {
  int edge = 0;
  int coef = 0;  // +1 or -1
};

/// Signed cycle in the edge space. Entries are sorted by edge id.
struct CycleVector {
  std::vector<CycleEntry> entries;
  int anchor = -1;  // inducing off-tree edge; -1 for face cycles

  EdgeFlow densify(std::size_t num_edges) const;
};

struct CycleBasis {
  std::vector<CycleVector> cycles;
  std::vector<std::vector<int>> edge_to_cycles;
  std::vector<std::vector<int>> vertex_to_cycles;

  std::size_t size() const noexcept { return cycles.size(); }
};

/// Fills the two inverted indices from `cycles`.
CycleBasis index_cycles(const Graph& g, std::vector<CycleVector> cycles);

/// One cycle per off-tree edge {i, j}, i > j: the edge traversed i -> j,
/// then the tree path back from j to i through their lowest common ancestor.
/// Each traversal step a -> b contributes sign(a - b) on its edge.
CycleBasis fundamental_cycle_basis(const Graph& g, const SpanningTree& t);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Triangle cycles of a graph produced by uniform_grid, recovered from its
/// vertex coordinates. Throws NotAGridGraph if the graph is not such a grid.
CycleBasis face_cycle_basis(const Graph& g, std::span<const Point> coords);

enum class DecompositionMode { Vertex, SingleCycle };

struct SubspaceDecomposition {
  std::vector<std::vector<int>> subspaces;  // cycle ids
  DecompositionMode mode = DecompositionMode::Vertex;
};

/// Vertex mode: subspace i holds the cycles through vertex i (empty ones
/// dropped, ascending vertex order). Single-cycle mode: one cycle each.
SubspaceDecomposition vertex_subspaces(const CycleBasis& basis, const Graph& g, DecompositionMode mode);

struct CycleDiagnostics {
  std::size_t num_cycles = 0;
  std::size_t expected = 0;
  bool rank_checked = false;
  std::size_t rank = 0;
  std::size_t max_length = 0;
  std::size_t max_cycles_per_vertex = 0;
};

/// Throws InvalidCycle on any nonzero divergence and RankDeficient when the
/// count or (for n <= 500) the numerical rank differs from m - n + 1.
CycleDiagnostics validate_cycle_basis(const Graph& g, const CycleBasis& basis);

/// Integer divergence of a single cycle; all zeros for a valid cycle.
std::vector<int> cycle_divergence(const Graph& g, const CycleVector& c);

std::string basis_to_json(const CycleBasis& basis);

}  // namespace lapest
