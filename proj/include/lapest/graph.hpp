#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lapest/vectors.hpp"

namespace lapest {

/// Edge as it arrives from the outside world: 1-based labels, any
/// orientation, weight unchecked.
struct RawEdge {
  long long i = 0;
  long long j = 0;
  double weight = 1.0;
};

/// Stored edge, 0-based, always hi > lo.
struct Edge {
  int hi = 0;
  int lo = 0;
  double weight = 1.0;
};

/// One entry of a vertex's incidence list. `sign` is +1 when the vertex is
/// the larger endpoint of the edge, so that divergence sums sign * flow.
struct Incidence {
  int edge = 0;
  int neighbor = 0;
  int sign = 0;
};

/// Connected, simple, positively weighted undirected graph with a canonical
/// edge order (lexicographic in (hi, lo)). Only obtainable through
/// validate_graph, so every instance satisfies those invariants.
class Graph {
 public:
  std::size_t num_vertices() const noexcept { return num_vertices_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  /// Dimension of the cycle space, m - n + 1.
  std::size_t cycle_rank() const noexcept { return edges_.size() + 1 - num_vertices_; }

  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  double weight(std::size_t e) const { return edges_[e].weight; }

  /// Incident edges of vertex v in ascending edge id.
  std::span<const Incidence> incidences(std::size_t v) const {
    return std::span<const Incidence>(incidence_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
  }
  std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Returns the edge id joining a and b, or -1.
  int find_edge(int a, int b) const;

 private:
  friend Graph validate_graph(std::span<const RawEdge> raw, long long num_vertices);

  std::size_t num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
};

/// Normalizes orientation, sorts edges canonically and checks the graph
/// invariants. Throws Error with kind SelfLoop, DuplicateEdge,
/// NonpositiveWeight, DisconnectedGraph, EmptyGraph or InvalidArgument.
Graph validate_graph(std::span<const RawEdge> raw, long long num_vertices);

/// (Gv)_e = v_hi - v_lo.
EdgeFlow gradient(const Graph& g, const VertexFunction& v);

/// Adjoint of gradient under the plain inner products.
VertexFunction divergence(const Graph& g, const EdgeFlow& flow);

/// D * flow, i.e. each entry scaled by its edge weight.
EdgeFlow scale_by_weights(const Graph& g, const EdgeFlow& flow);

/// G^T D G v.
VertexFunction apply_laplacian(const Graph& g, const VertexFunction& v);

/// sqrt(sum_e flow_e^2 / w_e).
double dinv_norm(const Graph& g, const EdgeFlow& flow);

/// (a, b)_{D^{-1}}.
double dinv_dot(const Graph& g, const EdgeFlow& a, const EdgeFlow& b);

/// sqrt(sum_e w_e (v_hi - v_lo)^2).
double l_seminorm(const Graph& g, const VertexFunction& v);

/// Back to 1-based raw edges in canonical order.
std::vector<RawEdge> to_raw_edges(const Graph& g);

void check_vertex_size(const Graph& g, const VertexFunction& v, const char* what);
void check_edge_size(const Graph& g, const EdgeFlow& flow, const char* what);

}  // namespace lapest
