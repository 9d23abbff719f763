#include "lapest/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lapest/error.hpp"

namespace lapest {

namespace {

std::string edge_label(long long i, long long j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

Graph validate_graph(std::span<const RawEdge> raw, long long num_vertices) {
  if (raw.empty()) throw Error(ErrorKind::EmptyGraph, "edge list is empty");
  if (num_vertices < 2) throw Error(ErrorKind::InvalidArgument, "graph needs at least two vertices");

  Graph g;
  g.num_vertices_ = static_cast<std::size_t>(num_vertices);
  g.edges_.reserve(raw.size());
  for (const RawEdge& r : raw) {
    if (r.i < 1 || r.i > num_vertices || r.j < 1 || r.j > num_vertices)
      throw Error(ErrorKind::InvalidArgument, "vertex label out of range in edge " + edge_label(r.i, r.j));
    if (r.i == r.j) throw Error(ErrorKind::SelfLoop, "self-loop at vertex " + std::to_string(r.i));
    if (!(r.weight > 0.0) || !std::isfinite(r.weight))
      throw Error(ErrorKind::NonpositiveWeight, "edge " + edge_label(r.i, r.j) + " has weight " + std::to_string(r.weight));
    const int a = static_cast<int>(r.i - 1);
    const int b = static_cast<int>(r.j - 1);
    g.edges_.push_back(Edge{std::max(a, b), std::min(a, b), r.weight});
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge& x, const Edge& y) { return x.hi != y.hi ? x.hi < y.hi : x.lo < y.lo; });
  for (std::size_t e = 1; e < g.edges_.size(); ++e) {
    if (g.edges_[e].hi == g.edges_[e - 1].hi && g.edges_[e].lo == g.edges_[e - 1].lo)
      throw Error(ErrorKind::DuplicateEdge, "edge " + edge_label(g.edges_[e].hi + 1, g.edges_[e].lo + 1) + " appears twice");
  }

  const std::size_t n = g.num_vertices_;
  g.offsets_.assign(n + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.hi + 1];
    ++g.offsets_[e.lo + 1];
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.incidence_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are visited in ascending id, so each incidence list ends up sorted.
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const Edge& ed = g.edges_[e];
    g.incidence_[cursor[ed.hi]++] = Incidence{static_cast<int>(e), ed.lo, +1};
    g.incidence_[cursor[ed.lo]++] = Incidence{static_cast<int>(e), ed.hi, -1};
  }

  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const Incidence& inc : g.incidences(v)) {
      if (!seen[inc.neighbor]) {
        seen[inc.neighbor] = 1;
        ++reached;
        stack.push_back(inc.neighbor);
      }
    }
  }
  if (reached != n)
    throw Error(ErrorKind::DisconnectedGraph,
                "only " + std::to_string(reached) + " of " + std::to_string(n) + " vertices reachable from vertex 1");
  return g;
}

int Graph::find_edge(int a, int b) const {
  for (const Incidence& inc : incidences(a))
    if (inc.neighbor == b) return inc.edge;
  return -1;
}

void check_vertex_size(const Graph& g, const VertexFunction& v, const char* what) {
  if (v.size() != g.num_vertices())
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has length " + std::to_string(v.size()) +
                                                  ", graph has " + std::to_string(g.num_vertices()) + " vertices");
}

void check_edge_size(const Graph& g, const EdgeFlow& flow, const char* what) {
  if (flow.size() != g.num_edges())
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has length " + std::to_string(flow.size()) +
                                                  ", graph has " + std::to_string(g.num_edges()) + " edges");
}

EdgeFlow gradient(const Graph& g, const VertexFunction& v) {
  check_vertex_size(g, v, "vertex function");
  EdgeFlow out(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    out[e] = v[ed.hi] - v[ed.lo];
  }
  return out;
}

VertexFunction divergence(const Graph& g, const EdgeFlow& flow) {
  check_edge_size(g, flow, "edge flow");
  VertexFunction out(g.num_vertices());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    out[ed.hi] += flow[e];
    out[ed.lo] -= flow[e];
  }
  return out;
}

EdgeFlow scale_by_weights(const Graph& g, const EdgeFlow& flow) {
  check_edge_size(g, flow, "edge flow");
  EdgeFlow out(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) out[e] = g.weight(e) * flow[e];
  return out;
}

VertexFunction apply_laplacian(const Graph& g, const VertexFunction& v) {
  return divergence(g, scale_by_weights(g, gradient(g, v)));
}

double dinv_dot(const Graph& g, const EdgeFlow& a, const EdgeFlow& b) {
  check_edge_size(g, a, "edge flow");
  check_edge_size(g, b, "edge flow");
  double s = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) s += a[e] * b[e] / g.weight(e);
  return s;
}

double dinv_norm(const Graph& g, const EdgeFlow& flow) { return std::sqrt(dinv_dot(g, flow, flow)); }

double l_seminorm(const Graph& g, const VertexFunction& v) {
  check_vertex_size(g, v, "vertex function");
  double s = 0.0;
  for (const Edge& ed : g.edges()) {
    const double d = v[ed.hi] - v[ed.lo];
    s += ed.weight * d * d;
  }
  return std::sqrt(s);
}

std::vector<RawEdge> to_raw_edges(const Graph& g) {
  std::vector<RawEdge> out;
  out.reserve(g.num_edges());
  for (const Edge& e : g.edges()) out.push_back(RawEdge{e.hi + 1LL, e.lo + 1LL, e.weight});
  return out;
}

}  // namespace lapest
