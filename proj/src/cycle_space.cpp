#include "lapest/cycle_space.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "lapest/error.hpp"

namespace lapest {

EdgeFlow CycleVector::densify(std::size_t num_edges) const {
  EdgeFlow out(num_edges);
  for (const CycleEntry& en : entries) out[en.edge] = en.coef;
  return out;
}

CycleBasis index_cycles(const Graph& g, std::vector<CycleVector> cycles) {
  CycleBasis basis;
  basis.cycles = std::move(cycles);
  basis.edge_to_cycles.assign(g.num_edges(), {});
  basis.vertex_to_cycles.assign(g.num_vertices(), {});
  std::vector<int> edge_count(g.num_edges(), 0);
  std::vector<int> vertex_count(g.num_vertices(), 0);
  std::vector<int> last_seen(g.num_vertices(), -1);
  for (std::size_t c = 0; c < basis.cycles.size(); ++c)
    for (const CycleEntry& en : basis.cycles[c].entries) {
      ++edge_count[en.edge];
      for (int v : {g.edge(en.edge).hi, g.edge(en.edge).lo})
        if (last_seen[v] != static_cast<int>(c)) last_seen[v] = static_cast<int>(c), ++vertex_count[v];
    }
  for (std::size_t e = 0; e < g.num_edges(); ++e) basis.edge_to_cycles[e].reserve(edge_count[e]);
  for (std::size_t v = 0; v < g.num_vertices(); ++v) basis.vertex_to_cycles[v].reserve(vertex_count[v]);
  std::fill(last_seen.begin(), last_seen.end(), -1);
  for (std::size_t c = 0; c < basis.cycles.size(); ++c) {
    const int id = static_cast<int>(c);
    for (const CycleEntry& en : basis.cycles[c].entries) {
      basis.edge_to_cycles[en.edge].push_back(id);
      for (int v : {g.edge(en.edge).hi, g.edge(en.edge).lo}) {
        if (last_seen[v] == id) continue;
        last_seen[v] = id;
        basis.vertex_to_cycles[v].push_back(id);
      }
    }
  }
  return basis;
}

namespace {

int step_sign(int from, int to) { return from > to ? 1 : -1; }

}  // namespace

CycleBasis fundamental_cycle_basis(const Graph& g, const SpanningTree& t) {
  std::vector<CycleVector> cycles;
  cycles.reserve(g.cycle_rank());
  std::vector<CycleEntry> down;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (t.in_tree[e]) continue;
    const Edge& ed = g.edge(e);
    CycleVector c;
    c.anchor = static_cast<int>(e);
    c.entries.push_back({static_cast<int>(e), +1});

    // Walk j up to the LCA (traversal direction child -> parent), and i up
    // to the LCA (traversed parent -> child on the way back to i).
    int a = ed.lo;
    int b = ed.hi;
    down.clear();
    while (a != b) {
      if (t.depth[a] >= t.depth[b]) {
        c.entries.push_back({t.parent_edge[a], step_sign(a, t.parent[a])});
        a = t.parent[a];
      } else {
        down.push_back({t.parent_edge[b], step_sign(t.parent[b], b)});
        b = t.parent[b];
      }
    }
    c.entries.insert(c.entries.end(), down.begin(), down.end());
    std::sort(c.entries.begin(), c.entries.end(), [](const CycleEntry& x, const CycleEntry& y) { return x.edge < y.edge; });
    cycles.push_back(std::move(c));
  }
  return index_cycles(g, std::move(cycles));
}

CycleBasis face_cycle_basis(const Graph& g, std::span<const Point> coords) {
  const std::size_t n = g.num_vertices();
  if (coords.size() != n) throw Error(ErrorKind::NotAGridGraph, "coordinate count does not match vertex count");
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side < 2 || side * side != n) throw Error(ErrorKind::NotAGridGraph, "vertex count is not a square lattice");
  const std::size_t cells = side - 1;
  if (g.num_edges() != 3 * cells * cells + 2 * cells)
    throw Error(ErrorKind::NotAGridGraph, "edge count does not match a triangulated lattice");

  const double h = 1.0 / static_cast<double>(cells);
  auto id = [side](std::size_t a, std::size_t b) { return static_cast<int>(b * side + a); };
  for (std::size_t b = 0; b < side; ++b)
    for (std::size_t a = 0; a < side; ++a) {
      const Point& p = coords[id(a, b)];
      if (std::abs(p.x - a * h) > 1e-9 || std::abs(p.y - b * h) > 1e-9)
        throw Error(ErrorKind::NotAGridGraph, "vertex coordinates are not lattice-ordered");
    }

  std::vector<CycleVector> cycles;
  cycles.reserve(2 * cells * cells);
  auto triangle = [&](int p, int q, int r) {
    CycleVector c;
    c.entries.reserve(3);
    const int loop[4] = {p, q, r, p};
    for (int k = 0; k < 3; ++k) {
      const int e = g.find_edge(loop[k], loop[k + 1]);
      if (e < 0) throw Error(ErrorKind::NotAGridGraph, "missing triangle edge");
      c.entries.push_back({e, step_sign(loop[k], loop[k + 1])});
    }
    std::sort(c.entries.begin(), c.entries.end(), [](const CycleEntry& x, const CycleEntry& y) { return x.edge < y.edge; });
    cycles.push_back(std::move(c));
  };
  // Counter-clockwise traversal of the two triangles of each cell.
  for (std::size_t b = 0; b < cells; ++b)
    for (std::size_t a = 0; a < cells; ++a) {
      triangle(id(a, b), id(a + 1, b), id(a + 1, b + 1));
      triangle(id(a, b), id(a + 1, b + 1), id(a, b + 1));
    }
  return index_cycles(g, std::move(cycles));
}

SubspaceDecomposition vertex_subspaces(const CycleBasis& basis, const Graph& g, DecompositionMode mode) {
  if (basis.cycles.empty()) throw Error(ErrorKind::EmptyBasis, "cycle basis is empty (the graph is a tree)");
  SubspaceDecomposition d;
  d.mode = mode;
  if (mode == DecompositionMode::SingleCycle) {
    d.subspaces.reserve(basis.size());
    for (std::size_t c = 0; c < basis.size(); ++c) d.subspaces.push_back({static_cast<int>(c)});
    return d;
  }
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    if (!basis.vertex_to_cycles[v].empty()) d.subspaces.push_back(basis.vertex_to_cycles[v]);
  return d;
}

std::vector<int> cycle_divergence(const Graph& g, const CycleVector& c) {
  std::vector<int> div(g.num_vertices(), 0);
  for (const CycleEntry& en : c.entries) {
    div[g.edge(en.edge).hi] += en.coef;
    div[g.edge(en.edge).lo] -= en.coef;
  }
  return div;
}

CycleDiagnostics validate_cycle_basis(const Graph& g, const CycleBasis& basis) {
  CycleDiagnostics diag;
  diag.num_cycles = basis.size();
  diag.expected = g.cycle_rank();
  std::vector<int> div(g.num_vertices(), 0);
  for (std::size_t c = 0; c < basis.size(); ++c) {
    const CycleVector& cyc = basis.cycles[c];
    diag.max_length = std::max(diag.max_length, cyc.entries.size());
    for (const CycleEntry& en : cyc.entries) {
      if (en.coef != 1 && en.coef != -1)
        throw Error(ErrorKind::InvalidCycle, "cycle " + std::to_string(c) + " has a coefficient other than +-1");
      div[g.edge(en.edge).hi] += en.coef;
      div[g.edge(en.edge).lo] -= en.coef;
    }
    for (const CycleEntry& en : cyc.entries) {
      for (int v : {g.edge(en.edge).hi, g.edge(en.edge).lo}) {
        if (div[v] != 0)
          throw Error(ErrorKind::InvalidCycle, "cycle " + std::to_string(c) + " has nonzero divergence at vertex " +
                                                   std::to_string(v + 1));
      }
    }
    for (const CycleEntry& en : cyc.entries) {
      div[g.edge(en.edge).hi] = 0;
      div[g.edge(en.edge).lo] = 0;
    }
  }
  for (const auto& list : basis.vertex_to_cycles)
    diag.max_cycles_per_vertex = std::max(diag.max_cycles_per_vertex, list.size());

  if (diag.num_cycles != diag.expected)
    throw Error(ErrorKind::RankDeficient, "basis has " + std::to_string(diag.num_cycles) + " cycles, expected " +
                                              std::to_string(diag.expected));
  if (g.num_vertices() <= 500 && !basis.cycles.empty()) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_edges()),
                                              static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (const CycleEntry& en : basis.cycles[k].entries) c(en.edge, static_cast<Eigen::Index>(k)) = en.coef;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c);
    qr.setThreshold(1e-10);
    diag.rank_checked = true;
    diag.rank = static_cast<std::size_t>(qr.rank());
    if (diag.rank != diag.expected)
      throw Error(ErrorKind::RankDeficient, "cycle basis has rank " + std::to_string(diag.rank) + ", expected " +
                                                std::to_string(diag.expected));
  }
  return diag;
}

std::string basis_to_json(const CycleBasis& basis) {
  nlohmann::json out = nlohmann::json::array();
  for (const CycleVector& c : basis.cycles) {
    nlohmann::json entries = nlohmann::json::array();
    for (const CycleEntry& en : c.entries) entries.push_back({en.edge + 1, en.coef});
    out.push_back({{"anchor", c.anchor >= 0 ? nlohmann::json(c.anchor + 1) : nlohmann::json(nullptr)},
                   {"entries", std::move(entries)}});
  }
  return out.dump();
}

}  // namespace lapest
