#include "lapest/spanning_tree.hpp"

#include <cmath>
#include <string>

#include "lapest/error.hpp"

namespace lapest {

std::size_t SpanningTree::num_tree_edges() const {
  std::size_t count = 0;
  for (char c : in_tree) count += c != 0;
  return count;
}

SpanningTree bfs_tree(const Graph& g, int root, WorkCounter* counter) {
  const std::size_t n = g.num_vertices();
  if (root < 0 || static_cast<std::size_t>(root) >= n)
    throw Error(ErrorKind::InvalidArgument, "root " + std::to_string(root + 1) + " out of range");

  SpanningTree t;
  t.root = root;
  t.parent.assign(n, -1);
  t.parent_edge.assign(n, -1);
  t.depth.assign(n, -1);
  t.in_tree.assign(g.num_edges(), 0);
  t.order.reserve(n);

  t.parent[root] = root;
  t.depth[root] = 0;
  t.order.push_back(root);
  std::size_t steps = 0;
  // `order` doubles as the BFS queue.
  for (std::size_t head = 0; head < t.order.size(); ++head) {
    const int v = t.order[head];
    ++steps;
    for (const Incidence& inc : g.incidences(v)) {
      ++steps;
      const int w = inc.neighbor;
      if (t.depth[w] >= 0) continue;
      t.parent[w] = v;
      t.parent_edge[w] = inc.edge;
      t.depth[w] = t.depth[v] + 1;
      t.in_tree[inc.edge] = 1;
      t.order.push_back(w);
    }
  }
  if (counter) counter->steps += steps;
  return t;
}

SpanningTree tree_from_edges(const Graph& g, std::span<const int> tree_edges, int root) {
  const std::size_t n = g.num_vertices();
  if (tree_edges.size() + 1 != n)
    throw Error(ErrorKind::InvalidArgument, "a spanning tree needs exactly n-1 edges");
  std::vector<char> mask(g.num_edges(), 0);
  for (int e : tree_edges) {
    if (e < 0 || static_cast<std::size_t>(e) >= g.num_edges())
      throw Error(ErrorKind::InvalidArgument, "tree edge id out of range");
    mask[e] = 1;
  }
  if (root < 0 || static_cast<std::size_t>(root) >= n)
    throw Error(ErrorKind::InvalidArgument, "root out of range");

  SpanningTree t;
  t.root = root;
  t.parent.assign(n, -1);
  t.parent_edge.assign(n, -1);
  t.depth.assign(n, -1);
  t.in_tree = mask;
  t.parent[root] = root;
  t.depth[root] = 0;
  t.order.push_back(root);
  for (std::size_t head = 0; head < t.order.size(); ++head) {
    const int v = t.order[head];
    for (const Incidence& inc : g.incidences(v)) {
      if (!mask[inc.edge] || t.depth[inc.neighbor] >= 0) continue;
      t.parent[inc.neighbor] = v;
      t.parent_edge[inc.neighbor] = inc.edge;
      t.depth[inc.neighbor] = t.depth[v] + 1;
      t.order.push_back(inc.neighbor);
    }
  }
  if (t.order.size() != n) throw Error(ErrorKind::InvalidArgument, "edges do not span the graph");
  return t;
}

double compatibility_tolerance(const VertexFunction& f) { return 1e-10 * std::max(1.0, norm2(f)); }

void check_compatible(const VertexFunction& f) {
  const double s = sum(f);
  if (std::abs(s) > compatibility_tolerance(f))
    throw Error(ErrorKind::IncompatibleRHS,
                "right-hand side sums to " + std::to_string(s) + "; it must be orthogonal to constants");
}

EdgeFlow tree_flow(const Graph& g, const SpanningTree& t, const VertexFunction& f, WorkCounter* counter) {
  check_vertex_size(g, f, "right-hand side");
  check_compatible(f);
  EdgeFlow flow(g.num_edges());
  std::vector<double> subtree(f.begin(), f.end());
  for (std::size_t k = t.order.size(); k-- > 1;) {
    const int v = t.order[k];
    const int e = t.parent_edge[v];
    // The subtree below v must push out exactly its total supply.
    const int sign = g.edge(e).hi == v ? 1 : -1;
    flow[e] = sign * subtree[v];
    subtree[t.parent[v]] += subtree[v];
  }
  if (counter) counter->steps += t.order.size();
  return flow;
}

VertexFunction tree_potential(const Graph& g, const SpanningTree& t, const EdgeFlow& flow) {
  check_edge_size(g, flow, "tree flow");
  VertexFunction x(g.num_vertices());
  for (std::size_t k = 1; k < t.order.size(); ++k) {
    const int v = t.order[k];
    const int e = t.parent_edge[v];
    const double drop = flow[e] / g.weight(e);
    x[v] = g.edge(e).hi == v ? x[t.parent[v]] + drop : x[t.parent[v]] - drop;
  }
  return x;
}

TreeFlowResult compute_tau_f(const Graph& g, const VertexFunction& f, int root, WorkCounter* counter) {
  check_vertex_size(g, f, "right-hand side");
  check_compatible(f);
  SpanningTree tree = bfs_tree(g, root, counter);
  EdgeFlow tau_f = tree_flow(g, tree, f, counter);
  return {std::move(tau_f), std::move(tree)};
}

}  // namespace lapest
