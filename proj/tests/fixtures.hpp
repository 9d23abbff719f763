#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "lapest/cycle_space.hpp"
#include "lapest/graph.hpp"
#include "lapest/io.hpp"

namespace lapest::testing {

// K3 with unit weights: e1={2,1}, e2={3,1}, e3={3,2}; f = (1,-1,0).
inline Graph k3() {
  const std::vector<RawEdge> raw{{2, 1, 1.0}, {3, 1, 1.0}, {3, 2, 1.0}};
  return validate_graph(raw, 3);
}

inline VertexFunction k3_rhs() { return VertexFunction(std::vector<double>{1.0, -1.0, 0.0}); }

inline Graph path3() {
  const std::vector<RawEdge> raw{{2, 1, 1.0}, {3, 2, 1.0}};
  return validate_graph(raw, 3);
}

inline VertexFunction random_vertex(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VertexFunction v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline EdgeFlow random_edge(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  EdgeFlow t(m);
  for (double& x : t) x = d(rng);
  return t;
}

inline VertexFunction random_compatible(std::size_t n, std::mt19937_64& rng) {
  VertexFunction f = random_vertex(n, rng);
  const double mean = sum(f) / static_cast<double>(n);
  for (double& x : f) x -= mean;
  return f;
}

// Dense incidence matrix G (m x n), assembled straight from the definition.
inline Eigen::MatrixXd dense_gradient(const Graph& g) {
  Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_edges()),
                                             static_cast<Eigen::Index>(g.num_vertices()));
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    gm(static_cast<Eigen::Index>(e), g.edge(e).hi) = 1.0;
    gm(static_cast<Eigen::Index>(e), g.edge(e).lo) = -1.0;
  }
  return gm;
}

inline Eigen::VectorXd weights(const Graph& g) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.num_edges()));
  for (std::size_t e = 0; e < g.num_edges(); ++e) w(static_cast<Eigen::Index>(e)) = g.weight(e);
  return w;
}

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
  const Eigen::MatrixXd gm = dense_gradient(g);
  return gm.transpose() * weights(g).asDiagonal() * gm;
}

template <class Tag>
Eigen::VectorXd to_eigen(const TaggedVector<Tag>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.span().data(), static_cast<Eigen::Index>(v.size()));
}

// Pseudo-inverse solve of L u = f, mean-zero; independent of the library's
// grounded Cholesky route.
inline VertexFunction pinv_solve(const Graph& g, const VertexFunction& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_laplacian(g));
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * to_eigen(f);
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(proj.size());
  for (Eigen::Index k = 1; k < proj.size(); ++k) coef(k) = proj(k) / eig.eigenvalues()(k);
  const Eigen::VectorXd u = eig.eigenvectors() * coef;
  return VertexFunction(std::vector<double>(u.data(), u.data() + u.size()));
}

// Dense D^{-1}-weighted least squares over the basis via complete orthogonal
// decomposition: returns min_alpha ||r0 - C alpha||_{D^{-1}}.
inline double dense_cycle_objective(const Graph& g, const CycleBasis& basis, const EdgeFlow& r0) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_edges()),
                                            static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (const CycleEntry& en : basis.cycles[k].entries) c(en.edge, static_cast<Eigen::Index>(k)) = en.coef;
  const Eigen::VectorXd s = weights(g).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd a = s.asDiagonal() * c;
  const Eigen::VectorXd b = s.asDiagonal() * to_eigen(r0);
  if (basis.size() == 0) return b.norm();
  const Eigen::VectorXd alpha = a.completeOrthogonalDecomposition().solve(b);
  return (b - a * alpha).norm();
}

}  // namespace lapest::testing
