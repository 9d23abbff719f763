#pragma once

#include <cstdint>
#include <vector>

#include "lapest/graph.hpp"

namespace lapest {

/// k forward sweeps of v_i <- (f_i + sum_j w_ij v_j) / d_i.
VertexFunction gauss_seidel(const Graph& g, const VertexFunction& f, const VertexFunction& v0, int sweeps);

/// Uniform [0, 1) entries from a seeded generator, then mean-subtracted.
VertexFunction random_initial_guess(std::size_t n, std::uint64_t seed);

/// Mean-zero solution of L u = f with ||L u - f|| <= tolerance * ||f||.
/// Dense grounded Cholesky for n <= 2000, conjugate gradients beyond.
VertexFunction reference_solution(const Graph& g, const VertexFunction& f, double tolerance = 1e-10);

/// sqrt of the smallest nonzero Laplacian eigenvalue (n <= 2000).
double poincare_constant(const Graph& g);

/// ||DGv - tau||_{D^{-1}} + ||G^T tau - f|| / cp.
double eta(const Graph& g, const VertexFunction& v, const VertexFunction& f, const EdgeFlow& tau, double cp);

/// E(beta, tau) = (1 + beta) A + (1 + 1/beta) B with A = ||DGv - tau||^2_{D^{-1}}
/// and B = cp^{-2} ||G^T tau - f||^2.
double bound_energy(const Graph& g, const VertexFunction& v, const VertexFunction& f, const EdgeFlow& tau, double beta,
                    double cp);

/// argmin over beta > 0 of (1 + beta) a_sq + (1 + 1/beta) b_sq, i.e.
/// sqrt(b_sq / a_sq). Throws DegenerateBeta when either term vanishes.
double beta_step(double a_sq, double b_sq);

/// argmin over tau of E(beta, tau): a weighted least-squares problem solved
/// through the n x n system I/b + L/a (Woodbury identity).
EdgeFlow tau_step(const Graph& g, const VertexFunction& v, const VertexFunction& f, double beta, double cp);

struct BoundState {
  double beta = 1.0;
  EdgeFlow tau;
  double cp = 1.0;
  double energy = 0.0;  // E(beta, tau), or its infimum over beta when degenerate
  int iterations = 0;
  bool degenerate = false;
  std::vector<double> trace;  // energy after every half-step
};

/// Alternating minimization of E over tau and beta starting from beta = 1.
BoundState minimize_bound_alternating(const Graph& g, const VertexFunction& v, const VertexFunction& f, int max_iter,
                                      double beta0 = 1.0);

}  // namespace lapest
