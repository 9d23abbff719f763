#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lapest/cycle_space.hpp"
#include "lapest/graph.hpp"
#include "lapest/schwarz.hpp"

namespace lapest {

enum class BasisKind { Fundamental, Face };

enum class CycleSolver { Schwarz, Exact };

struct EstimatorConfig {
  BasisKind basis = BasisKind::Fundamental;
  DecompositionMode decomposition = DecompositionMode::Vertex;
  CycleSolver solver = CycleSolver::Schwarz;
  int sweeps = 3;
  int root = 0;  // 0-based
  SweepOrder order = SweepOrder::Ascending;
  std::uint64_t seed = 0;
};

struct ErrorEstimate {
  double psi = 0.0;
  EdgeFlow per_edge;  // psi_e
  EdgeFlow tau;       // tau_f + tau_0, divergence f
  EdgeFlow residual;  // D G v - tau
  int sweeps = 0;
  double divergence_residual = 0.0;  // ||G^T tau - f||
  std::vector<double> trace;         // Schwarz objective per sweep
  std::optional<double> true_error;
};

/// ||DGv - tau||_{D^{-1}}.
double global_psi(const Graph& g, const VertexFunction& v, const EdgeFlow& tau);

/// w_e^{-1/2} |(DGv - tau)_e| for every edge.
EdgeFlow local_psi(const Graph& g, const VertexFunction& v, const EdgeFlow& tau);

/// Same localization from an already formed residual DGv - tau.
EdgeFlow localize(const Graph& g, const EdgeFlow& residual);

/// psi / true_error; throws ZeroTrueError when the true error is zero.
double efficiency_index(double psi, double true_error);

/// |(||u-v||_L^2 + ||DGu - tau||^2) - ||DGv - tau||^2| / max(1, ||DGv - tau||^2).
/// Throws NotInWf if G^T tau is not f to 1e-9 * max(1, ||f||).
double hypercircle_check(const Graph& g, const VertexFunction& u, const VertexFunction& v, const VertexFunction& f,
                         const EdgeFlow& tau);

/// Certified upper bound on ||u - v||_L: tree flow for the divergence, then
/// an (approximate) cycle-space correction, then psi and its localization.
/// `coords` is only needed for the face basis.
ErrorEstimate error_estimate(const Graph& g, const VertexFunction& v, const VertexFunction& f,
                             const EstimatorConfig& config, std::span<const Point> coords = {});

/// Divergence tolerance certifying tau in W(f).
double membership_tolerance(const VertexFunction& f);

}  // namespace lapest
