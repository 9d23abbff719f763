#include "lapest/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "lapest/error.hpp"
#include "lapest/spanning_tree.hpp"

namespace lapest {

double membership_tolerance(const VertexFunction& f) { return 1e-9 * std::max(1.0, norm2(f)); }

double global_psi(const Graph& g, const VertexFunction& v, const EdgeFlow& tau) {
  check_edge_size(g, tau, "flow");
  return dinv_norm(g, scale_by_weights(g, gradient(g, v)) - tau);
}

EdgeFlow localize(const Graph& g, const EdgeFlow& residual) {
  check_edge_size(g, residual, "residual");
  EdgeFlow out(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) out[e] = std::abs(residual[e]) / std::sqrt(g.weight(e));
  return out;
}

EdgeFlow local_psi(const Graph& g, const VertexFunction& v, const EdgeFlow& tau) {
  check_edge_size(g, tau, "flow");
  return localize(g, scale_by_weights(g, gradient(g, v)) - tau);
}

double efficiency_index(double psi, double true_error) {
  if (!(true_error > 0.0)) throw Error(ErrorKind::ZeroTrueError, "true error is zero; efficiency is undefined");
  return psi / true_error;
}

double hypercircle_check(const Graph& g, const VertexFunction& u, const VertexFunction& v, const VertexFunction& f,
                         const EdgeFlow& tau) {
  const double div_res = norm2(divergence(g, tau) - f);
  if (div_res > membership_tolerance(f))
    throw Error(ErrorKind::NotInWf, "flow divergence misses f by " + std::to_string(div_res));
  const double err = l_seminorm(g, u - v);
  const double exact_part = dinv_norm(g, scale_by_weights(g, gradient(g, u)) - tau);
  const double rhs = global_psi(g, v, tau);
  const double lhs_sq = err * err + exact_part * exact_part;
  const double rhs_sq = rhs * rhs;
  return std::abs(lhs_sq - rhs_sq) / std::max(1.0, rhs_sq);
}

ErrorEstimate error_estimate(const Graph& g, const VertexFunction& v, const VertexFunction& f,
                             const EstimatorConfig& config, std::span<const Point> coords) {
  check_vertex_size(g, v, "approximate solution");
  check_vertex_size(g, f, "right-hand side");
  if (config.sweeps < 0) throw Error(ErrorKind::InvalidArgument, "sweep count must be nonnegative");

  TreeFlowResult tf = compute_tau_f(g, f, config.root);
  const EdgeFlow r0 = scale_by_weights(g, gradient(g, v)) - tf.tau_f;

  const CycleBasis basis = config.basis == BasisKind::Face ? face_cycle_basis(g, coords)
                                                           : fundamental_cycle_basis(g, tf.tree);
  ErrorEstimate est;
  EdgeFlow tau0(g.num_edges());
  if (config.solver == CycleSolver::Exact) {
    ExactMinimization ex = exact_cycle_minimizer(g, basis, r0);
    tau0 = std::move(ex.tau0);
    est.trace = {dinv_norm(g, r0), ex.objective};
  } else if (!basis.cycles.empty()) {
    const SubspaceDecomposition dec = vertex_subspaces(basis, g, config.decomposition);
    SchwarzOptions opts;
    opts.max_sweeps = config.sweeps;
    opts.order = config.order;
    opts.seed = config.seed;
    CycleMinimization cm = minimize_cycle_component(g, basis, dec, r0, opts);
    tau0 = std::move(cm.tau0);
    est.trace = std::move(cm.trace);
    est.sweeps = cm.sweeps;
  } else {
    est.trace = {dinv_norm(g, r0)};
  }

  est.tau = tf.tau_f + tau0;
  // Recompute from tau rather than trusting the incrementally kept residual.
  est.residual = scale_by_weights(g, gradient(g, v)) - est.tau;
  est.psi = dinv_norm(g, est.residual);
  est.per_edge = localize(g, est.residual);
  est.divergence_residual = norm2(divergence(g, est.tau) - f);
  return est;
}

}  // namespace lapest
