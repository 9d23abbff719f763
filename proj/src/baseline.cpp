#include "lapest/baseline.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <random>

#include "lapest/error.hpp"
#include "lapest/spanning_tree.hpp"

namespace lapest {

namespace {

constexpr std::size_t kDenseLimit = 2000;

Eigen::MatrixXd dense_laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    lap(e.hi, e.hi) += e.weight;
    lap(e.lo, e.lo) += e.weight;
    lap(e.hi, e.lo) -= e.weight;
    lap(e.lo, e.hi) -= e.weight;
  }
  return lap;
}

Eigen::SparseMatrix<double> sparse_laplacian(const Graph& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * g.num_edges());
  for (const Edge& e : g.edges()) {
    t.emplace_back(e.hi, e.hi, e.weight);
    t.emplace_back(e.lo, e.lo, e.weight);
    t.emplace_back(e.hi, e.lo, -e.weight);
    t.emplace_back(e.lo, e.hi, -e.weight);
  }
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(t.begin(), t.end());
  return lap;
}

void subtract_mean(VertexFunction& u) {
  const double mean = sum(u) / static_cast<double>(u.size());
  for (double& x : u) x -= mean;
}

}  // namespace

VertexFunction gauss_seidel(const Graph& g, const VertexFunction& f, const VertexFunction& v0, int sweeps) {
  check_vertex_size(g, f, "right-hand side");
  check_vertex_size(g, v0, "initial guess");
  if (sweeps < 0) throw Error(ErrorKind::InvalidArgument, "Gauss-Seidel sweep count must be nonnegative");
  VertexFunction v = v0;
  for (int k = 0; k < sweeps; ++k) {
    for (std::size_t i = 0; i < g.num_vertices(); ++i) {
      double acc = f[i];
      double diag = 0.0;
      for (const Incidence& inc : g.incidences(i)) {
        const double w = g.weight(inc.edge);
        acc += w * v[inc.neighbor];
        diag += w;
      }
      v[i] = acc / diag;
    }
  }
  return v;
}

VertexFunction random_initial_guess(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  VertexFunction v(n);
  for (double& x : v) x = dist(rng);
  subtract_mean(v);
  return v;
}

VertexFunction reference_solution(const Graph& g, const VertexFunction& f, double tolerance) {
  check_vertex_size(g, f, "right-hand side");
  check_compatible(f);
  const std::size_t n = g.num_vertices();
  const double fnorm = norm2(f);
  VertexFunction u(n);
  if (fnorm == 0.0) return u;

  if (n <= kDenseLimit) {
    // Pin vertex 1 to zero; the reduced Laplacian of a connected graph is SPD.
    const Eigen::MatrixXd lap = dense_laplacian(g);
    const auto m = static_cast<Eigen::Index>(n - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(lap.bottomRightCorner(m, m));
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "grounded Laplacian is not SPD");
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) rhs(i) = f[static_cast<std::size_t>(i) + 1];
    Eigen::VectorXd x = llt.solve(rhs);
    // Two rounds of iterative refinement against the reduced system.
    for (int round = 0; round < 2; ++round) x += llt.solve(rhs - lap.bottomRightCorner(m, m) * x);
    for (Eigen::Index i = 0; i < m; ++i) u[static_cast<std::size_t>(i) + 1] = x(i);
  } else {
    const Eigen::SparseMatrix<double> lap = sparse_laplacian(g);
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(lap);
    cg.setTolerance(std::min(1e-12, tolerance * 0.1));
    cg.setMaxIterations(static_cast<Eigen::Index>(20 * n));
    Eigen::Map<const Eigen::VectorXd> rhs(f.span().data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd x = cg.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) u[i] = x(static_cast<Eigen::Index>(i));
  }
  subtract_mean(u);
  const double res = norm2(apply_laplacian(g, u) - f);
  if (!(res <= tolerance * fnorm))
    throw Error(ErrorKind::NoConvergence, "reference solve residual " + std::to_string(res / fnorm) +
                                              " exceeds tolerance " + std::to_string(tolerance));
  return u;
}

double poincare_constant(const Graph& g) {
  if (g.num_vertices() > kDenseLimit)
    throw Error(ErrorKind::TooLarge, "Poincare constant needs a dense eigensolve; limited to 2000 vertices");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_laplacian(g), Eigen::EigenvaluesOnly);
  // Eigenvalues ascend; index 0 is the constant mode of a connected graph.
  return std::sqrt(eig.eigenvalues()(1));
}

double eta(const Graph& g, const VertexFunction& v, const VertexFunction& f, const EdgeFlow& tau, double cp) {
  check_vertex_size(g, f, "right-hand side");
  const EdgeFlow r = scale_by_weights(g, gradient(g, v)) - tau;
  return dinv_norm(g, r) + norm2(divergence(g, tau) - f) / cp;
}

namespace {

struct Terms {
  double a_sq;
  double b_sq;
};

Terms bound_terms(const Graph& g, const VertexFunction& v, const VertexFunction& f, const EdgeFlow& tau, double cp) {
  const EdgeFlow r = scale_by_weights(g, gradient(g, v)) - tau;
  const double a = dinv_norm(g, r);
  const double b = norm2(divergence(g, tau) - f) / cp;
  return {a * a, b * b};
}

}  // namespace

double bound_energy(const Graph& g, const VertexFunction& v, const VertexFunction& f, const EdgeFlow& tau, double beta,
                    double cp) {
  const Terms t = bound_terms(g, v, f, tau, cp);
  return (1.0 + beta) * t.a_sq + (1.0 + 1.0 / beta) * t.b_sq;
}

double beta_step(double a_sq, double b_sq) {
  const double a = std::sqrt(std::max(0.0, a_sq));
  const double b = std::sqrt(std::max(0.0, b_sq));
  if (std::min(a, b) <= 1e-12 * std::max({1.0, a, b}))
    throw Error(ErrorKind::DegenerateBeta, a <= b ? "flux term vanished" : "divergence term vanished");
  return b / a;
}

EdgeFlow tau_step(const Graph& g, const VertexFunction& v, const VertexFunction& f, double beta, double cp) {
  if (g.num_vertices() > kDenseLimit)
    throw Error(ErrorKind::TooLarge, "alternating bound minimization is limited to 2000 vertices");
  const double a = 1.0 + beta;
  const double b = (1.0 + 1.0 / beta) / (cp * cp);
  // (a D^{-1} + b G G^T) tau = a G v + b G f
  const EdgeFlow y = a * gradient(g, v) + b * gradient(g, f);

  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd k = dense_laplacian(g) / a;
  k.diagonal().array() += 1.0 / b;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);

  auto woodbury = [&](const EdgeFlow& rhs) {
    const EdgeFlow z = (1.0 / a) * scale_by_weights(g, rhs);
    const VertexFunction s = divergence(g, z);
    Eigen::Map<const Eigen::VectorXd> s_vec(s.span().data(), n);
    const Eigen::VectorXd t = llt.solve(s_vec);
    VertexFunction tv(g.num_vertices());
    for (Eigen::Index i = 0; i < n; ++i) tv[static_cast<std::size_t>(i)] = t(i);
    return z - (1.0 / a) * scale_by_weights(g, gradient(g, tv));
  };
  auto apply = [&](const EdgeFlow& tau) {
    EdgeFlow out = b * gradient(g, divergence(g, tau));
    for (std::size_t e = 0; e < out.size(); ++e) out[e] += a * tau[e] / g.weight(static_cast<int>(e));
    return out;
  };

  EdgeFlow tau = woodbury(y);
  for (int round = 0; round < 3; ++round) tau += woodbury(y - apply(tau));
  return tau;
}

BoundState minimize_bound_alternating(const Graph& g, const VertexFunction& v, const VertexFunction& f, int max_iter,
                                      double beta0) {
  check_vertex_size(g, v, "approximate solution");
  check_vertex_size(g, f, "right-hand side");
  if (!(beta0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  BoundState st;
  st.cp = poincare_constant(g);
  st.beta = beta0;
  st.tau = EdgeFlow(g.num_edges());
  st.energy = bound_energy(g, v, f, st.tau, st.beta, st.cp);
  st.trace.push_back(st.energy);
  for (int k = 0; k < max_iter; ++k) {
    EdgeFlow tau = tau_step(g, v, f, st.beta, st.cp);
    const Terms t = bound_terms(g, v, f, tau, st.cp);
    const double energy = (1.0 + st.beta) * t.a_sq + (1.0 + 1.0 / st.beta) * t.b_sq;
    // Rounding floor reached.
    if (k > 0 && energy >= st.energy) break;
    st.tau = std::move(tau);
    st.energy = energy;
    st.trace.push_back(st.energy);
    st.iterations = k + 1;
    try {
      st.beta = beta_step(t.a_sq, t.b_sq);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::DegenerateBeta) throw;
      // Infimum over beta of (1+beta) A + (1+1/beta) B.
      const double s = std::sqrt(t.a_sq) + std::sqrt(t.b_sq);
      st.energy = s * s;
      st.trace.push_back(st.energy);
      st.degenerate = true;
      break;
    }
    st.energy = (1.0 + st.beta) * t.a_sq + (1.0 + 1.0 / st.beta) * t.b_sq;
    st.trace.push_back(st.energy);
  }
  return st;
}

}  // namespace lapest
