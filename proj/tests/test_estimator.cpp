#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lapest/baseline.hpp"
#include "lapest/error.hpp"
#include "lapest/estimator.hpp"
#include "lapest/io.hpp"
#include "lapest/spanning_tree.hpp"

using namespace lapest;
using namespace lapest::testing;

TEST_CASE("K3 estimate after one sweep is exact") {
  const Graph g = k3();
  EstimatorConfig cfg;
  cfg.sweeps = 1;
  const ErrorEstimate est = error_estimate(g, VertexFunction(3), k3_rhs(), cfg);
  CHECK(est.psi == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  const double truth = l_seminorm(g, VertexFunction(std::vector<double>{1.0 / 3, -1.0 / 3, 0}));
  CHECK(efficiency_index(est.psi, truth) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.per_edge[0] == doctest::Approx(2.0 / 3.0));
  CHECK(est.per_edge[1] == doctest::Approx(1.0 / 3.0));
  CHECK(est.per_edge[2] == doctest::Approx(1.0 / 3.0));
  CHECK(est.divergence_residual <= 1e-15);
  CHECK(est.sweeps == 1);
}

TEST_CASE("exact oracle at v = u gives zero") {
  std::mt19937_64 rng(1);
  const Graph g = random_connected_graph(40, 50, 0.5, 4.0, 12);
  const VertexFunction f = random_compatible(g.num_vertices(), rng);
  const VertexFunction u = reference_solution(g, f);
  EstimatorConfig cfg;
  cfg.solver = CycleSolver::Exact;
  const ErrorEstimate est = error_estimate(g, u, f, cfg);
  CHECK(est.psi <= 1e-9);
}

TEST_CASE("global_psi and local_psi") {
  const Graph g = k3();
  const VertexFunction v(std::vector<double>{0.3, -0.2, 1.0});
  CHECK(global_psi(g, v, scale_by_weights(g, gradient(g, v))) == 0.0);
  const EdgeFlow tau_f = compute_tau_f(g, k3_rhs()).tau_f;
  CHECK(global_psi(g, VertexFunction(3), tau_f) == doctest::Approx(1.0));
  CHECK_THROWS_AS(global_psi(g, v, EdgeFlow(2)), Error);
  CHECK_THROWS_AS(local_psi(g, v, EdgeFlow(4)), Error);

  const Graph heavy = validate_graph(std::vector<RawEdge>{{2, 1, 4.0}}, 2);
  // residual = 4 * (0 - 0) - (-2) = 2 on an edge of weight 4.
  CHECK(local_psi(heavy, VertexFunction(2), EdgeFlow(std::vector<double>{-2.0}))[0] == doctest::Approx(1.0));

  std::mt19937_64 rng(8);
  const Graph rg = random_connected_graph(30, 30, 0.1, 9.0, 8);
  const VertexFunction rv = random_vertex(rg.num_vertices(), rng);
  const EdgeFlow rt = random_edge(rg.num_edges(), rng);
  const EdgeFlow loc = local_psi(rg, rv, rt);
  const double psi = global_psi(rg, rv, rt);
  CHECK(std::abs(dot(loc, loc) - psi * psi) <= 1e-12 * psi * psi);
}

TEST_CASE("efficiency_index") {
  CHECK(efficiency_index(2.0, 2.0) == 1.0);
  CHECK(efficiency_index(3.0, 2.0) == 1.5);
  CHECK_THROWS_AS(efficiency_index(1.0, 0.0), Error);
}

TEST_CASE("hypercircle identity") {
  const Graph g = k3();
  const VertexFunction u(std::vector<double>{1.0 / 3, -1.0 / 3, 0});
  const EdgeFlow tau_f = compute_tau_f(g, k3_rhs()).tau_f;
  CHECK(hypercircle_check(g, u, VertexFunction(3), k3_rhs(), tau_f) <= 1e-12);
  CHECK(hypercircle_check(g, u, u, k3_rhs(), tau_f) <= 1e-15);
  CHECK_THROWS_AS(hypercircle_check(g, u, VertexFunction(3), k3_rhs(), EdgeFlow(3)), Error);

  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 25; ++trial) {
    const Graph rg = random_connected_graph(8 + trial, 10 + trial, 0.1, 10.0, 60 + trial);
    const VertexFunction f = random_compatible(rg.num_vertices(), rng);
    const VertexFunction ru = pinv_solve(rg, f);
    const TreeFlowResult tf = compute_tau_f(rg, f);
    const CycleBasis basis = fundamental_cycle_basis(rg, tf.tree);
    EdgeFlow tau = tf.tau_f;
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (const CycleVector& c : basis.cycles) tau += coef(rng) * c.densify(rg.num_edges());
    CHECK(hypercircle_check(rg, ru, random_vertex(rg.num_vertices(), rng), f, tau) <= 1e-10);
  }
}

TEST_CASE("estimator properties on random graphs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 20 + 10 * trial;
    const Graph g = random_connected_graph(n, n / 2 + 5 * trial, 0.1, 10.0, 800 + trial);
    const VertexFunction f = random_compatible(g.num_vertices(), rng);
    const VertexFunction u = reference_solution(g, f);
    const VertexFunction v = gauss_seidel(g, f, random_initial_guess(g.num_vertices(), trial), 3);
    const double truth = l_seminorm(g, u - v);

    double previous = 1e300;
    EstimatorConfig cfg;
    for (int sweeps = 0; sweeps <= 5; ++sweeps) {
      cfg.sweeps = sweeps;
      const ErrorEstimate est = error_estimate(g, v, f, cfg);
      CHECK(est.psi >= truth - 1e-9 * est.psi);
      CHECK(est.psi <= previous + 1e-12);
      CHECK(est.divergence_residual <= membership_tolerance(f));
      CHECK(std::abs(dot(est.per_edge, est.per_edge) - est.psi * est.psi) <= 1e-12 * est.psi * est.psi);
      previous = est.psi;

      // Shift invariance.
      const ErrorEstimate shifted = error_estimate(g, v + VertexFunction(g.num_vertices(), 3.25), f, cfg);
      CHECK(std::abs(shifted.psi - est.psi) <= 1e-12 * std::max(1.0, est.psi));
    }
    cfg.solver = CycleSolver::Exact;
    const ErrorEstimate exact = error_estimate(g, v, f, cfg);
    CHECK(std::abs(efficiency_index(exact.psi, truth) - 1.0) <= 1e-6);
  }
}

TEST_CASE("face basis estimate on the level-5 grid") {
  const GridGraph grid = uniform_grid(5);
  const SampledProblem prob = sample_and_rhs(grid.graph, grid.coords, sine_field);
  EstimatorConfig cfg;
  cfg.basis = BasisKind::Face;
  cfg.sweeps = 3;
  const ErrorEstimate est = error_estimate(grid.graph, VertexFunction(grid.graph.num_vertices()), prob.f, cfg, grid.coords);
  const double truth = l_seminorm(grid.graph, prob.u);
  CHECK(est.psi == doctest::Approx(1.99).epsilon(0.01));
  CHECK(efficiency_index(est.psi, truth) == doctest::Approx(1.15).epsilon(0.01));
  CHECK_THROWS_AS(error_estimate(grid.graph, VertexFunction(grid.graph.num_vertices()), prob.f, cfg), Error);
}

TEST_CASE("estimate on a tree needs no cycle solve") {
  const Graph p = path3();
  const VertexFunction f(std::vector<double>{1, 0, -1});
  EstimatorConfig cfg;
  const ErrorEstimate est = error_estimate(p, VertexFunction(3), f, cfg);
  CHECK(est.psi == doctest::Approx(l_seminorm(p, pinv_solve(p, f))).epsilon(1e-12));
}
