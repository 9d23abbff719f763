#include "lapest/schwarz.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lapest/error.hpp"

namespace lapest {

namespace {

// Jacobi-preconditioned CG from zero. Every iterate lowers the quadratic
// objective, so stopping early never undoes progress. Returns the final
// relative residual through `rel_residual`.
template <class Apply>
Eigen::VectorXd pcg(const Apply& apply, const Eigen::VectorXd& inv_diag, const Eigen::VectorXd& rhs, double tol,
                    Eigen::Index max_iter, double* rel_residual = nullptr) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double rhs_sq = rhs.squaredNorm();
  const double stop = tol * tol * rhs_sq;
  for (Eigen::Index it = 0; it < max_iter && r.squaredNorm() > stop; ++it) {
    const Eigen::VectorXd q = apply(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;
    const double step = rz / pq;
    x += step * p;
    r -= step * q;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  if (rel_residual) *rel_residual = rhs_sq > 0.0 ? std::sqrt(r.squaredNorm() / rhs_sq) : 0.0;
  return x;
}

}  // namespace

namespace {

// x <- (L L^T)^{-1} x with L lower triangular, packed column by column.
void packed_cholesky_solve(const double* l, double* x, std::size_t d) {
  const double* col = l;
  for (std::size_t k = 0; k < d; ++k) {
    const double xk = x[k] / col[0];
    x[k] = xk;
    for (std::size_t i = k + 1; i < d; ++i) x[i] -= col[i - k] * xk;
    col += d - k;
  }
  for (std::size_t i = d; i-- > 0;) {
    col -= d - i;
    double xi = x[i];
    for (std::size_t k = i + 1; k < d; ++k) xi -= col[k - i] * x[k];
    x[i] = xi / col[0];
  }
}

// Dense M written to `out` (d x d, column-major), accumulated edge by edge so
// the cost is the sum over local edges of (cycles through the edge)^2.
void form_gram(std::span<const int> entry_offsets, std::span<const int> entry_edge,
               std::span<const std::int8_t> entry_coef, std::span<const int> edges, const double* inv_weight,
               double* out) {
  const auto d = static_cast<Eigen::Index>(entry_offsets.size()) - 1;
  const std::size_t le = edges.size();
  thread_local std::vector<int> start, fill, by_cycle, by_coef;
  start.assign(le + 1, 0);
  for (int e : entry_edge) ++start[static_cast<std::size_t>(e) + 1];
  for (std::size_t k = 0; k < le; ++k) start[k + 1] += start[k];
  fill.assign(start.begin(), start.end() - 1);
  by_cycle.resize(entry_edge.size());
  by_coef.resize(entry_edge.size());
  for (Eigen::Index j = 0; j < d; ++j)
    for (int p = entry_offsets[j]; p < entry_offsets[j + 1]; ++p) {
      const int slot = fill[static_cast<std::size_t>(entry_edge[p])]++;
      by_cycle[slot] = static_cast<int>(j);
      by_coef[slot] = entry_coef[p];
    }
  Eigen::Map<Eigen::MatrixXd> m(out, d, d);
  m.setZero();
  for (std::size_t k = 0; k < le; ++k)
    for (int a = start[k]; a < start[k + 1]; ++a)
      for (int b = start[k]; b < start[k + 1]; ++b)
        m(by_cycle[a], by_cycle[b]) += by_coef[a] * by_coef[b] * inv_weight[edges[k]];
}

}  // namespace

Eigen::MatrixXd LocalGram::gram() const {
  const auto d = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd m(d, d);
  form_gram(entry_offsets, entry_edge, entry_coef, edges, inv_weight, m.data());
  return m;
}

Eigen::VectorXd LocalGram::apply(const Eigen::VectorXd& x) const {
  thread_local std::vector<double> t;
  t.assign(edges.size(), 0.0);
  const auto d = static_cast<Eigen::Index>(size());
  for (Eigen::Index j = 0; j < d; ++j)
    for (int p = entry_offsets[j]; p < entry_offsets[j + 1]; ++p) t[entry_edge[p]] += x(j) * entry_coef[p];
  for (std::size_t k = 0; k < t.size(); ++k) t[k] *= inv_weight[edges[k]];
  Eigen::VectorXd y(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int p = entry_offsets[j]; p < entry_offsets[j + 1]; ++p) acc += entry_coef[p] * t[entry_edge[p]];
    y(j) = acc;
  }
  return y;
}

void LocalGram::solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const {
  const auto d = static_cast<Eigen::Index>(size());
  switch (method) {
    case Method::Cholesky: {
      if (x.innerStride() == 1) {
        packed_cholesky_solve(factor, x.data(), static_cast<std::size_t>(d));
      } else {
        Eigen::VectorXd y = x;
        packed_cholesky_solve(factor, y.data(), static_cast<std::size_t>(d));
        x = y;
      }
      return;
    }
    case Method::Pseudo: {
      const Eigen::Map<const Eigen::MatrixXd> pinv(factor, d, d);
      const Eigen::VectorXd y = pinv * x;
      x = y;
      return;
    }
    case Method::Iterative: {
      const Eigen::Map<const Eigen::VectorXd> diag(inv_diag.data(), d);
      const auto max_iter = std::min<Eigen::Index>(10 * d + 100, 2000);
      x = pcg([this](const Eigen::VectorXd& v) { return apply(v); }, diag, x, 1e-12, max_iter);
      return;
    }
  }
}

Eigen::VectorXd LocalGram::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = rhs;
  solve_in_place(x);
  return x;
}

namespace {


// Overwrites the d x d Gram matrix at `m` with its lower Cholesky factor, or
// with its pseudo-inverse when it is numerically singular.
LocalGram::Method factorize(const LocalGram& lg, double* m, bool allow_pseudo) {
  const auto d = static_cast<Eigen::Index>(lg.size());
  Eigen::Map<Eigen::MatrixXd> a(m, d, d);
  const double cutoff = 1e-12 * a.diagonal().maxCoeff();
  const Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(a);
  bool ok = llt.info() == Eigen::Success;
  for (Eigen::Index k = 0; ok && k < d; ++k) {
    const double pivot = a(k, k);
    if (pivot * pivot <= cutoff) ok = false;
  }
  if (ok) {
    // Pack the lower triangle column by column; columns only move forward.
    double* out = m;
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index i = k; i < d; ++i) *out++ = a(i, k);
    return LocalGram::Method::Cholesky;
  }
  if (!allow_pseudo)
    throw Error(ErrorKind::SingularLocalSystem,
                "Gram matrix of a subspace with " + std::to_string(d) + " cycles is singular");
  const Eigen::MatrixXd gram = lg.gram();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  Eigen::VectorXd inv = eig.eigenvalues();
  for (Eigen::Index k = 0; k < inv.size(); ++k) inv(k) = inv(k) > cutoff ? 1.0 / inv(k) : 0.0;
  a = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return LocalGram::Method::Pseudo;
}

}  // namespace

LocalGram LocalSystems::operator[](std::size_t k) const {
  const std::size_t d = cycle_start_[k + 1] - cycle_start_[k];
  const std::size_t entries = entry_start_[k + 1] - entry_start_[k];
  LocalGram v;
  v.cycles = {cycles_.data() + cycle_start_[k], d};
  v.edges = {edges_.data() + edge_start_[k], edge_start_[k + 1] - edge_start_[k]};
  v.inv_weight = inv_weight_.data();
  v.entry_offsets = {entry_offsets_.data() + cycle_start_[k] + k, d + 1};
  v.entry_edge = {entry_edge_.data() + entry_start_[k], entries};
  v.entry_coef = {entry_coef_.data() + entry_start_[k], entries};
  v.method = method_[k];
  if (v.iterative())
    v.inv_diag = {factor_.data() + factor_start_[k], d};
  else
    v.factor = factor_.data() + factor_start_[k];
  return v;
}

LocalSystems build_local_systems(const Graph& g, const CycleBasis& basis, const SubspaceDecomposition& decomposition,
                                 bool allow_pseudo, std::size_t dense_limit) {
  LocalSystems ls;
  std::vector<int> local_index(g.num_edges(), -1);

  const std::size_t count = decomposition.subspaces.size();
  std::size_t total_cycles = 0, total_entries = 0, total_factor = 0;
  for (const auto& cycle_ids : decomposition.subspaces) {
    total_cycles += cycle_ids.size();
    for (int c : cycle_ids) total_entries += basis.cycles[c].entries.size();
    total_factor += cycle_ids.size() <= dense_limit ? cycle_ids.size() * (cycle_ids.size() + 1) / 2 : cycle_ids.size();
  }
  ls.cycles_.reserve(total_cycles);
  ls.entry_offsets_.reserve(total_cycles + count);
  ls.edges_.reserve(total_entries);
  ls.entry_edge_.reserve(total_entries);
  ls.entry_coef_.reserve(total_entries);
  ls.factor_.reserve(total_factor);
  for (auto* v : {&ls.cycle_start_, &ls.edge_start_, &ls.entry_start_, &ls.factor_start_}) v->reserve(count + 1);
  ls.method_.reserve(count);
  ls.inv_weight_.resize(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) ls.inv_weight_[e] = 1.0 / g.weight(e);

  for (const auto& cycle_ids : decomposition.subspaces) {
    const std::size_t first_cycle = ls.cycles_.size();
    const std::size_t first_offset = ls.entry_offsets_.size();
    const std::size_t first_entry = ls.entry_edge_.size();
    const std::size_t first_factor = ls.factor_.size();
    ls.cycles_.insert(ls.cycles_.end(), cycle_ids.begin(), cycle_ids.end());

    const std::size_t first_edge = ls.edges_.size();
    for (int c : cycle_ids)
      for (const CycleEntry& en : basis.cycles[c].entries) ls.edges_.push_back(en.edge);
    std::sort(ls.edges_.begin() + static_cast<std::ptrdiff_t>(first_edge), ls.edges_.end());
    ls.edges_.erase(std::unique(ls.edges_.begin() + static_cast<std::ptrdiff_t>(first_edge), ls.edges_.end()),
                    ls.edges_.end());
    const std::size_t le = ls.edges_.size() - first_edge;
    for (std::size_t j = 0; j < le; ++j) local_index[ls.edges_[first_edge + j]] = static_cast<int>(j);

    ls.entry_offsets_.push_back(0);
    int entries = 0;
    for (int c : cycle_ids) {
      for (const CycleEntry& en : basis.cycles[c].entries) {
        ls.entry_edge_.push_back(local_index[en.edge]);
        ls.entry_coef_.push_back(static_cast<std::int8_t>(en.coef));
        ++entries;
      }
      ls.entry_offsets_.push_back(entries);
    }

    const std::size_t d = cycle_ids.size();
    LocalGram view;
    view.cycles = {ls.cycles_.data() + first_cycle, d};
    view.edges = {ls.edges_.data() + first_edge, le};
    view.inv_weight = ls.inv_weight_.data();
    view.entry_offsets = {ls.entry_offsets_.data() + first_offset, d + 1};
    view.entry_edge = {ls.entry_edge_.data() + first_entry, ls.entry_edge_.size() - first_entry};
    view.entry_coef = {ls.entry_coef_.data() + first_entry, ls.entry_coef_.size() - first_entry};
    LocalGram::Method method = LocalGram::Method::Cholesky;
    if (d > dense_limit) {
      method = LocalGram::Method::Iterative;
      for (std::size_t j = 0; j < d; ++j) {
        double diag = 0.0;
        for (int p = view.entry_offsets[j]; p < view.entry_offsets[j + 1]; ++p)
          diag += view.inv_weight[view.edges[view.entry_edge[p]]];
        ls.factor_.push_back(1.0 / diag);
      }
    } else {
      ls.factor_.resize(first_factor + d * d);
      double* m = ls.factor_.data() + first_factor;
      form_gram(view.entry_offsets, view.entry_edge, view.entry_coef, view.edges, view.inv_weight, m);
      method = factorize(view, m, allow_pseudo);
      if (method == LocalGram::Method::Cholesky) ls.factor_.resize(first_factor + d * (d + 1) / 2);
    }
    ls.method_.push_back(method);
    ls.cycle_start_.push_back(ls.cycles_.size());
    ls.edge_start_.push_back(ls.edges_.size());
    ls.entry_start_.push_back(ls.entry_edge_.size());
    ls.factor_start_.push_back(ls.factor_.size());
  }
  return ls;
}

SchwarzState make_state(const Graph& g, const CycleBasis& basis, const EdgeFlow& r0) {
  check_edge_size(g, r0, "initial residual");
  SchwarzState s;
  s.residual = r0;
  s.tau0 = EdgeFlow(g.num_edges());
  s.objective = dinv_norm(g, r0);
  s.alpha.assign(basis.size(), 0.0);
  return s;
}

namespace {

// Local edge values first, then the cycle coefficients.
void solve_with(SchwarzState& state, const LocalGram& local, std::vector<double>& scratch) {
  const std::size_t d = local.size();
  const std::size_t le = local.edges.size();
  if (scratch.size() < le + d) scratch.resize(le + d);
  double* delta = scratch.data();
  double* alpha = delta + le;
  const int* off = local.entry_offsets.data();
  const int* ee = local.entry_edge.data();
  const std::int8_t* ec = local.entry_coef.data();
  const double* iw = local.inv_weight;
  const int* edges = local.edges.data();

  for (std::size_t k = 0; k < le; ++k) delta[k] = state.residual[edges[k]] * iw[edges[k]];
  for (std::size_t j = 0; j < d; ++j) {
    double b = 0.0;
    for (int p = off[j]; p < off[j + 1]; ++p) b += ec[p] * delta[ee[p]];
    alpha[j] = b;
  }

  if (local.method == LocalGram::Method::Cholesky) {
    packed_cholesky_solve(local.factor, alpha, d);
  } else {
    Eigen::Map<Eigen::VectorXd> x(alpha, static_cast<Eigen::Index>(d));
    local.solve_in_place(x);
  }

  std::fill(delta, delta + le, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    state.alpha[local.cycles[j]] += alpha[j];
    for (int p = off[j]; p < off[j + 1]; ++p) delta[ee[p]] += alpha[j] * ec[p];
  }
  double change = 0.0;
  for (std::size_t k = 0; k < le; ++k) {
    const int e = edges[k];
    const double before = state.residual[e];
    const double after = before - delta[k];
    change += (after * after - before * before) * iw[e];
    state.residual[e] = after;
    state.tau0[e] += delta[k];
  }
  state.objective = std::sqrt(std::max(0.0, state.objective * state.objective + change));
}

}  // namespace

void local_solve(SchwarzState& state, const LocalGram& local) {
  std::vector<double> scratch;
  solve_with(state, local, scratch);
}

void schwarz_sweep(const Graph& g, SchwarzState& state, const LocalSystems& locals, std::span<const int> order) {
  std::vector<double> scratch;
  if (order.empty()) {
    for (std::size_t k = 0; k < locals.size(); ++k) solve_with(state, locals[k], scratch);
  } else {
    for (int k : order) solve_with(state, locals[static_cast<std::size_t>(k)], scratch);
  }
  state.objective = dinv_norm(g, state.residual);
  ++state.sweep_count;
}

std::vector<int> sweep_permutation(std::size_t num_subspaces, SweepOrder order, std::uint64_t seed) {
  std::vector<int> perm(num_subspaces);
  std::iota(perm.begin(), perm.end(), 0);
  if (order == SweepOrder::Random) {
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
  }
  return perm;
}

CycleMinimization minimize_cycle_component(const Graph& g, const CycleBasis& basis,
                                           const SubspaceDecomposition& decomposition, const EdgeFlow& r0,
                                           const SchwarzOptions& options) {
  if (options.max_sweeps < 0) throw Error(ErrorKind::InvalidArgument, "sweep count must be nonnegative");
  SchwarzState state = make_state(g, basis, r0);
  CycleMinimization out;
  out.trace.push_back(state.objective);
  if (options.max_sweeps > 0 && !basis.cycles.empty()) {
    const LocalSystems locals = build_local_systems(g, basis, decomposition, options.allow_pseudo, options.dense_limit);
    out.used_pseudo = std::any_of(locals.begin(), locals.end(), [](const LocalGram& lg) { return lg.pseudo(); });
    const std::vector<int> order = sweep_permutation(locals.size(), options.order, options.seed);
    for (int s = 0; s < options.max_sweeps; ++s) {
      schwarz_sweep(g, state, locals, order);
      out.trace.push_back(state.objective);
    }
  }
  out.tau0 = std::move(state.tau0);
  out.residual = std::move(state.residual);
  out.sweeps = state.sweep_count;
  return out;
}

ExactMinimization exact_cycle_minimizer(const Graph& g, const CycleBasis& basis, const EdgeFlow& r0,
                                        double direct_nnz_limit) {
  check_edge_size(g, r0, "initial residual");
  if (g.num_vertices() > 2000)
    throw Error(ErrorKind::TooLarge, "exact cycle minimizer is limited to graphs with at most 2000 vertices");
  ExactMinimization out;
  out.alpha.assign(basis.size(), 0.0);
  out.tau0 = EdgeFlow(g.num_edges());
  if (basis.cycles.empty()) {
    out.objective = dinv_norm(g, r0);
    return out;
  }

  const auto k = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t c = 0; c < basis.size(); ++c)
    for (const CycleEntry& en : basis.cycles[c].entries)
      triplets.emplace_back(en.edge, static_cast<Eigen::Index>(c), static_cast<double>(en.coef));
  Eigen::SparseMatrix<double> cmat(static_cast<Eigen::Index>(g.num_edges()), k);
  cmat.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd inv_w(static_cast<Eigen::Index>(g.num_edges()));
  for (std::size_t e = 0; e < g.num_edges(); ++e) inv_w(static_cast<Eigen::Index>(e)) = 1.0 / g.weight(e);

  const Eigen::SparseMatrix<double> weighted = inv_w.asDiagonal() * cmat;
  Eigen::Map<const Eigen::VectorXd> r(r0.span().data(), static_cast<Eigen::Index>(r0.size()));
  const Eigen::VectorXd rhs = weighted.transpose() * r;

  // Nonzeros of the Gram matrix: cycles sharing an edge couple.
  std::vector<double> per_edge(g.num_edges(), 0.0);
  for (const CycleVector& c : basis.cycles)
    for (const CycleEntry& en : c.entries) per_edge[en.edge] += 1.0;
  double gram_nnz = 0.0;
  for (double x : per_edge) gram_nnz += x * x;

  Eigen::VectorXd alpha;
  if (gram_nnz <= direct_nnz_limit) {
    const Eigen::SparseMatrix<double> gram = Eigen::SparseMatrix<double>(cmat.transpose()) * weighted;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(gram);
    if (solver.info() != Eigen::Success)
      throw Error(ErrorKind::RankDeficient, "cycle Gram matrix could not be factorized");
    alpha = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::RankDeficient, "cycle Gram solve failed");
  } else {
    Eigen::VectorXd inv_diag = Eigen::VectorXd::Zero(k);
    for (std::size_t c = 0; c < basis.size(); ++c) {
      for (const CycleEntry& en : basis.cycles[c].entries) inv_diag(static_cast<Eigen::Index>(c)) += inv_w(en.edge);
      inv_diag(static_cast<Eigen::Index>(c)) = 1.0 / inv_diag(static_cast<Eigen::Index>(c));
    }
    auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return cmat.transpose() * inv_w.cwiseProduct(cmat * x);
    };
    double rel = 0.0;
    alpha = pcg(apply, inv_diag, rhs, 1e-13, 50 * k + 1000, &rel);
    if (rel > 1e-10)
      throw Error(ErrorKind::NoConvergence, "cycle Gram CG stalled at relative residual " + std::to_string(rel));
  }

  const Eigen::VectorXd tau0 = cmat * alpha;
  for (Eigen::Index c = 0; c < k; ++c) out.alpha[c] = alpha(c);
  for (std::size_t e = 0; e < g.num_edges(); ++e) out.tau0[e] = tau0(static_cast<Eigen::Index>(e));
  out.objective = dinv_norm(g, r0 - out.tau0);
  return out;
}

}  // namespace lapest
