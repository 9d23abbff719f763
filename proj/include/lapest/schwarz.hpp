#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iterator>
#include <span>
#include <vector>

#include "lapest/cycle_space.hpp"
#include "lapest/graph.hpp"

namespace lapest {

/// Normal equations of the D^{-1}-least-squares problem restricted to one
/// subspace of the cycle space, factorized once and reused every sweep.
/// A view into the arrays owned by LocalSystems.
struct LocalGram {
  enum class Method : std::uint8_t { Cholesky, Pseudo, Iterative };

  std::span<const int> cycles;
  std::span<const int> edges;          // union of the cycle supports, ascending
  const double* inv_weight = nullptr;  // 1 / w_e, indexed by global edge id
  // Cycle j's entries as (local edge index, coefficient), flattened.
  std::span<const int> entry_offsets;
  std::span<const int> entry_edge;
  std::span<const std::int8_t> entry_coef;
  Method method = Method::Cholesky;
  const double* factor = nullptr;   // packed lower Cholesky factor, or d x d pinv
  std::span<const double> inv_diag;  // Jacobi preconditioner (Iterative)

  std::size_t size() const { return cycles.size(); }
  bool pseudo() const { return method == Method::Pseudo; }
  bool iterative() const { return method == Method::Iterative; }
  /// M_jl = (c^j, c^l)_{D^{-1}}, formed on request.
  Eigen::MatrixXd gram() const;
  /// Overwrites x = rhs with M^{-1} rhs (pseudo-inverse or CG as applicable).
  void solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// y = M x without forming M.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// All local systems of a decomposition, stored field by field in
/// contiguous arrays in sweep order. Elements are views built on access.
class LocalSystems {
 public:
  class const_iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = LocalGram;
    using difference_type = std::ptrdiff_t;
    using reference = LocalGram;
    using pointer = void;

    const_iterator() = default;
    const_iterator(const LocalSystems* owner, std::size_t k) : owner_(owner), k_(k) {}
    LocalGram operator*() const { return (*owner_)[k_]; }
    const_iterator& operator++() { return ++k_, *this; }
    const_iterator operator++(int) { const_iterator t = *this; ++k_; return t; }
    bool operator==(const const_iterator& o) const { return k_ == o.k_; }

   private:
    const LocalSystems* owner_ = nullptr;
    std::size_t k_ = 0;
  };

  LocalSystems() = default;
  LocalSystems(const LocalSystems&) = delete;
  LocalSystems& operator=(const LocalSystems&) = delete;
  LocalSystems(LocalSystems&&) = default;
  LocalSystems& operator=(LocalSystems&&) = default;

  std::size_t size() const { return method_.size(); }
  bool empty() const { return method_.empty(); }
  LocalGram operator[](std::size_t k) const;
  const_iterator begin() const { return {this, 0}; }
  const_iterator end() const { return {this, size()}; }

 private:
  friend LocalSystems build_local_systems(const Graph&, const CycleBasis&, const SubspaceDecomposition&, bool,
                                          std::size_t);
  std::vector<int> cycles_;
  std::vector<int> edges_;
  std::vector<double> inv_weight_;
  std::vector<int> entry_offsets_;  // d + 1 per subspace
  std::vector<int> entry_edge_;
  std::vector<std::int8_t> entry_coef_;
  std::vector<double> factor_;  // factor, pinv or Jacobi diagonal
  // Start of subspace k in each array; one extra trailing entry.
  std::vector<std::size_t> cycle_start_{0};
  std::vector<std::size_t> edge_start_{0};
  std::vector<std::size_t> entry_start_{0};
  std::vector<std::size_t> factor_start_{0};
  std::vector<LocalGram::Method> method_;
};

/// Subspaces with more cycles than this are solved by preconditioned CG.
inline constexpr std::size_t kDenseLocalLimit = 1024;

/// Builds and factorizes one LocalGram per subspace. A singular Gram matrix
/// falls back to an eigenvalue-thresholded pseudo-inverse (cutoff
/// 1e-12 * max diagonal) unless `allow_pseudo` is false, in which case
/// SingularLocalSystem is thrown.
LocalSystems build_local_systems(const Graph& g, const CycleBasis& basis, const SubspaceDecomposition& decomposition,
                                 bool allow_pseudo = true, std::size_t dense_limit = kDenseLocalLimit);

struct SchwarzState {
  EdgeFlow residual;  // DGv - tau_f - tau_0
  EdgeFlow tau0;
  double objective = 0.0;  // ||residual||_{D^{-1}}
  int sweep_count = 0;
  std::vector<double> alpha;  // accumulated coefficient per cycle
};

SchwarzState make_state(const Graph& g, const CycleBasis& basis, const EdgeFlow& r0);

/// Exact minimization of the objective over span(local.cycles). Touches only
/// the local edges; the cached objective is updated incrementally.
void local_solve(SchwarzState& state, const LocalGram& local);

/// One multiplicative sweep over the subspaces in `order` (indices into
/// `locals`). Empty order means ascending. The objective is recomputed from
/// the residual at the end of the sweep.
void schwarz_sweep(const Graph& g, SchwarzState& state, const LocalSystems& locals,
                   std::span<const int> order = {});

enum class SweepOrder { Ascending, Random };

struct SchwarzOptions {
  int max_sweeps = 3;
  SweepOrder order = SweepOrder::Ascending;
  std::uint64_t seed = 0;
  bool allow_pseudo = true;
  std::size_t dense_limit = kDenseLocalLimit;
};

struct CycleMinimization {
  EdgeFlow tau0;
  EdgeFlow residual;
  std::vector<double> trace;  // objective before the first sweep, then after each
  int sweeps = 0;
  bool used_pseudo = false;
};

/// Approximate argmin over the cycle space of ||r0 - tau0||_{D^{-1}} by
/// multiplicative Schwarz sweeps starting from tau0 = 0.
CycleMinimization minimize_cycle_component(const Graph& g, const CycleBasis& basis,
                                           const SubspaceDecomposition& decomposition, const EdgeFlow& r0,
                                           const SchwarzOptions& options);

/// Sweep order used by minimize_cycle_component for the given options.
std::vector<int> sweep_permutation(std::size_t num_subspaces, SweepOrder order, std::uint64_t seed);

struct ExactMinimization {
  EdgeFlow tau0;
  std::vector<double> alpha;
  double objective = 0.0;
};

/// Gram matrices with more nonzeros than this go to CG instead of LDL^T.
inline constexpr double kExactDirectNnz = 4e6;

/// Global minimizer over the span of the basis: sparse LDL^T on the full
/// cycle Gram matrix, or preconditioned CG to a 1e-13 relative residual when
/// the Gram matrix is too dense to factor. Limited to n <= 2000 (TooLarge).
ExactMinimization exact_cycle_minimizer(const Graph& g, const CycleBasis& basis, const EdgeFlow& r0,
                                        double direct_nnz_limit = kExactDirectNnz);

}  // namespace lapest
