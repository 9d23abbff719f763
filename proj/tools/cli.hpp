#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lapest/estimator.hpp"

namespace lapest::cli {

struct CliConfig {
  std::string subcommand;
  std::string input;
  std::optional<int> level;
  std::vector<int> levels{5, 6, 7};
  std::vector<int> sweep_counts{1, 3, 5};
  int sweeps = 3;
  BasisKind basis = BasisKind::Fundamental;
  DecompositionMode decomposition = DecompositionMode::Vertex;
  CycleSolver solver = CycleSolver::Schwarz;
  int smoother_iters = 3;
  std::uint64_t seed = 1;
  SweepOrder order = SweepOrder::Ascending;
  long long root = 1;  // 1-based, after relabelling
  std::string rhs;
  std::string output;
  std::string format = "csv";
  std::string trace;
  bool project_rhs = false;
  bool zero_guess = false;
  bool with_true_error = false;
  bool comparator = false;
  int max_iter = 100;
};

/// Runs one command. Returns the process exit code: 0 success, 2 bad input,
/// 3 numerical failure. Reports go to `out` unless an output path is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lapest::cli
