#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lapest {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  DisconnectedGraph,
  SelfLoop,
  DuplicateEdge,
  NonpositiveWeight,
  EmptyGraph,
  ParseError,
  UnsupportedFormat,
  Io,
  TooManyEdges,
  IncompatibleRHS,
  NotAGridGraph,
  EmptyBasis,
  InvalidCycle,
  RankDeficient,
  SingularLocalSystem,
  TooLarge,
  ZeroTrueError,
  NotInWf,
  NoConvergence,
  DegenerateBeta,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Input problems (bad files, invalid graphs) versus numerical failures.
bool is_input_error(ErrorKind kind) noexcept;

}  // namespace lapest
