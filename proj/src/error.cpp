#include "lapest/error.hpp"

namespace lapest {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::Io: return "Io";
    case ErrorKind::TooManyEdges: return "TooManyEdges";
    case ErrorKind::IncompatibleRHS: return "IncompatibleRHS";
    case ErrorKind::NotAGridGraph: return "NotAGridGraph";
    case ErrorKind::EmptyBasis: return "EmptyBasis";
    case ErrorKind::InvalidCycle: return "InvalidCycle";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularLocalSystem: return "SingularLocalSystem";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ZeroTrueError: return "ZeroTrueError";
    case ErrorKind::NotInWf: return "NotInWf";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateBeta: return "DegenerateBeta";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::IncompatibleRHS:
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularLocalSystem:
    case ErrorKind::RankDeficient:
    case ErrorKind::InvalidCycle:
    case ErrorKind::NotInWf:
    case ErrorKind::DegenerateBeta:
    case ErrorKind::ZeroTrueError:
      return false;
    default:
      return true;
  }
}

}  // namespace lapest
