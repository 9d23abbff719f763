#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lapest/cycle_space.hpp"
#include "lapest/graph.hpp"

namespace lapest {

inline constexpr const char* kVersion = "0.1.0";

struct RawGraph {
  long long num_vertices = 0;
  std::vector<RawEdge> edges;
};

/// Coordinate-format Matrix Market (real, integer or pattern; symmetric,
/// skew-symmetric or general). Entries are returned as undirected edges;
/// diagonal entries come back as self-loops. For general matrices each
/// off-diagonal pair (i,j)/(j,i) is merged into one edge whose weight is the
/// mean of the stored values (or the single stored value).
RawGraph read_matrix_market(std::istream& in);
RawGraph read_matrix_market(const std::string& path);

/// Writes the lower triangle as `real symmetric`, full round-trip precision.
void write_matrix_market(const Graph& g, std::ostream& out);
void write_matrix_market(const Graph& g, const std::string& path);

struct Preprocessed {
  Graph graph;
  std::vector<long long> original_label;  // new 0-based id -> input label
};

/// Drops self-loops, sums repeated edges, takes |weight|, drops zero weights
/// and keeps the largest connected component (ties: the one holding the
/// smallest label), relabelled contiguously in ascending label order.
Preprocessed preprocess(std::span<const RawEdge> raw, long long num_vertices);

struct GridGraph {
  Graph graph;
  std::vector<Point> coords;
  int level = 0;
};

/// Unit-weight triangulation of the (N+1) x (N+1) lattice on [0,1]^2,
/// N = 2^level, with one (1,1) diagonal per cell. Vertex (a, b) gets id
/// b * (N + 1) + a.
GridGraph uniform_grid(int level);

/// sin(pi x / 2) sin(pi y / 2).
double sine_field(double x, double y);

struct SampledProblem {
  VertexFunction u;
  VertexFunction f;
};

/// u sampled from `field` at the vertex coordinates and f = L u.
SampledProblem sample_and_rhs(const Graph& g, std::span<const Point> coords,
                              const std::function<double(double, double)>& field);

/// Random spanning tree on n vertices plus `extra` distinct non-tree edges,
/// weights uniform in [min_weight, max_weight]. Deterministic in `seed`.
Graph random_connected_graph(int n, long long extra, double min_weight, double max_weight, std::uint64_t seed);

/// One value per line (blank lines and '%'/'#' comments skipped).
VertexFunction read_vertex_function(const std::string& path);

struct ReportRow {
  std::string label;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<double> true_error;
  double psi = 0.0;
  std::optional<double> eff;
  int sweeps = 0;
  double seconds = 0.0;
};

struct EdgeRecord {
  long long i = 0;
  long long j = 0;
  double w = 0.0;
  double psi_e = 0.0;
  std::optional<double> true_e;
};

struct ExperimentReport {
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::string config;  // free-form echo of the estimator settings
  std::vector<ReportRow> rows;
  std::vector<EdgeRecord> edges;
};

/// Per-edge records in canonical order; `true_error` optional.
std::vector<EdgeRecord> edge_records(const Graph& g, const EdgeFlow& psi_e, const EdgeFlow* true_error = nullptr);

/// `label,n,m,true_error,psi,eff,sweeps,seconds`, preceded by '#' comment
/// lines carrying version, seed and config.
void write_csv(const ExperimentReport& report, std::ostream& out);

/// Per-edge table as CSV: `i,j,w,psi_e[,true_e]`.
void write_edges_csv(const ExperimentReport& report, std::ostream& out);

std::string to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

/// `sweep,objective`.
void write_trace_csv(std::span<const double> trace, std::ostream& out);

}  // namespace lapest
