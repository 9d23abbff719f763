#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "lapest/baseline.hpp"
#include "lapest/error.hpp"
#include "lapest/io.hpp"

namespace lapest::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct Problem {
  std::string label;
  Graph graph;
  std::vector<Point> coords;
  VertexFunction f;
  VertexFunction v;
  std::optional<VertexFunction> u;  // known exact solution (grids)
};

Problem grid_problem(int level, int smoother_iters) {
  GridGraph grid = uniform_grid(level);
  SampledProblem sampled = sample_and_rhs(grid.graph, grid.coords, sine_field);
  const std::size_t n = grid.graph.num_vertices();
  VertexFunction v = gauss_seidel(grid.graph, sampled.f, VertexFunction(n), smoother_iters);
  return {"l=" + std::to_string(level), std::move(grid.graph), std::move(grid.coords), std::move(sampled.f),
          std::move(v), std::move(sampled.u)};
}

Problem file_problem(const CliConfig& cfg, std::ostream& err) {
  const RawGraph raw = read_matrix_market(cfg.input);
  Preprocessed pre = preprocess(raw.edges, raw.num_vertices);
  const std::size_t n = pre.graph.num_vertices();
  if (static_cast<long long>(n) < raw.num_vertices)
    err << "note: kept largest component, " << n << " of " << raw.num_vertices << " vertices\n";

  VertexFunction f(n);
  if (!cfg.rhs.empty()) {
    const VertexFunction full = read_vertex_function(cfg.rhs);
    if (static_cast<long long>(full.size()) != raw.num_vertices)
      throw Error(ErrorKind::DimensionMismatch, "right-hand side has " + std::to_string(full.size()) +
                                                    " entries, graph has " + std::to_string(raw.num_vertices));
    for (std::size_t i = 0; i < n; ++i) f[i] = full[static_cast<std::size_t>(pre.original_label[i] - 1)];
  } else {
    f = random_initial_guess(n, cfg.seed);
  }
  if (cfg.project_rhs) {
    const double mean = sum(f) / static_cast<double>(n);
    for (double& x : f) x -= mean;
  }
  check_compatible(f);

  const VertexFunction v0 = cfg.zero_guess ? VertexFunction(n) : random_initial_guess(n, cfg.seed + 1);
  VertexFunction v = gauss_seidel(pre.graph, f, v0, cfg.smoother_iters);
  return {std::filesystem::path(cfg.input).stem().string(), std::move(pre.graph), {}, std::move(f), std::move(v),
          std::nullopt};
}

Problem load_problem(const CliConfig& cfg, std::ostream& err) {
  if (cfg.level && !cfg.input.empty()) throw Error(ErrorKind::InvalidArgument, "give either --input or --level");
  if (cfg.level) return grid_problem(*cfg.level, cfg.smoother_iters);
  if (cfg.input.empty()) throw Error(ErrorKind::InvalidArgument, "an --input file or a grid --level is required");
  if (cfg.basis == BasisKind::Face) throw Error(ErrorKind::InvalidArgument, "the face basis needs a grid --level");
  return file_problem(cfg, err);
}

EstimatorConfig estimator_config(const CliConfig& cfg, const Problem& p) {
  EstimatorConfig ec;
  ec.basis = cfg.basis;
  ec.decomposition = cfg.decomposition;
  ec.solver = cfg.solver;
  ec.sweeps = cfg.sweeps;
  ec.order = cfg.order;
  ec.seed = cfg.seed;
  if (cfg.root < 1 || cfg.root > static_cast<long long>(p.graph.num_vertices()))
    throw Error(ErrorKind::InvalidArgument, "--root is out of range");
  ec.root = static_cast<int>(cfg.root - 1);
  return ec;
}

VertexFunction exact_solution(const Problem& p) {
  return p.u ? *p.u : reference_solution(p.graph, p.f);
}

std::string config_echo(const CliConfig& cfg) {
  std::ostringstream s;
  s << "command=" << cfg.subcommand;
  if (cfg.level) s << " level=" << *cfg.level;
  if (!cfg.input.empty()) s << " input=" << std::filesystem::path(cfg.input).filename().string();
  s << " basis=" << (cfg.basis == BasisKind::Face ? "face" : "fundamental")
    << " decomposition=" << (cfg.decomposition == DecompositionMode::Vertex ? "vertex" : "single-cycle")
    << " solver=" << (cfg.solver == CycleSolver::Exact ? "exact" : "schwarz") << " sweeps=";
  if (cfg.subcommand == "grid-experiment") {
    for (std::size_t k = 0; k < cfg.sweep_counts.size(); ++k) s << (k ? "/" : "") << cfg.sweep_counts[k];
    s << " levels=";
    for (std::size_t k = 0; k < cfg.levels.size(); ++k) s << (k ? "/" : "") << cfg.levels[k];
  } else {
    s << cfg.sweeps;
  }
  s << " order=" << (cfg.order == SweepOrder::Ascending ? "ascending" : "random")
    << " smoother_iters=" << cfg.smoother_iters << " root=" << cfg.root;
  if (!cfg.rhs.empty()) s << " rhs=" << std::filesystem::path(cfg.rhs).filename().string();
  if (cfg.project_rhs) s << " project_rhs";
  if (cfg.zero_guess) s << " zero_guess";
  return s.str();
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorKind::Io, "cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void write_report(const CliConfig& cfg, const ExperimentReport& report, bool edges, std::ostream& out) {
  Sink sink(cfg.output, out);
  if (cfg.format == "json")
    sink.stream() << to_json(report) << '\n';
  else if (edges)
    write_edges_csv(report, sink.stream());
  else
    write_csv(report, sink.stream());
}

void write_trace(const CliConfig& cfg, const ErrorEstimate& est) {
  if (cfg.trace.empty()) return;
  std::ofstream out(cfg.trace);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + cfg.trace);
  write_trace_csv(est.trace, out);
}

ReportRow make_row(const Problem& p, const ErrorEstimate& est, double seconds) {
  ReportRow row;
  row.label = p.label;
  row.n = p.graph.num_vertices();
  row.m = p.graph.num_edges();
  row.psi = est.psi;
  row.sweeps = est.sweeps;
  row.seconds = seconds;
  return row;
}

void attach_truth(ReportRow& row, double truth) {
  row.true_error = truth;
  if (truth > 0.0) row.eff = efficiency_index(row.psi, truth);
}

int cmd_estimate(const CliConfig& cfg, std::ostream& out, std::ostream& err, bool dump) {
  const Problem p = load_problem(cfg, err);
  const EstimatorConfig ec = estimator_config(cfg, p);

  const auto start = Clock::now();
  const ErrorEstimate est = error_estimate(p.graph, p.v, p.f, ec, p.coords);
  const double seconds = seconds_since(start);

  ExperimentReport report;
  report.seed = cfg.seed;
  report.config = config_echo(cfg);
  ReportRow row = make_row(p, est, seconds);

  std::optional<EdgeFlow> true_e;
  if (cfg.with_true_error || cfg.comparator) {
    const VertexFunction u = exact_solution(p);
    const VertexFunction diff = u - p.v;
    attach_truth(row, l_seminorm(p.graph, diff));
    if (dump && cfg.with_true_error) {
      EdgeFlow grad = gradient(p.graph, diff);
      for (std::size_t e = 0; e < grad.size(); ++e) grad[e] = std::sqrt(p.graph.weight(static_cast<int>(e))) * std::abs(grad[e]);
      true_e = std::move(grad);
    }
  }
  report.rows.push_back(row);

  if (cfg.comparator) {
    const auto t0 = Clock::now();
    const BoundState bs = minimize_bound_alternating(p.graph, p.v, p.f, cfg.max_iter);
    ReportRow alt = row;
    alt.label = p.label + ":alternating";
    alt.psi = std::sqrt(bs.energy);
    alt.sweeps = bs.iterations;
    alt.seconds = seconds_since(t0);
    alt.eff.reset();
    if (row.true_error) attach_truth(alt, *row.true_error);
    report.rows.push_back(alt);
  }

  if (dump) report.edges = edge_records(p.graph, est.per_edge, true_e ? &*true_e : nullptr);
  write_report(cfg, report, dump, out);
  write_trace(cfg, est);
  return 0;
}

int cmd_grid_experiment(const CliConfig& cfg, std::ostream& out) {
  ExperimentReport report;
  report.seed = cfg.seed;
  report.config = config_echo(cfg);
  for (int level : cfg.levels) {
    const Problem p = grid_problem(level, cfg.smoother_iters);
    const double truth = l_seminorm(p.graph, *p.u - p.v);
    for (int sweeps : cfg.sweep_counts) {
      CliConfig local = cfg;
      local.sweeps = sweeps;
      const EstimatorConfig ec = estimator_config(local, p);
      const auto start = Clock::now();
      const ErrorEstimate est = error_estimate(p.graph, p.v, p.f, ec, p.coords);
      ReportRow row = make_row(p, est, seconds_since(start));
      attach_truth(row, truth);
      report.rows.push_back(row);
    }
  }
  write_report(cfg, report, false, out);
  return 0;
}

int cmd_compare_baseline(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const Problem p = load_problem(cfg, err);
  EstimatorConfig ec = estimator_config(cfg, p);
  const double truth = l_seminorm(p.graph, exact_solution(p) - p.v);

  struct Line {
    std::string method;
    double value;
    double seconds;
  };
  std::vector<Line> lines;

  ec.solver = CycleSolver::Schwarz;
  auto start = Clock::now();
  const ErrorEstimate schwarz = error_estimate(p.graph, p.v, p.f, ec, p.coords);
  lines.push_back({"schwarz-" + std::to_string(schwarz.sweeps), schwarz.psi, seconds_since(start)});

  ec.solver = CycleSolver::Exact;
  start = Clock::now();
  const ErrorEstimate exact = error_estimate(p.graph, p.v, p.f, ec, p.coords);
  lines.push_back({"exact", exact.psi, seconds_since(start)});

  start = Clock::now();
  const BoundState bs = minimize_bound_alternating(p.graph, p.v, p.f, cfg.max_iter);
  lines.push_back({"alternating", std::sqrt(bs.energy), seconds_since(start)});

  Sink sink(cfg.output, out);
  if (cfg.format == "json") {
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = cfg.seed;
    j["config"] = config_echo(cfg);
    j["rows"] = nlohmann::json::array();
    for (const Line& l : lines) {
      nlohmann::json row{{"method", l.method}, {"psi_or_sqrtE", l.value}, {"true_error", truth}, {"seconds", l.seconds}};
      row["eff"] = truth > 0.0 ? nlohmann::json(l.value / truth) : nlohmann::json(nullptr);
      j["rows"].push_back(row);
    }
    sink.stream() << j.dump(2) << '\n';
  } else {
    std::ostream& s = sink.stream();
    s << "# lapest " << kVersion << " seed=" << cfg.seed << '\n';
    s << "# config: " << config_echo(cfg) << '\n';
    s << "method,psi_or_sqrtE,true_error,eff,seconds\n";
    for (const Line& l : lines)
      s << l.method << ',' << fmt(l.value) << ',' << fmt(truth) << ',' << (truth > 0.0 ? fmt(l.value / truth) : "")
        << ',' << fmt(l.seconds) << '\n';
  }
  return 0;
}

void add_common(CLI::App* sub, CliConfig& cfg) {
  static const std::map<std::string, BasisKind> bases{{"fundamental", BasisKind::Fundamental},
                                                      {"face", BasisKind::Face}};
  static const std::map<std::string, DecompositionMode> decs{{"vertex", DecompositionMode::Vertex},
                                                             {"single-cycle", DecompositionMode::SingleCycle}};
  static const std::map<std::string, CycleSolver> solvers{{"schwarz", CycleSolver::Schwarz},
                                                          {"exact", CycleSolver::Exact}};
  static const std::map<std::string, SweepOrder> orders{{"ascending", SweepOrder::Ascending},
                                                        {"random", SweepOrder::Random}};
  sub->add_option("--basis", cfg.basis, "fundamental or face")->transform(CLI::CheckedTransformer(bases));
  sub->add_option("--decomposition", cfg.decomposition, "vertex or single-cycle")
      ->transform(CLI::CheckedTransformer(decs));
  sub->add_option("--solver", cfg.solver, "schwarz or exact")->transform(CLI::CheckedTransformer(solvers));
  sub->add_option("--sweep-order", cfg.order, "ascending or random")->transform(CLI::CheckedTransformer(orders));
  sub->add_option("--seed", cfg.seed, "seed for f, v0 and random sweep order");
  sub->add_option("--root", cfg.root, "BFS root (1-based)");
  sub->add_option("-o,--output", cfg.output, "output file (default stdout)");
  sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_problem(CLI::App* sub, CliConfig& cfg) {
  sub->add_option("-i,--input", cfg.input, "Matrix Market graph");
  sub->add_option("--level", cfg.level, "uniform grid level instead of a file")->check(CLI::Range(1, 12));
  sub->add_option("--sweeps", cfg.sweeps, "Schwarz sweeps")->check(CLI::NonNegativeNumber);
  sub->add_option("--smoother-iters", cfg.smoother_iters, "Gauss-Seidel iterations producing v")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--rhs", cfg.rhs, "right-hand side, one value per line in input numbering");
  sub->add_flag("--project-rhs", cfg.project_rhs, "subtract the mean of f");
  sub->add_flag("--zero-guess", cfg.zero_guess, "start Gauss-Seidel from v = 0 instead of a random guess");
  sub->add_flag("--with-true-error", cfg.with_true_error, "also compute ||u - v||_L");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Guaranteed error estimates for graph Laplacian systems"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CLI::App* estimate = app.add_subcommand("estimate", "estimate ||u - v||_L for one problem");
  add_problem(estimate, cfg);
  add_common(estimate, cfg);
  estimate->add_option("--trace", cfg.trace, "write the Schwarz objective trace as CSV");
  estimate->add_flag("--comparator", cfg.comparator, "add the alternating bound as a second row");
  estimate->add_option("--max-iter", cfg.max_iter, "alternating bound iterations")->check(CLI::NonNegativeNumber);

  CLI::App* grid = app.add_subcommand("grid-experiment", "face-basis estimates on uniform grids");
  grid->add_option("--levels", cfg.levels, "grid levels")->delimiter(',')->check(CLI::Range(1, 12));
  grid->add_option("--sweeps", cfg.sweep_counts, "sweep counts")->delimiter(',')->check(CLI::NonNegativeNumber);
  grid->add_option("--smoother-iters", cfg.smoother_iters, "Gauss-Seidel iterations from v = 0")
      ->check(CLI::NonNegativeNumber);
  add_common(grid, cfg);

  CLI::App* dump = app.add_subcommand("dump-local", "per-edge estimator values");
  add_problem(dump, cfg);
  add_common(dump, cfg);
  dump->add_option("--trace", cfg.trace, "write the Schwarz objective trace as CSV");

  CLI::App* compare = app.add_subcommand("compare-baseline", "compare against the alternating bound");
  add_problem(compare, cfg);
  add_common(compare, cfg);
  compare->add_option("--max-iter", cfg.max_iter, "alternating bound iterations")->check(CLI::NonNegativeNumber);

  // Grids default to the zero initial guess and the face basis.
  grid->preparse_callback([&cfg](std::size_t) {
    cfg.smoother_iters = 0;
    cfg.basis = BasisKind::Face;
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (estimate->parsed()) {
      cfg.subcommand = "estimate";
      return cmd_estimate(cfg, out, err, false);
    }
    if (dump->parsed()) {
      cfg.subcommand = "dump-local";
      return cmd_estimate(cfg, out, err, true);
    }
    if (grid->parsed()) {
      cfg.subcommand = "grid-experiment";
      return cmd_grid_experiment(cfg, out);
    }
    cfg.subcommand = "compare-baseline";
    return cmd_compare_baseline(cfg, out, err);
  } catch (const Error& e) {
    err << "lapest: " << e.what() << '\n';
    return is_input_error(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    err << "lapest: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace lapest::cli
