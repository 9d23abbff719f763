#include "lapest/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "lapest/error.hpp"

namespace lapest {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

RawGraph read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty Matrix Market input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw Error(ErrorKind::ParseError, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw Error(ErrorKind::UnsupportedFormat, "object '" + object + "' is not a matrix");
  if (format != "coordinate") throw Error(ErrorKind::UnsupportedFormat, "only coordinate format is supported");
  if (field == "complex") throw Error(ErrorKind::UnsupportedFormat, "complex matrices are not supported");
  if (field != "real" && field != "integer" && field != "pattern" && field != "double")
    throw Error(ErrorKind::ParseError, "unknown field '" + field + "'");
  if (symmetry == "hermitian") throw Error(ErrorKind::UnsupportedFormat, "hermitian matrices are not supported");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw Error(ErrorKind::ParseError, "unknown symmetry '" + symmetry + "'");
  const bool pattern = field == "pattern";
  const bool general = symmetry == "general";

  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    break;
  }
  long long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw Error(ErrorKind::ParseError, "malformed size line '" + line + "'");
  }
  if (rows != cols) throw Error(ErrorKind::UnsupportedFormat, "matrix is not square");

  struct Pair {
    double lower_sum = 0.0, upper_sum = 0.0;
    bool has_lower = false, has_upper = false;
  };
  std::map<std::pair<long long, long long>, Pair> pairs;
  RawGraph out;
  out.num_vertices = rows;
  long long read = 0;
  while (read < nnz && std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double value = 1.0;
    if (!(entry >> i >> j)) throw Error(ErrorKind::ParseError, "malformed entry '" + line + "'");
    if (!pattern && !(entry >> value)) throw Error(ErrorKind::ParseError, "entry without value '" + line + "'");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw Error(ErrorKind::ParseError, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    ++read;
    if (!general || i == j) {
      out.edges.push_back(RawEdge{std::max(i, j), std::min(i, j), value});
      continue;
    }
    Pair& p = pairs[{std::max(i, j), std::min(i, j)}];
    if (i > j) {
      p.lower_sum += value;
      p.has_lower = true;
    } else {
      p.upper_sum += value;
      p.has_upper = true;
    }
  }
  if (read != nnz)
    throw Error(ErrorKind::ParseError, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(read));
  for (const auto& [key, p] : pairs) {
    const double w = p.has_lower && p.has_upper ? 0.5 * (p.lower_sum + p.upper_sum)
                                                : (p.has_lower ? p.lower_sum : p.upper_sum);
    out.edges.push_back(RawEdge{key.first, key.second, w});
  }
  return out;
}

RawGraph read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(const Graph& g, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << g.num_vertices() << ' ' << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const Edge& e : g.edges()) out << e.hi + 1 << ' ' << e.lo + 1 << ' ' << format_double(e.weight) << '\n';
}

void write_matrix_market(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  write_matrix_market(g, out);
}

Preprocessed preprocess(std::span<const RawEdge> raw, long long num_vertices) {
  if (raw.empty()) throw Error(ErrorKind::EmptyGraph, "no edges in input");
  std::map<std::pair<long long, long long>, double> merged;
  for (const RawEdge& e : raw) {
    if (e.i < 1 || e.j < 1 || e.i > num_vertices || e.j > num_vertices)
      throw Error(ErrorKind::InvalidArgument, "vertex label out of range");
    if (e.i == e.j) continue;
    merged[{std::max(e.i, e.j), std::min(e.i, e.j)}] += e.weight;
  }
  std::vector<RawEdge> kept;
  for (const auto& [key, w] : merged) {
    if (w == 0.0 || !std::isfinite(w)) continue;
    kept.push_back(RawEdge{key.first, key.second, std::abs(w)});
  }
  if (kept.empty()) throw Error(ErrorKind::EmptyGraph, "no edges survive preprocessing");

  // Union-find over the surviving edges.
  std::vector<long long> parent(static_cast<std::size_t>(num_vertices) + 1);
  std::iota(parent.begin(), parent.end(), 0LL);
  auto find = [&parent](long long x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const RawEdge& e : kept) {
    const long long a = find(e.i), b = find(e.j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<long long> size(parent.size(), 0);
  for (long long v = 1; v <= num_vertices; ++v) ++size[find(v)];
  // Roots are the smallest label of their component, so the first maximum wins ties.
  long long best = 1;
  for (long long v = 1; v <= num_vertices; ++v)
    if (find(v) == v && size[v] > size[best]) best = v;

  Preprocessed out;
  std::vector<long long> relabel(parent.size(), 0);
  for (long long v = 1; v <= num_vertices; ++v) {
    if (find(v) != best) continue;
    out.original_label.push_back(v);
    relabel[v] = static_cast<long long>(out.original_label.size());
  }
  std::vector<RawEdge> component;
  for (const RawEdge& e : kept)
    if (find(e.i) == best) component.push_back(RawEdge{relabel[e.i], relabel[e.j], e.weight});
  if (component.empty()) throw Error(ErrorKind::EmptyGraph, "largest component has no edges");
  out.graph = validate_graph(component, static_cast<long long>(out.original_label.size()));
  return out;
}

GridGraph uniform_grid(int level) {
  if (level < 1 || level > 12) throw Error(ErrorKind::InvalidArgument, "grid level must be in 1..12");
  const long long cells = 1LL << level;
  const long long side = cells + 1;
  auto id = [side](long long a, long long b) { return b * side + a + 1; };
  std::vector<RawEdge> raw;
  raw.reserve(static_cast<std::size_t>(3 * cells * cells + 2 * cells));
  GridGraph out;
  out.level = level;
  out.coords.reserve(static_cast<std::size_t>(side * side));
  const double h = 1.0 / static_cast<double>(cells);
  for (long long b = 0; b < side; ++b)
    for (long long a = 0; a < side; ++a) {
      out.coords.push_back(Point{a * h, b * h});
      if (a < cells) raw.push_back(RawEdge{id(a + 1, b), id(a, b), 1.0});
      if (b < cells) raw.push_back(RawEdge{id(a, b + 1), id(a, b), 1.0});
      if (a < cells && b < cells) raw.push_back(RawEdge{id(a + 1, b + 1), id(a, b), 1.0});
    }
  out.graph = validate_graph(raw, side * side);
  return out;
}

double sine_field(double x, double y) {
  return std::sin(std::numbers::pi / 2.0 * x) * std::sin(std::numbers::pi / 2.0 * y);
}

SampledProblem sample_and_rhs(const Graph& g, std::span<const Point> coords,
                              const std::function<double(double, double)>& field) {
  if (coords.size() != g.num_vertices())
    throw Error(ErrorKind::DimensionMismatch, "coordinate count does not match vertex count");
  SampledProblem p;
  p.u = VertexFunction(g.num_vertices());
  for (std::size_t v = 0; v < coords.size(); ++v) p.u[v] = field(coords[v].x, coords[v].y);
  p.f = apply_laplacian(g, p.u);
  return p;
}

Graph random_connected_graph(int n, long long extra, double min_weight, double max_weight, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "random graph needs n >= 2");
  if (extra < 0) throw Error(ErrorKind::InvalidArgument, "extra edge count must be nonnegative");
  if (!(min_weight > 0.0) || max_weight < min_weight) throw Error(ErrorKind::InvalidArgument, "bad weight range");
  const long long nn = n;
  const long long available = nn * (nn - 1) / 2 - (nn - 1);
  if (extra > available)
    throw Error(ErrorKind::TooManyEdges, "at most " + std::to_string(available) + " extra edges fit on " +
                                             std::to_string(n) + " vertices");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(min_weight, max_weight);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  std::shuffle(perm.begin(), perm.end(), rng);

  auto key = [nn](long long a, long long b) { return std::max(a, b) * (nn + 1) + std::min(a, b); };
  std::unordered_set<long long> present;
  std::vector<RawEdge> raw;
  raw.reserve(static_cast<std::size_t>(nn - 1 + extra));
  for (int t = 1; t < n; ++t) {
    std::uniform_int_distribution<int> pick(0, t - 1);
    const long long a = perm[t], b = perm[pick(rng)];
    present.insert(key(a, b));
    raw.push_back(RawEdge{a, b, weight(rng)});
  }
  if (2 * extra <= available) {
    std::uniform_int_distribution<long long> vertex(1, nn);
    while (static_cast<long long>(raw.size()) < nn - 1 + extra) {
      const long long a = vertex(rng), b = vertex(rng);
      if (a == b || !present.insert(key(a, b)).second) continue;
      raw.push_back(RawEdge{a, b, weight(rng)});
    }
  } else {
    std::vector<std::pair<long long, long long>> missing;
    for (long long a = 2; a <= nn; ++a)
      for (long long b = 1; b < a; ++b)
        if (!present.count(key(a, b))) missing.emplace_back(a, b);
    std::shuffle(missing.begin(), missing.end(), rng);
    for (long long k = 0; k < extra; ++k) raw.push_back(RawEdge{missing[k].first, missing[k].second, weight(rng)});
  }
  return validate_graph(raw, nn);
}

VertexFunction read_vertex_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%' || line[first] == '#') continue;
    std::istringstream ls(line);
    double x = 0.0;
    if (!(ls >> x)) throw Error(ErrorKind::ParseError, "bad value '" + line + "' in '" + path + "'");
    values.push_back(x);
  }
  return VertexFunction(std::move(values));
}

std::vector<EdgeRecord> edge_records(const Graph& g, const EdgeFlow& psi_e, const EdgeFlow* true_error) {
  check_edge_size(g, psi_e, "per-edge estimate");
  std::vector<EdgeRecord> out;
  out.reserve(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    EdgeRecord r{ed.hi + 1LL, ed.lo + 1LL, ed.weight, psi_e[e], std::nullopt};
    if (true_error) r.true_e = (*true_error)[e];
    out.push_back(r);
  }
  return out;
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
  out << "# lapest " << report.version << " seed=" << report.seed << '\n';
  if (!report.config.empty()) out << "# config: " << report.config << '\n';
  out << "label,n,m,true_error,psi,eff,sweeps,seconds\n";
  auto opt = [](const std::optional<double>& x) { return x ? format_short(*x) : std::string(); };
  for (const ReportRow& r : report.rows) {
    out << r.label << ',' << r.n << ',' << r.m << ',' << opt(r.true_error) << ',' << format_short(r.psi) << ','
        << opt(r.eff) << ',' << r.sweeps << ',' << format_short(r.seconds) << '\n';
  }
}

void write_edges_csv(const ExperimentReport& report, std::ostream& out) {
  const bool with_true = !report.edges.empty() && report.edges.front().true_e.has_value();
  double sum_sq = 0.0;
  for (const EdgeRecord& r : report.edges) sum_sq += r.psi_e * r.psi_e;
  out << "# lapest " << report.version << " seed=" << report.seed << '\n';
  out << "# sum_psi_e_sq=" << format_double(sum_sq);
  if (!report.rows.empty()) out << " psi_sq=" << format_double(report.rows.front().psi * report.rows.front().psi);
  out << '\n';
  out << (with_true ? "i,j,w,psi_e,true_e\n" : "i,j,w,psi_e\n");
  for (const EdgeRecord& r : report.edges) {
    out << r.i << ',' << r.j << ',' << format_double(r.w) << ',' << format_double(r.psi_e);
    if (with_true) out << ',' << format_double(r.true_e.value_or(0.0));
    out << '\n';
  }
}

std::string to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["version"] = report.version;
  j["seed"] = report.seed;
  j["config"] = report.config;
  auto opt = [](const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"label", r.label},
                    {"n", r.n},
                    {"m", r.m},
                    {"true_error", opt(r.true_error)},
                    {"psi", r.psi},
                    {"eff", opt(r.eff)},
                    {"sweeps", r.sweeps},
                    {"seconds", r.seconds}});
  }
  j["rows"] = std::move(rows);
  nlohmann::json edges = nlohmann::json::array();
  double sum_sq = 0.0;
  for (const EdgeRecord& r : report.edges) {
    nlohmann::json e = {{"i", r.i}, {"j", r.j}, {"w", r.w}, {"psi_e", r.psi_e}};
    if (r.true_e) e["true_e"] = *r.true_e;
    edges.push_back(std::move(e));
    sum_sq += r.psi_e * r.psi_e;
  }
  if (!report.edges.empty()) j["sum_psi_e_sq"] = sum_sq;
  j["edges"] = std::move(edges);
  return j.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  ExperimentReport r;
  r.version = j.value("version", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
  r.config = j.value("config", std::string());
  auto opt = [](const nlohmann::json& x) { return x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()); };
  for (const auto& row : j.value("rows", nlohmann::json::array())) {
    ReportRow rr;
    rr.label = row.at("label").get<std::string>();
    rr.n = row.at("n").get<std::size_t>();
    rr.m = row.at("m").get<std::size_t>();
    rr.true_error = opt(row.at("true_error"));
    rr.psi = row.at("psi").get<double>();
    rr.eff = opt(row.at("eff"));
    rr.sweeps = row.at("sweeps").get<int>();
    rr.seconds = row.at("seconds").get<double>();
    r.rows.push_back(std::move(rr));
  }
  for (const auto& e : j.value("edges", nlohmann::json::array())) {
    EdgeRecord er{e.at("i").get<long long>(), e.at("j").get<long long>(), e.at("w").get<double>(),
                  e.at("psi_e").get<double>(), std::nullopt};
    if (e.contains("true_e")) er.true_e = e.at("true_e").get<double>();
    r.edges.push_back(er);
  }
  return r;
}

void write_trace_csv(std::span<const double> trace, std::ostream& out) {
  out << "sweep,objective\n";
  for (std::size_t s = 0; s < trace.size(); ++s) out << s << ',' << format_double(trace[s]) << '\n';
}

}  // namespace lapest
