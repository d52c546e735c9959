#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlpart/generators.hpp"
#include "mlpart/graph.hpp"
#include "mlpart/graph_io.hpp"
#include "mlpart/multilevel.hpp"
#include "mlpart/preset.hpp"
#include "mlpart/random.hpp"

namespace mlpart {

struct MixtureParams {
  /// Inter-edges per chosen node of S_i; each goes to a distinct S_0 node.
  int edges_per_boundary_node = 2;
  /// Inter-edges between S_i and S_0 stay strictly below fraction * m(S_i).
  double fraction = 0.025;
  /// Chosen nodes per component; 0 takes as many as the budget allows.
  std::size_t boundary_nodes = 0;
  std::uint64_t seed = 1;
  int max_attempts = 64;
};

/// Component files plus generation parameters; parts[0] is the center S_0.
struct MixtureSpec {
  std::vector<std::string> parts;
  MixtureParams params;
};

struct Mixture {
  Graph graph;
  /// First node id of every component in the union.
  std::vector<NodeId> offsets;
  /// Inter-edges between S_i and S_0 (entry 0 is always 0).
  std::vector<std::size_t> inter_edges;
};

class MixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest integer strictly below fraction * m.
inline std::size_t inter_edge_budget(double fraction, std::size_t m) {
  const double limit = fraction * static_cast<double>(m);
  if (!(limit > 0.0)) return 0;
  auto budget = static_cast<std::size_t>(std::floor(limit));
  if (static_cast<double>(budget) >= limit) --budget;
  return budget;
}

/// Star-shaped union of components[0] (the center) and components[1..t]:
/// each outer component gets random edges from some of its nodes to
/// distinct random center nodes, edges_per_boundary_node per chosen node,
/// staying under the per-component budget. Resamples until connected.
inline Mixture generate_hard_mixture(std::span<const Graph> components, const MixtureParams& params) {
  if (components.empty()) throw std::invalid_argument("mixture needs a center component");
  if (params.edges_per_boundary_node < 2) throw std::invalid_argument("edges_per_boundary_node must be at least 2");
  if (!(params.fraction > 0.0) || !(params.fraction <= 0.03)) {
    throw std::invalid_argument("fraction must lie in (0, 0.03]");
  }
  const auto epn = static_cast<std::size_t>(params.edges_per_boundary_node);
  const Graph& center = components[0];
  if (components.size() == 1) return Mixture{center, {0}, {0}};
  if (center.n() < epn) throw MixtureError("center component has fewer nodes than edges_per_boundary_node");

  Mixture mix;
  std::vector<std::size_t> chosen_count(components.size(), 0);
  NodeId offset = 0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    mix.offsets.push_back(offset);
    offset += static_cast<NodeId>(components[i].n());
    if (i == 0) continue;
    const std::size_t budget = inter_edge_budget(params.fraction, components[i].m());
    const std::size_t max_nodes = std::min(budget / epn, components[i].n());
    if (max_nodes == 0) {
      throw MixtureError("inter-edge budget of component " + std::to_string(i) + " (" + std::to_string(budget) +
                         ") is too small for " + std::to_string(epn) + " edges per boundary node");
    }
    if (params.boundary_nodes > max_nodes) {
      throw MixtureError("component " + std::to_string(i) + " allows at most " + std::to_string(max_nodes) +
                         " boundary nodes");
    }
    chosen_count[i] = params.boundary_nodes == 0 ? max_nodes : params.boundary_nodes;
  }

  std::vector<double> weights;
  std::vector<WeightedEdge> base;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    weights.insert(weights.end(), c.node_weights().begin(), c.node_weights().end());
    for (const auto& e : c.edges()) base.push_back({e.u + mix.offsets[i], e.v + mix.offsets[i], e.weight});
  }

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(attempt)));
    auto edges = base;
    mix.inter_edges.assign(components.size(), 0);
    for (std::size_t i = 1; i < components.size(); ++i) {
      std::vector<NodeId> nodes(components[i].n());
      std::iota(nodes.begin(), nodes.end(), NodeId{0});
      rng.shuffle(std::span<NodeId>(nodes));
      std::vector<NodeId> targets(center.n());
      std::iota(targets.begin(), targets.end(), NodeId{0});
      for (std::size_t b = 0; b < chosen_count[i]; ++b) {
        // Partial shuffle: the first epn entries become distinct random targets.
        for (std::size_t t = 0; t < epn; ++t) std::swap(targets[t], targets[t + rng.bounded(targets.size() - t)]);
        for (std::size_t t = 0; t < epn; ++t) edges.push_back({nodes[b] + mix.offsets[i], targets[t], 1.0});
      }
      mix.inter_edges[i] = chosen_count[i] * epn;
      if (!(static_cast<double>(mix.inter_edges[i]) <
            params.fraction * static_cast<double>(components[i].m()))) {
        throw std::logic_error("inter-edge budget exceeded");
      }
    }
    Graph g(weights, std::move(edges));
    if (is_connected(g)) {
      mix.graph = std::move(g);
      return mix;
    }
  }
  throw MixtureError("could not produce a connected mixture within " + std::to_string(params.max_attempts) +
                     " attempts");
}

/// Reads a key=value mixture description. Keys: center (once), part
/// (repeatable), fraction, edges_per_node, boundary_nodes, seed. '#' starts
/// a comment. Relative paths are resolved against `base_dir`.
inline MixtureSpec parse_mixture_spec(std::istream& in, const std::filesystem::path& base_dir = {}) {
  MixtureSpec spec;
  std::string center;
  std::vector<std::string> parts;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).string();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "center") {
      if (!center.empty()) throw ParseError(line_no, "center given twice");
      center = resolve(value);
    } else if (key == "part") {
      parts.push_back(resolve(value));
    } else if (key == "fraction") {
      spec.params.fraction = detail::parse_real(value, line_no);
    } else if (key == "edges_per_node") {
      spec.params.edges_per_boundary_node = static_cast<int>(detail::parse_integer(value, line_no));
    } else if (key == "boundary_nodes") {
      spec.params.boundary_nodes = static_cast<std::size_t>(detail::parse_integer(value, line_no));
    } else if (key == "seed") {
      spec.params.seed = static_cast<std::uint64_t>(detail::parse_integer(value, line_no));
    } else {
      throw ParseError(line_no, "unknown key '" + key + "'");
    }
  }
  if (center.empty()) throw ParseError(line_no, "missing center");
  spec.parts.push_back(center);
  spec.parts.insert(spec.parts.end(), parts.begin(), parts.end());
  return spec;
}

inline MixtureSpec read_mixture_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_mixture_spec(in, std::filesystem::path(path).parent_path());
}

inline Mixture generate_hard_mixture(const MixtureSpec& spec) {
  std::vector<Graph> components;
  for (const auto& p : spec.parts) components.push_back(read_graph_file(p));
  return generate_hard_mixture(components, spec.params);
}

struct NamedGraph {
  std::string name;
  Graph graph;
};

struct RunRecord {
  std::string graph;
  Preset preset = Preset::eco;
  BlockId k = 2;
  std::uint64_t seed = 1;
  double cut = 0.0;
  double cut_pre_final = 0.0;
  double t_uncoarsen_ms = 0.0;
  double t_total_ms = 0.0;
  /// "ok", "unbalanced", or "error: <message>". Errors are left out of averages.
  std::string status = "ok";

  bool failed() const { return status.rfind("error", 0) == 0; }
};

struct ExperimentOptions {
  double epsilon = 0.03;
  int iterations = 1;
  MultilevelConfig base;  // preset is overwritten per run
};

struct ExperimentReport {
  std::vector<RunRecord> runs;

  /// Successful runs of one (graph, preset, k) cell.
  std::vector<const RunRecord*> cell(const std::string& graph, Preset preset, BlockId k) const {
    std::vector<const RunRecord*> out;
    for (const auto& r : runs) {
      if (r.graph == graph && r.preset == preset && r.k == k && !r.failed()) out.push_back(&r);
    }
    return out;
  }

  double average_cut(const std::string& graph, Preset preset, BlockId k) const {
    auto rows = cell(graph, preset, k);
    if (rows.empty()) return std::nan("");
    double sum = 0.0;
    for (const auto* r : rows) sum += r->cut;
    return sum / static_cast<double>(rows.size());
  }

  /// avg(numerator) / avg(denominator) over the seeds on which both
  /// succeeded; NaN when there are none.
  double ratio_of_averages(const std::string& graph, BlockId k, Preset numerator, Preset denominator,
                           bool pre_final = false) const {
    std::map<std::uint64_t, double> den;
    for (const auto* r : cell(graph, denominator, k)) den[r->seed] = pre_final ? r->cut_pre_final : r->cut;
    double a = 0.0;
    double b = 0.0;
    std::size_t count = 0;
    for (const auto* r : cell(graph, numerator, k)) {
      auto it = den.find(r->seed);
      if (it == den.end()) continue;
      a += pre_final ? r->cut_pre_final : r->cut;
      b += it->second;
      ++count;
    }
    if (count == 0) return std::nan("");
    return (a / static_cast<double>(count)) / (b / static_cast<double>(count));
  }
};

inline double ratio_of_averages(std::span<const double> numerator, std::span<const double> denominator) {
  if (numerator.empty() || numerator.size() != denominator.size()) {
    throw std::invalid_argument("ratio needs two equally long, non-empty samples");
  }
  double a = 0.0;
  double b = 0.0;
  for (double x : numerator) a += x;
  for (double x : denominator) b += x;
  return a / b;
}

/// Runs every (graph, preset, k, seed) combination in that nesting order.
inline ExperimentReport run_experiment(std::span<const NamedGraph> graphs, std::span<const Preset> presets,
                                       std::span<const BlockId> ks, std::span<const std::uint64_t> seeds,
                                       const ExperimentOptions& options = {}) {
  if (graphs.empty() || presets.empty() || ks.empty() || seeds.empty()) {
    throw std::invalid_argument("experiment needs at least one graph, preset, k and seed");
  }
  using clock = std::chrono::steady_clock;
  ExperimentReport report;
  for (const auto& g : graphs) {
    for (Preset preset : presets) {
      for (BlockId k : ks) {
        for (std::uint64_t seed : seeds) {
          RunRecord rec;
          rec.graph = g.name;
          rec.preset = preset;
          rec.k = k;
          rec.seed = seed;
          MultilevelConfig config = options.base;
          config.preset = preset;
          const auto start = clock::now();
          try {
            auto result = partition_graph(g.graph, k, options.epsilon, config, seed, options.iterations);
            rec.t_total_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
            rec.t_uncoarsen_ms = std::min(rec.t_total_ms, result.uncoarsen_seconds * 1000.0);
            rec.cut = result.partition.cut;
            rec.cut_pre_final = result.cut_before_finest_refinement;
            rec.status = result.partition.balanced() ? "ok" : "unbalanced";
          } catch (const std::exception& e) {
            rec.t_total_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
            rec.status = std::string("error: ") + e.what();
          }
          report.runs.push_back(std::move(rec));
        }
      }
    }
  }
  return report;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double x) { return std::isnan(x) ? std::string("nan") : format_real(x); }

}  // namespace detail

/// One row per run. Without timings the output depends only on the inputs.
inline void write_runs_csv(std::ostream& out, const ExperimentReport& report, bool timings = true) {
  out << "graph,preset,k,seed,cut,cut_pre_final";
  if (timings) out << ",t_uncoarsen_ms,t_total_ms";
  out << ",status\n";
  for (const auto& r : report.runs) {
    out << detail::csv_field(r.graph) << ',' << preset_name(r.preset) << ',' << r.k << ',' << r.seed << ','
        << detail::csv_number(r.cut) << ',' << detail::csv_number(r.cut_pre_final);
    if (timings) out << ',' << detail::csv_number(r.t_uncoarsen_ms) << ',' << detail::csv_number(r.t_total_ms);
    out << ',' << detail::csv_field(r.status) << '\n';
  }
}

/// Ratio of averages for every ordered pair of distinct presets present in
/// the report, per graph and k.
inline void write_ratios_csv(std::ostream& out, const ExperimentReport& report) {
  std::vector<std::string> graphs;
  std::vector<Preset> presets;
  std::vector<BlockId> ks;
  auto add = [](auto& list, const auto& value) {
    if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
  };
  for (const auto& r : report.runs) {
    add(graphs, r.graph);
    add(presets, r.preset);
    add(ks, r.k);
  }
  out << "graph,k,numerator,denominator,avg_numerator,avg_denominator,ratio,ratio_pre_final\n";
  for (const auto& g : graphs) {
    for (BlockId k : ks) {
      for (Preset a : presets) {
        for (Preset b : presets) {
          if (a == b) continue;
          out << detail::csv_field(g) << ',' << k << ',' << preset_name(a) << ',' << preset_name(b) << ','
              << detail::csv_number(report.average_cut(g, a, k)) << ','
              << detail::csv_number(report.average_cut(g, b, k)) << ','
              << detail::csv_number(report.ratio_of_averages(g, k, a, b)) << ','
              << detail::csv_number(report.ratio_of_averages(g, k, a, b, true)) << '\n';
        }
      }
    }
  }
}

}  // namespace mlpart
