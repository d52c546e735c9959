// Command-line front end: partition graphs, inspect algebraic distances and
// coarsest levels, generate instances and run benchmarks.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlpart/algebraic_distance.hpp"
#include "mlpart/bench.hpp"
#include "mlpart/generators.hpp"
#include "mlpart/graph_io.hpp"
#include "mlpart/initial_partition.hpp"
#include "mlpart/multilevel.hpp"

namespace {

using namespace mlpart;

struct ConfigOptions {
  std::string preset = "eco";
  std::optional<std::string> matching;
  std::optional<std::string> rating;
  std::optional<std::string> penalty;
  std::optional<double> theta;
  std::optional<int> kappa;
  std::optional<double> max_agg_volume;
  std::optional<int> coarsest_attempts;
  std::optional<int> stop_threshold;
  std::optional<int> max_stall;
  std::optional<int> fcycle_depth;
  std::optional<double> alpha;
  std::optional<int> vectors;
  std::optional<int> sweeps;
  bool check_invariants = false;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "eco, eco-alg, f-cycle, strong, amg-eco or amg")->capture_default_str();
    app->add_option("--matching", matching, "override matching: random or gpa");
    app->add_option("--rating", rating, "override edge rating: exp2, innerouter or exalg");
    app->add_option("--penalty-form", penalty, "AMG projection penalty: overload or printed");
    app->add_option("--theta", theta, "seed-selection threshold");
    app->add_option("--kappa", kappa, "interpolation candidate list length");
    app->add_option("--max-agg-volume", max_agg_volume, "aggregate volume cap (default L_max)");
    app->add_option("--coarsest-attempts", coarsest_attempts, "initial partitioning attempts");
    app->add_option("--stop-threshold", stop_threshold, "coarsest size per block");
    app->add_option("--max-stall", max_stall, "FM moves without improvement before stopping");
    app->add_option("--fcycle-depth", fcycle_depth, "sub-cycle recursion depth for f-cycle");
    app->add_option("--alpha", alpha, "relaxation damping");
    app->add_option("--vectors", vectors, "test vectors for algebraic distance");
    app->add_option("--sweeps", sweeps, "relaxation sweeps per vector");
    app->add_flag("--check-invariants", check_invariants, "recheck cuts after every projection");
  }

  MultilevelConfig build() const {
    MultilevelConfig c;
    c.preset = parse_preset(preset);
    if (matching) {
      if (*matching == "random") {
        c.matching_override = MatchingAlgorithm::random;
      } else if (*matching == "gpa") {
        c.matching_override = MatchingAlgorithm::gpa;
      } else {
        throw std::invalid_argument("unknown matching '" + *matching + "'");
      }
    }
    if (rating) c.rating_override = parse_rating(*rating);
    if (penalty) c.penalty = parse_penalty(*penalty);
    if (theta) c.amg.theta = *theta;
    if (kappa) c.amg.kappa = *kappa;
    if (max_agg_volume) c.max_aggregate_volume = *max_agg_volume;
    if (coarsest_attempts) c.coarsest.attempts = *coarsest_attempts;
    if (stop_threshold) c.coarsest.stop_threshold = *stop_threshold;
    if (max_stall) c.max_stall = *max_stall;
    if (fcycle_depth) c.fcycle_depth = *fcycle_depth;
    if (alpha) c.relaxation.alpha = *alpha;
    if (vectors) c.relaxation.num_vectors = *vectors;
    if (sweeps) c.relaxation.num_iterations = *sweeps;
    c.check_invariants = check_invariants;
    return c;
  }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (auto dots = item.find(".."); dots != std::string::npos) {
      const auto lo = std::stoull(item.substr(0, dots));
      const auto hi = std::stoull(item.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("empty seed range " + item);
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!item.empty()) {
      seeds.push_back(std::stoull(item));
    }
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) name.erase(dot);
  return name;
}

void write_to(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel graph partitioning with algebraic-distance and AMG coarsening"};
  app.require_subcommand(1);
  int exit_code = 0;

  // partition
  auto* part = app.add_subcommand("partition", "Partition a graph into k blocks");
  std::string graph_path;
  std::string output_path;
  unsigned k = 2;
  double epsilon = 0.03;
  std::uint64_t seed = 1;
  int iterations = 1;
  ConfigOptions part_options;
  part->add_option("graph", graph_path, "graph file (Metis format)")->required()->check(CLI::ExistingFile);
  part->add_option("--k", k, "number of blocks")->capture_default_str()->check(CLI::PositiveNumber);
  part->add_option("--epsilon", epsilon, "imbalance")->capture_default_str()->check(CLI::NonNegativeNumber);
  part->add_option("--seed", seed, "random seed")->capture_default_str();
  part->add_option("--iterations", iterations, "iterated cycles")->capture_default_str()->check(CLI::PositiveNumber);
  part->add_option("--output", output_path, "partition file (default: stdout)");
  part_options.attach(part);
  part->callback([&] {
    const Graph g = read_graph_file(graph_path);
    const auto config = part_options.build();
    const auto result = partition_graph(g, k, epsilon, config, seed, iterations);
    std::ostringstream out;
    write_partition(out, result.partition.assignment);
    write_to(output_path, out.str());
    std::cerr << "cut " << detail::format_real(result.partition.cut) << " levels " << result.levels
              << (result.partition.balanced() ? "" : " UNBALANCED") << '\n';
    if (!result.partition.balanced()) exit_code = 2;
  });

  // distances
  auto* dist = app.add_subcommand("distances", "Print algebraic distance of every edge (1-based ids)");
  RelaxationParams relax;
  dist->add_option("graph", graph_path, "graph file")->required()->check(CLI::ExistingFile);
  dist->add_option("--alpha", relax.alpha)->capture_default_str();
  dist->add_option("--vectors", relax.num_vectors)->capture_default_str();
  dist->add_option("--sweeps", relax.num_iterations)->capture_default_str();
  dist->add_option("--seed", relax.rng_seed)->capture_default_str();
  dist->callback([&] {
    const Graph g = read_graph_file(graph_path);
    const auto rho = algebraic_distances(g, relax);
    std::ostringstream out;
    for (EdgeId e = 0; e < g.m(); ++e) {
      out << g.edge(e).u + 1 << ' ' << g.edge(e).v + 1 << ' ' << detail::format_real(rho[e]) << '\n';
    }
    write_to("", out.str());
  });

  // export-coarsest
  auto* coarsest = app.add_subcommand("export-coarsest",
                                      "Write the coarsest graph of the hierarchy with integral edge weights");
  ConfigOptions coarse_options;
  coarsest->add_option("graph", graph_path, "graph file")->required()->check(CLI::ExistingFile);
  coarsest->add_option("--k", k)->capture_default_str()->check(CLI::PositiveNumber);
  coarsest->add_option("--epsilon", epsilon)->capture_default_str();
  coarsest->add_option("--seed", seed)->capture_default_str();
  coarsest->add_option("--output", output_path, "output graph file (default: stdout)");
  coarse_options.attach(coarsest);
  coarsest->callback([&] {
    const Graph g = read_graph_file(graph_path);
    const auto config = coarse_options.build();
    const auto h = coarsen(g, config, k, compute_lmax(g, k, epsilon), seed);
    write_to(output_path, serialize_graph(normalize_and_round(h.coarsest(), seed)));
  });

  // gen-hard
  auto* gen_hard = app.add_subcommand("gen-hard", "Generate a hard mixture instance from a spec file");
  std::string spec_path;
  gen_hard->add_option("--spec", spec_path, "mixture spec (key=value lines)")->required()->check(CLI::ExistingFile);
  gen_hard->add_option("--out", output_path, "output graph file")->required();
  gen_hard->callback([&] {
    const auto mix = generate_hard_mixture(read_mixture_spec(spec_path));
    write_graph_file(output_path, mix.graph);
    for (std::size_t i = 1; i < mix.inter_edges.size(); ++i) {
      std::cerr << "component " << i << ": " << mix.inter_edges[i] << " inter-edges\n";
    }
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Run every graph/preset/k/seed combination and write CSV reports");
  std::vector<std::string> graph_paths;
  std::vector<std::string> preset_names{"eco", "eco-alg", "amg-eco"};
  std::vector<unsigned> ks{2, 4, 8};
  std::string seed_list = "1..10";
  std::string ratios_path;
  bool no_timings = false;
  bench->add_option("--graphs", graph_paths, "graph files")->required()->check(CLI::ExistingFile);
  bench->add_option("--presets", preset_names, "presets")->delimiter(',')->capture_default_str();
  bench->add_option("--ks", ks, "block counts")->delimiter(',')->capture_default_str();
  bench->add_option("--seeds", seed_list, "seed list, e.g. 1..10 or 1,5,9")->capture_default_str();
  bench->add_option("--epsilon", epsilon)->capture_default_str();
  bench->add_option("--iterations", iterations)->capture_default_str();
  bench->add_option("--out", output_path, "per-run CSV")->required();
  bench->add_option("--ratios", ratios_path, "ratio CSV (default: <out> with .ratios.csv)");
  bench->add_flag("--no-timings", no_timings, "omit timing columns");
  bench->callback([&] {
    std::vector<NamedGraph> graphs;
    for (const auto& p : graph_paths) graphs.push_back({stem_of(p), read_graph_file(p)});
    std::vector<Preset> presets;
    for (const auto& name : preset_names) presets.push_back(parse_preset(name));
    std::vector<BlockId> block_counts(ks.begin(), ks.end());
    const auto seeds = parse_seed_list(seed_list);
    ExperimentOptions options;
    options.epsilon = epsilon;
    options.iterations = iterations;
    const auto report = run_experiment(graphs, presets, block_counts, seeds, options);
    std::ostringstream runs;
    write_runs_csv(runs, report, !no_timings);
    write_to(output_path, runs.str());
    std::ostringstream ratios;
    write_ratios_csv(ratios, report);
    if (ratios_path.empty()) {
      ratios_path = output_path;
      if (ratios_path.size() > 4 && ratios_path.ends_with(".csv")) ratios_path.resize(ratios_path.size() - 4);
      ratios_path += ".ratios.csv";
    }
    write_to(ratios_path, ratios.str());
  });

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic graph");
  std::string kind;
  std::size_t rows = 32;
  std::size_t cols = 32;
  std::size_t nodes = 1000;
  std::size_t degree = 2;
  std::size_t edges = 0;
  double prob = 0.0;
  gen->add_option("kind", kind, "grid, pa, gnm or gnp")->required()->check(CLI::IsMember({"grid", "pa", "gnm", "gnp"}));
  gen->add_option("--rows", rows)->capture_default_str();
  gen->add_option("--cols", cols)->capture_default_str();
  gen->add_option("--nodes", nodes)->capture_default_str();
  gen->add_option("--edges-per-node", degree, "preferential attachment out-degree")->capture_default_str();
  gen->add_option("--edges", edges, "edge count for gnm");
  gen->add_option("--p", prob, "edge probability for gnp");
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--out", output_path, "output graph file (default: stdout)");
  gen->callback([&] {
    Graph g;
    if (kind == "grid") {
      g = grid2d(rows, cols);
    } else if (kind == "pa") {
      g = preferential_attachment(nodes, degree, seed);
    } else if (kind == "gnm") {
      g = gnm(nodes, edges, seed);
    } else {
      g = gnp(nodes, prob, seed);
    }
    write_to(output_path, serialize_graph(g));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
