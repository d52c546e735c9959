#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mlpart/algebraic_distance.hpp"
#include "mlpart/amg.hpp"
#include "mlpart/contraction.hpp"
#include "mlpart/graph.hpp"
#include "mlpart/initial_partition.hpp"
#include "mlpart/matching.hpp"
#include "mlpart/preset.hpp"
#include "mlpart/random.hpp"
#include "mlpart/refinement.hpp"

namespace mlpart {

struct MultilevelConfig {
  Preset preset = Preset::eco;
  RelaxationParams relaxation;  // rng_seed is replaced by a per-level seed
  AmgParams amg;                // max_aggregate_volume is replaced unless overridden below
  std::optional<double> max_aggregate_volume;
  CoarsestPolicy coarsest;
  int max_stall = 300;
  int multitry_max_stall = 100;
  /// Multi-try FM searches per level; 0 picks min(#boundary nodes, 200).
  int multitry_rounds = 0;
  PenaltyForm penalty = PenaltyForm::overload;
  std::optional<MatchingAlgorithm> matching_override;
  std::optional<EdgeRatingKind> rating_override;
  /// Extra sub-cycles per level in an F-cycle; sub-cycles of depth d run
  /// their own sub-cycles with depth d - 1.
  int fcycle_depth = 1;
  /// Coarsening ends after a level keeps more than this fraction of nodes.
  double stall_ratio = 0.95;
  int max_levels = 64;
  /// Matched pairs may weigh at most this fraction of L_max.
  double matching_weight_fraction = 0.25;
  /// Recompute cuts from scratch after every projection and throw
  /// std::logic_error on mismatch.
  bool check_invariants = false;
};

struct Level {
  Graph graph;
  /// Map from this level to the next coarser one (empty on the coarsest).
  std::variant<std::monostate, MatchingMap, InterpolationOperator> to_coarser;
  bool computed_distances = false;
};

/// levels[0] is the input graph; node counts strictly decrease.
struct Hierarchy {
  std::vector<Level> levels;
  CoarseningFamily family = CoarseningFamily::matching;

  std::size_t size() const { return levels.size(); }
  const Graph& coarsest() const { return levels.back().graph; }
  std::size_t distance_computations() const {
    return static_cast<std::size_t>(
        std::count_if(levels.begin(), levels.end(), [](const Level& l) { return l.computed_distances; }));
  }
};

struct MultilevelResult {
  Partition partition;
  /// Cut of the projected partition on the input graph before its refinement.
  double cut_before_finest_refinement = 0.0;
  double uncoarsen_seconds = 0.0;
  std::size_t levels = 1;
  std::size_t distance_computations = 0;
  /// F-cycle sub-cycles run, nested ones included.
  std::size_t sub_cycles = 0;
  /// Cut after each cycle (iterated cycles).
  std::vector<double> cut_history;
};

namespace detail {

enum SeedStream : std::uint64_t {
  kRelaxStream = 1000,
  kMatchStream = 2000,
  kInitialStream = 3000,
  kFmStream = 4000,
  kMultiTryStream = 5000,
  kSubCycleStream = 6000,
};

inline std::uint64_t level_seed(std::uint64_t seed, SeedStream stream, std::size_t level) {
  return derive_seed(seed, stream + level);
}

/// Block of each coarse node given the block of each fine node.
inline std::vector<BlockId> restrict_assignment(const Level& fine, std::span<const BlockId> assignment) {
  std::vector<BlockId> coarse;
  if (const auto* map = std::get_if<MatchingMap>(&fine.to_coarser)) {
    coarse.resize(map->coarse_n());
    for (std::size_t x = 0; x < map->coarse_n(); ++x) coarse[x] = assignment[map->coarse_to_fine[x][0]];
  } else if (const auto* P = std::get_if<InterpolationOperator>(&fine.to_coarser)) {
    coarse.resize(P->coarse_n());
    for (std::size_t p = 0; p < P->coarse_n(); ++p) coarse[p] = assignment[P->aggregate_seed[p]];
  }
  return coarse;
}

/// `candidate` replaces `incumbent` only when it is no worse in both cut
/// and overload.
inline const Partition& no_worse(const Partition& incumbent, const Partition& candidate) {
  return candidate.cut <= incumbent.cut && candidate.overload() <= incumbent.overload() ? candidate : incumbent;
}

}  // namespace detail

/// Builds the hierarchy down to the coarsest-policy size, or until a level
/// shrinks too little. With a `constraint` assignment (a carried
/// partition), no coarse node mixes blocks.
inline Hierarchy coarsen(const Graph& g, const MultilevelConfig& config, BlockId k, double lmax,
                         std::uint64_t seed, std::span<const BlockId> constraint = {}) {
  Hierarchy h;
  h.family = coarsening_family(config.preset);
  h.levels.push_back(Level{g, {}, false});
  std::vector<BlockId> level_constraint(constraint.begin(), constraint.end());
  const std::size_t stop = config.coarsest.stop_size(k);

  for (std::size_t level = 0; level + 1 < static_cast<std::size_t>(config.max_levels); ++level) {
    Level& cur = h.levels.back();
    const Graph& G = cur.graph;
    if (G.n() <= stop) break;

    std::optional<AlgebraicDistances> rho;
    auto ensure_distances = [&] {
      if (rho) return;
      RelaxationParams params = config.relaxation;
      params.rng_seed = detail::level_seed(seed, detail::kRelaxStream, level);
      rho = algebraic_distances(G, params);
      cur.computed_distances = true;
    };
    if (uses_algebraic_distance(config.preset)) ensure_distances();

    Graph coarse;
    std::variant<std::monostate, MatchingMap, InterpolationOperator> map;
    if (h.family == CoarseningFamily::matching) {
      auto choice = choose_matching_algorithm(static_cast<int>(level), k, config.preset);
      if (config.matching_override) choice.algorithm = *config.matching_override;
      if (config.rating_override) choice.rating = *config.rating_override;
      MatchingConstraints constraints{config.matching_weight_fraction * lmax, level_constraint};
      const auto match_seed = detail::level_seed(seed, detail::kMatchStream, level);
      Matching matching;
      if (choice.algorithm == MatchingAlgorithm::random) {
        matching = random_matching(G, match_seed, constraints);
      } else {
        if (choice.rating == EdgeRatingKind::ex_alg) ensure_distances();
        const auto ratings = rate_edges(G, choice.rating, rho ? &*rho : nullptr);
        matching = gpa_matching(G, ratings, match_seed, constraints);
      }
      if (matching.empty()) break;
      auto contraction = contract_matching(G, matching);
      coarse = std::move(contraction.coarse);
      map = std::move(contraction.map);
    } else {
      AmgParams params = config.amg;
      params.max_aggregate_volume = config.max_aggregate_volume.value_or(lmax);
      const auto order = future_volume_order(G, *rho);
      auto roles = select_seeds(G, *rho, order, params.theta, level_constraint);
      auto P = build_interpolation(G, *rho, std::move(roles), order, params, level_constraint);
      coarse = galerkin_coarsen(G, P);
      map = std::move(P);
    }
    if (coarse.n() >= G.n()) break;

    const bool stalled = static_cast<double>(coarse.n()) > config.stall_ratio * static_cast<double>(G.n());
    cur.to_coarser = std::move(map);
    if (!level_constraint.empty()) level_constraint = detail::restrict_assignment(cur, level_constraint);
    h.levels.push_back(Level{std::move(coarse), {}, false});
    if (stalled) break;
  }
  return h;
}

namespace detail {

class CycleRunner {
 public:
  CycleRunner(const MultilevelConfig& config, BlockId k, double epsilon, double lmax)
      : config_(config), k_(k), epsilon_(epsilon), lmax_(lmax) {}

  /// One cycle rooted at `g`. `carried` (optional) is a partition of g the
  /// cycle must not worsen. `depth` > 0 adds F-cycle sub-cycles.
  MultilevelResult run(const Graph& g, std::uint64_t seed, const Partition* carried, int depth) {
    using clock = std::chrono::steady_clock;
    MultilevelResult result;
    const auto constraint =
        carried != nullptr ? std::span<const BlockId>(carried->assignment) : std::span<const BlockId>{};
    Hierarchy h = coarsen(g, config_, k_, lmax_, seed, constraint);
    result.levels = h.size();
    result.distance_computations = h.distance_computations();
    const std::size_t coarsest = h.size() - 1;

    Partition p;
    if (carried != nullptr) {
      std::vector<BlockId> assignment = carried->assignment;
      for (std::size_t l = 0; l < coarsest; ++l) assignment = restrict_assignment(h.levels[l], assignment);
      p = make_partition(h.coarsest(), k_, std::move(assignment), epsilon_, lmax_);
      p = refine(h.coarsest(), std::move(p), seed, coarsest);
    } else {
      p = initial_partition(h.coarsest(), k_, lmax_, config_.coarsest.attempts,
                            level_seed(seed, kInitialStream, coarsest), epsilon_, config_.max_stall);
      if (!p.balanced()) p = rebalance(h.coarsest(), std::move(p), lmax_);
    }

    const auto uncoarsen_start = clock::now();
    // v_path follows exactly what a plain V-cycle with this seed computes;
    // it only exists while the F-cycle path has diverged from it.
    std::optional<Partition> v_path;
    auto junction = [&](std::size_t level) {
      if (depth <= 0 || level == 0) return;
      if (!v_path) v_path = p;
      auto sub = run(h.levels[level].graph, level_seed(seed, kSubCycleStream, level), &p, depth - 1);
      result.sub_cycles += 1 + sub.sub_cycles;
      p = no_worse(p, sub.partition);
      p = no_worse(*v_path, p);
      if (p.assignment == v_path->assignment) v_path.reset();
    };
    junction(coarsest);

    for (std::size_t l = coarsest; l-- > 0;) {
      const Graph& G = h.levels[l].graph;
      p = project(h.levels[l], std::move(p));
      if (v_path) v_path = project(h.levels[l], std::move(*v_path));
      if (l == 0) result.cut_before_finest_refinement = p.cut;
      p = repair_and_refine(G, std::move(p), seed, l);
      if (v_path) {
        v_path = repair_and_refine(G, std::move(*v_path), seed, l);
        p = no_worse(*v_path, p);
        if (p.assignment == v_path->assignment) v_path.reset();
      }
      junction(l);
    }
    if (coarsest == 0) result.cut_before_finest_refinement = p.cut;
    result.uncoarsen_seconds = std::chrono::duration<double>(clock::now() - uncoarsen_start).count();

    p.cut = cut(g, p.assignment);
    p.block_weight = block_weights(g, p.assignment, k_);
    if (carried != nullptr) p = no_worse(*carried, p);
    result.partition = std::move(p);
    return result;
  }

 private:
  Partition project(const Level& fine, Partition coarse) const {
    Partition p;
    if (const auto* map = std::get_if<MatchingMap>(&fine.to_coarser)) {
      p = project_matching(coarse, *map);
    } else {
      p = project_amg(fine.graph, coarse, std::get<InterpolationOperator>(fine.to_coarser), lmax_, config_.penalty);
    }
    if (config_.check_invariants) {
      const double fresh = cut(fine.graph, p.assignment);
      if (std::abs(fresh - p.cut) > 1e-9 * std::max(1.0, fresh)) {
        throw std::logic_error("projected cut differs from recomputation");
      }
    }
    return p;
  }

  Partition repair_and_refine(const Graph& G, Partition p, std::uint64_t seed, std::size_t level) const {
    if (!p.balanced()) p = rebalance(G, std::move(p), lmax_);
    return refine(G, std::move(p), seed, level);
  }

  Partition refine(const Graph& G, Partition p, std::uint64_t seed, std::size_t level) const {
    p = fm_refine(G, std::move(p), lmax_, config_.max_stall, level_seed(seed, kFmStream, level));
    if (uses_multi_try_fm(config_.preset)) {
      int rounds = config_.multitry_rounds;
      if (rounds <= 0) rounds = static_cast<int>(std::min<std::size_t>(boundary_nodes(G, p).size(), 200));
      FmOptions options;
      options.max_stall = config_.multitry_max_stall;
      p = multi_try_fm(G, std::move(p), lmax_, rounds, level_seed(seed, kMultiTryStream, level), options);
    }
    if (config_.check_invariants) {
      const double fresh = cut(G, p.assignment);
      if (std::abs(fresh - p.cut) > 1e-9 * std::max(1.0, fresh)) {
        throw std::logic_error("refined cut differs from recomputation");
      }
    }
    return p;
  }

  const MultilevelConfig& config_;
  BlockId k_;
  double epsilon_;
  double lmax_;
};

inline MultilevelResult trivial_result(const Graph& g, BlockId k, double epsilon) {
  MultilevelResult r;
  r.partition = make_partition(g, k, std::vector<BlockId>(g.n(), 0), epsilon);
  r.cut_history.push_back(0.0);
  return r;
}

}  // namespace detail

/// Coarsen, partition the coarsest graph, then project and refine level by
/// level.
inline MultilevelResult v_cycle(const Graph& g, BlockId k, double epsilon, const MultilevelConfig& config,
                                std::uint64_t seed) {
  if (k <= 1) return detail::trivial_result(g, std::max<BlockId>(k, 1), epsilon);
  const double lmax = compute_lmax(g, k, epsilon);
  detail::CycleRunner runner(config, k, epsilon, lmax);
  auto r = runner.run(g, seed, nullptr, 0);
  r.cut_history.push_back(r.partition.cut);
  return r;
}

/// Like v_cycle, but after refining each level below the finest, runs one
/// more cycle rooted at that level with the current partition carried in.
/// At every junction the result is kept no worse than what the plain
/// V-cycle with the same seed holds there.
inline MultilevelResult f_cycle(const Graph& g, BlockId k, double epsilon, const MultilevelConfig& config,
                                std::uint64_t seed) {
  if (k <= 1) return detail::trivial_result(g, std::max<BlockId>(k, 1), epsilon);
  const double lmax = compute_lmax(g, k, epsilon);
  detail::CycleRunner runner(config, k, epsilon, lmax);
  auto r = runner.run(g, seed, nullptr, std::max(1, config.fcycle_depth));
  r.cut_history.push_back(r.partition.cut);
  return r;
}

/// Repeated cycles with seeds seed, seed+1, ...; every cycle after the first
/// coarsens within the blocks of the current partition and never returns a
/// worse one, so cut_history is non-increasing.
inline MultilevelResult iterated_v_cycles(const Graph& g, BlockId k, double epsilon, const MultilevelConfig& config,
                                          int iterations, std::uint64_t seed) {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  const bool f = cycle_kind(config.preset) == CycleKind::f_cycle;
  auto result = f ? f_cycle(g, k, epsilon, config, seed) : v_cycle(g, k, epsilon, config, seed);
  if (k <= 1) return result;
  const double lmax = compute_lmax(g, k, epsilon);
  detail::CycleRunner runner(config, k, epsilon, lmax);
  for (int t = 1; t < iterations; ++t) {
    auto next = runner.run(g, seed + static_cast<std::uint64_t>(t), &result.partition,
                           f ? std::max(1, config.fcycle_depth) : 0);
    result.partition = detail::no_worse(result.partition, next.partition);
    result.cut_before_finest_refinement = next.cut_before_finest_refinement;
    result.uncoarsen_seconds += next.uncoarsen_seconds;
    result.distance_computations += next.distance_computations;
    result.sub_cycles += next.sub_cycles;
    result.cut_history.push_back(result.partition.cut);
  }
  return result;
}

/// Entry point used by the tools: cycle type follows the preset.
inline MultilevelResult partition_graph(const Graph& g, BlockId k, double epsilon, const MultilevelConfig& config,
                                        std::uint64_t seed, int iterations = 1) {
  return iterated_v_cycles(g, k, epsilon, config, iterations, seed);
}

}  // namespace mlpart
