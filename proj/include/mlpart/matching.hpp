#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlpart/algebraic_distance.hpp"
#include "mlpart/contraction.hpp"
#include "mlpart/graph.hpp"
#include "mlpart/preset.hpp"
#include "mlpart/random.hpp"

namespace mlpart {

enum class EdgeRatingKind { expansion_squared, inner_outer, ex_alg };

inline std::string_view rating_name(EdgeRatingKind kind) {
  switch (kind) {
    case EdgeRatingKind::expansion_squared: return "exp2";
    case EdgeRatingKind::inner_outer: return "innerouter";
    case EdgeRatingKind::ex_alg: return "exalg";
  }
  return "?";
}

inline EdgeRatingKind parse_rating(std::string_view name) {
  if (name == "exp2") return EdgeRatingKind::expansion_squared;
  if (name == "innerouter") return EdgeRatingKind::inner_outer;
  if (name == "exalg") return EdgeRatingKind::ex_alg;
  throw std::invalid_argument("unknown edge rating '" + std::string(name) + "'");
}

inline constexpr double kInfiniteRating = std::numeric_limits<double>::infinity();

namespace detail {

inline double expansion_squared(double w, double cu, double cv) {
  const double denom = cu * cv;
  return denom > 0.0 ? w * w / denom : kInfiniteRating;
}

inline double inner_outer(double w, double out_u, double out_v) {
  const double denom = out_u + out_v - 2.0 * w;
  // Rounding can leave a tiny residue when the edge is the only incidence.
  return denom > 1e-12 * std::max(1.0, out_u + out_v) ? w / denom : kInfiniteRating;
}

}  // namespace detail

/// Rating of edge e. ex_alg needs `rho`. innerOuter with a zero
/// denominator (the edge is the only incidence of both endpoints) is +inf.
inline double rate_edge(const Graph& g, EdgeId e, EdgeRatingKind kind,
                        const AlgebraicDistances* rho = nullptr) {
  const auto& edge = g.edge(e);
  const double cu = g.node_weight(edge.u);
  const double cv = g.node_weight(edge.v);
  switch (kind) {
    case EdgeRatingKind::expansion_squared:
      return detail::expansion_squared(edge.weight, cu, cv);
    case EdgeRatingKind::inner_outer:
      return detail::inner_outer(edge.weight, g.weighted_degree(edge.u), g.weighted_degree(edge.v));
    case EdgeRatingKind::ex_alg:
      if (rho == nullptr) throw std::invalid_argument("ex_alg rating requires algebraic distances");
      return detail::expansion_squared(edge.weight, cu, cv) / rho->clamped(e);
  }
  return 0.0;
}

/// Ratings for all edges; same values as rate_edge, computed in O(m).
inline std::vector<double> rate_edges(const Graph& g, EdgeRatingKind kind,
                                      const AlgebraicDistances* rho = nullptr) {
  if (kind == EdgeRatingKind::ex_alg && rho == nullptr) {
    throw std::invalid_argument("ex_alg rating requires algebraic distances");
  }
  std::vector<double> out_weight;
  if (kind == EdgeRatingKind::inner_outer) {
    out_weight.resize(g.n());
    for (NodeId v = 0; v < g.n(); ++v) out_weight[v] = g.weighted_degree(v);
  }
  std::vector<double> ratings(g.m());
  for (EdgeId e = 0; e < g.m(); ++e) {
    const auto& edge = g.edge(e);
    switch (kind) {
      case EdgeRatingKind::expansion_squared:
        ratings[e] = detail::expansion_squared(edge.weight, g.node_weight(edge.u), g.node_weight(edge.v));
        break;
      case EdgeRatingKind::inner_outer:
        ratings[e] = detail::inner_outer(edge.weight, out_weight[edge.u], out_weight[edge.v]);
        break;
      case EdgeRatingKind::ex_alg:
        ratings[e] = detail::expansion_squared(edge.weight, g.node_weight(edge.u), g.node_weight(edge.v)) /
                     rho->clamped(e);
        break;
    }
  }
  return ratings;
}

/// Restrictions applied by the multilevel driver: a cap on the merged node
/// weight, and (when a partition is carried between cycles) a block
/// assignment that matched edges must not cross.
struct MatchingConstraints {
  double max_pair_weight = std::numeric_limits<double>::infinity();
  std::span<const BlockId> same_block{};

  bool allows(const Graph& g, const WeightedEdge& e) const {
    if (g.node_weight(e.u) + g.node_weight(e.v) > max_pair_weight) return false;
    return same_block.empty() || same_block[e.u] == same_block[e.v];
  }
};

/// Visits nodes in random order; an unmatched node picks a uniformly random
/// unmatched admissible neighbor.
inline Matching random_matching(const Graph& g, std::uint64_t seed,
                                const MatchingConstraints& constraints = {}) {
  Rng rng(seed);
  std::vector<NodeId> order(g.n());
  std::iota(order.begin(), order.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(order));

  std::vector<char> matched(g.n(), 0);
  std::vector<EdgeId> candidates;
  Matching matching;
  for (NodeId v : order) {
    if (matched[v]) continue;
    candidates.clear();
    auto nb = g.neighbors(v);
    auto ids = g.incident_edges(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (!matched[nb[i]] && constraints.allows(g, g.edge(ids[i]))) candidates.push_back(ids[i]);
    }
    if (candidates.empty()) continue;
    const EdgeId e = candidates[rng.bounded(candidates.size())];
    matched[g.edge(e).u] = matched[g.edge(e).v] = 1;
    matching.push_back(e);
  }
  std::sort(matching.begin(), matching.end());
  return matching;
}

namespace detail {

/// Path score where +inf ratings are counted separately so that the DP
/// stays exact: compare by number of infinite edges, then by finite sum.
struct PathScore {
  long infinite = 0;
  double finite = 0.0;

  PathScore plus(double rating) const {
    return std::isinf(rating) ? PathScore{infinite + 1, finite} : PathScore{infinite, finite + rating};
  }
  bool better_than(const PathScore& o) const {
    return infinite != o.infinite ? infinite > o.infinite : finite > o.finite;
  }
};

/// Maximum-weight matching on the path with edge ratings r[first..last).
/// Appends chosen indices (relative to the full array) to `out`.
inline PathScore solve_path(std::span<const double> r, std::size_t first, std::size_t last,
                            std::vector<std::size_t>* out) {
  if (last <= first) return {};
  const std::size_t len = last - first;
  std::vector<PathScore> best(len + 1);
  for (std::size_t i = 1; i <= len; ++i) {
    best[i] = best[i - 1];
    const PathScore take = (i >= 2 ? best[i - 2] : PathScore{}).plus(r[first + i - 1]);
    if (take.better_than(best[i])) best[i] = take;
  }
  if (out != nullptr) {
    std::size_t i = len;
    while (i >= 1) {
      const PathScore take = (i >= 2 ? best[i - 2] : PathScore{}).plus(r[first + i - 1]);
      if (take.better_than(best[i - 1])) {
        out->push_back(first + i - 1);
        i = i >= 2 ? i - 2 : 0;
      } else {
        --i;
      }
    }
  }
  return best[len];
}

}  // namespace detail

/// Exact maximum-weight matching of a path (edges 0..L-1 in order) or of a
/// cycle (edge L-1 also touches edge 0). Returns chosen indices ascending.
inline std::vector<std::size_t> max_weight_path_matching(std::span<const double> ratings, bool cycle) {
  std::vector<std::size_t> chosen;
  const std::size_t len = ratings.size();
  if (!cycle || len < 3) {
    detail::solve_path(ratings, 0, len, &chosen);
  } else {
    // Either edge 0 is unused, or it is used and both its cycle neighbors are not.
    const auto without_first = detail::solve_path(ratings, 1, len, nullptr);
    const auto with_first = detail::solve_path(ratings, 2, len - 1, nullptr).plus(ratings[0]);
    if (with_first.better_than(without_first)) {
      chosen.push_back(0);
      detail::solve_path(ratings, 2, len - 1, &chosen);
    } else {
      detail::solve_path(ratings, 1, len, &chosen);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

/// Paths and even cycles grown by the Global Paths Algorithm.
struct PathSet {
  struct Component {
    std::vector<EdgeId> edges;  // consecutive along the path / cycle
    bool cycle = false;
  };
  std::vector<Component> components;
};

/// Scans edges by (rating desc, edge id asc) and keeps every applicable
/// edge: one joining endpoints of two different paths, or closing a path
/// with an odd number of edges into an even cycle.
inline PathSet grow_paths(const Graph& g, std::span<const double> ratings,
                          const MatchingConstraints& constraints = {}) {
  std::vector<EdgeId> order;
  order.reserve(g.m());
  for (EdgeId e = 0; e < g.m(); ++e) {
    if (ratings[e] > 0.0 && constraints.allows(g, g.edge(e))) order.push_back(e);
  }
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    return ratings[a] != ratings[b] ? ratings[a] > ratings[b] : a < b;
  });

  const auto n = g.n();
  std::vector<std::uint8_t> deg(n, 0);
  std::vector<NodeId> other_end(n);
  std::iota(other_end.begin(), other_end.end(), NodeId{0});
  std::vector<std::size_t> length(n, 0);  // path length, valid at path ends
  std::vector<std::array<EdgeId, 2>> incident(n);

  auto attach = [&](EdgeId e) {
    const auto& edge = g.edge(e);
    incident[edge.u][deg[edge.u]++] = e;
    incident[edge.v][deg[edge.v]++] = e;
  };
  for (EdgeId e : order) {
    const NodeId u = g.edge(e).u;
    const NodeId v = g.edge(e).v;
    if (deg[u] >= 2 || deg[v] >= 2) continue;
    if (other_end[u] == v) {
      if (length[u] % 2 == 1) attach(e);
      continue;
    }
    const NodeId a = other_end[u];
    const NodeId b = other_end[v];
    const std::size_t joined = length[u] + length[v] + 1;
    attach(e);
    other_end[a] = b;
    other_end[b] = a;
    length[a] = length[b] = joined;
  }

  PathSet result;
  std::vector<char> visited(n, 0);
  auto walk = [&](NodeId start, bool cycle) {
    PathSet::Component comp;
    comp.cycle = cycle;
    NodeId cur = start;
    EdgeId prev = static_cast<EdgeId>(g.m());
    visited[cur] = 1;
    while (true) {
      EdgeId next = static_cast<EdgeId>(g.m());
      for (int i = 0; i < deg[cur]; ++i) {
        if (incident[cur][i] != prev) {
          next = incident[cur][i];
          break;
        }
      }
      if (next == g.m()) break;
      const auto& edge = g.edge(next);
      const NodeId nxt = edge.u == cur ? edge.v : edge.u;
      comp.edges.push_back(next);
      prev = next;
      cur = nxt;
      if (visited[cur]) break;
      visited[cur] = 1;
    }
    result.components.push_back(std::move(comp));
  };
  for (NodeId v = 0; v < n; ++v) {
    if (!visited[v] && deg[v] == 1) walk(v, false);
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!visited[v] && deg[v] == 2) walk(v, true);
  }
  return result;
}

/// Global Paths Algorithm: grow paths and even cycles, then solve each one
/// exactly by dynamic programming. `seed` is accepted for interface
/// symmetry with random_matching; the scan order is fully determined by
/// (rating desc, edge id asc).
inline Matching gpa_matching(const Graph& g, std::span<const double> ratings, std::uint64_t /*seed*/ = 0,
                             const MatchingConstraints& constraints = {}) {
  const auto paths = grow_paths(g, ratings, constraints);
  Matching matching;
  std::vector<double> local;
  for (const auto& comp : paths.components) {
    local.resize(comp.edges.size());
    for (std::size_t i = 0; i < comp.edges.size(); ++i) local[i] = ratings[comp.edges[i]];
    for (std::size_t idx : max_weight_path_matching(local, comp.cycle)) matching.push_back(comp.edges[idx]);
  }
  std::sort(matching.begin(), matching.end());
  return matching;
}

enum class MatchingAlgorithm { random, gpa };

inline std::string_view matching_name(MatchingAlgorithm a) { return a == MatchingAlgorithm::random ? "random" : "gpa"; }

struct MatchingChoice {
  MatchingAlgorithm algorithm;
  EdgeRatingKind rating;
};

/// Number of leading levels matched randomly by RandomGPA:
/// max{2, 7 - floor(log2 k)}.
inline int random_matching_levels(BlockId k) {
  const int log_k = k == 0 ? 0 : std::bit_width(k) - 1;
  return std::max(2, 7 - log_k);
}

/// Matching algorithm and rating for a given level under a matching preset.
inline MatchingChoice choose_matching_algorithm(int level, BlockId k, Preset preset) {
  switch (preset) {
    case Preset::eco:
      if (level < random_matching_levels(k)) return {MatchingAlgorithm::random, EdgeRatingKind::expansion_squared};
      return {MatchingAlgorithm::gpa, EdgeRatingKind::expansion_squared};
    case Preset::eco_alg:
      return {MatchingAlgorithm::gpa, EdgeRatingKind::ex_alg};
    case Preset::strong:
    case Preset::f_cycle:
      return {MatchingAlgorithm::gpa, level == 0 ? EdgeRatingKind::inner_outer : EdgeRatingKind::expansion_squared};
    case Preset::amg_eco:
    case Preset::amg:
      break;
  }
  throw std::invalid_argument("preset '" + std::string(preset_name(preset)) + "' does not coarsen by matching");
}

}  // namespace mlpart
