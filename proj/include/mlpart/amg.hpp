#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlpart/algebraic_distance.hpp"
#include "mlpart/contraction.hpp"
#include "mlpart/graph.hpp"

namespace mlpart {

struct AmgParams {
  /// Coupling-strength threshold for leaving a node in F.
  double theta = 0.5;
  /// Candidate list length: at most kappa strongest C-connections per F-node.
  int kappa = 10;
  /// Upper bound on aggregate volume; the driver sets it to L_max.
  double max_aggregate_volume = std::numeric_limits<double>::infinity();
};

enum class NodeRole : std::uint8_t { fine, coarse };

struct InterpolationEntry {
  NodeId aggregate;
  double weight;
};

/// Row of P: one or two (aggregate, weight) pairs.
struct InterpolationRow {
  std::array<InterpolationEntry, 2> entries{};
  std::uint8_t size = 0;

  std::span<const InterpolationEntry> view() const { return {entries.data(), size}; }
  void push(NodeId aggregate, double weight) { entries[size++] = {aggregate, weight}; }
};

/// Sparse fine-to-coarse interpolation operator P.
struct InterpolationOperator {
  std::vector<InterpolationRow> rows;
  /// Role after interpolation; F-nodes promoted for balance end up coarse.
  std::vector<NodeRole> role;
  /// Founding C-node of each aggregate.
  std::vector<NodeId> aggregate_seed;
  /// sum_j c(j) P_jp.
  std::vector<double> aggregate_volume;
  std::size_t promoted = 0;

  std::size_t coarse_n() const { return aggregate_seed.size(); }
};

namespace detail {

inline std::vector<double> total_strength(const Graph& g, const AlgebraicDistances& rho) {
  std::vector<double> s(g.n(), 0.0);
  for (NodeId v = 0; v < g.n(); ++v) {
    for (EdgeId e : g.incident_edges(v)) s[v] += rho.strength(e);
  }
  return s;
}

inline bool same_block(std::span<const BlockId> constraint, NodeId a, NodeId b) {
  return constraint.empty() || constraint[a] == constraint[b];
}

}  // namespace detail

/// Nodes by descending future volume
///   nu(i) = c(i) + sum_{j in N(i)} c(j) * (1/rho_ij) / sum_{u in N(j)} 1/rho_ju,
/// ties by ascending id.
inline std::vector<NodeId> future_volume_order(const Graph& g, const AlgebraicDistances& rho) {
  const auto strength = detail::total_strength(g, rho);
  std::vector<double> nu(g.n());
  for (NodeId i = 0; i < g.n(); ++i) {
    double v = g.node_weight(i);
    auto nb = g.neighbors(i);
    auto ids = g.incident_edges(i);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      v += g.node_weight(nb[t]) * rho.strength(ids[t]) / strength[nb[t]];
    }
    nu[i] = v;
  }
  std::vector<NodeId> order(g.n());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return nu[a] > nu[b]; });
  return order;
}

/// Seed selection. Visits nodes in `order`; node i stays in F iff
///   sum_{j in N(i) cap C} 1/rho_ij >= theta * sum_{j in N(i)} 1/rho_ij
/// with a non-empty right-hand side, otherwise it joins C. With a
/// `constraint` assignment, edges crossing blocks are ignored.
inline std::vector<NodeRole> select_seeds(const Graph& g, const AlgebraicDistances& rho,
                                          std::span<const NodeId> order, double theta,
                                          std::span<const BlockId> constraint = {}) {
  if (order.size() != g.n()) throw std::invalid_argument("order must be a permutation of the nodes");
  std::vector<NodeRole> role(g.n(), NodeRole::fine);
  for (NodeId i : order) {
    double to_coarse = 0.0;
    double total = 0.0;
    auto nb = g.neighbors(i);
    auto ids = g.incident_edges(i);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      if (!detail::same_block(constraint, i, nb[t])) continue;
      const double s = rho.strength(ids[t]);
      total += s;
      if (role[nb[t]] == NodeRole::coarse) to_coarse += s;
    }
    const bool stays_fine = total > 0.0 && to_coarse >= theta * total;
    if (!stays_fine) role[i] = NodeRole::coarse;
  }
  return role;
}

/// Builds P with interpolation order at most two.
///
/// C-nodes found their own aggregate (weight 1). F-nodes, visited in
/// `order`, take the pair of candidate C-neighbors with the smallest
/// rho_e1 + rho_e2 among their kappa strongest (smallest rho) C-connections
/// such that neither aggregate exceeds max_aggregate_volume after receiving
/// its share of c(i); failing that, the single strongest admissible
/// C-neighbor; failing that, the node is promoted to C. Weights are
/// P_iI(j) = 1 / (rho_ij * sum_{k in N} 1/rho_ik).
inline InterpolationOperator build_interpolation(const Graph& g, const AlgebraicDistances& rho,
                                                 std::vector<NodeRole> role, std::span<const NodeId> order,
                                                 const AmgParams& params,
                                                 std::span<const BlockId> constraint = {}) {
  if (role.size() != g.n() || order.size() != g.n()) {
    throw std::invalid_argument("role and order must cover every node");
  }
  if (params.kappa < 1) throw std::invalid_argument("kappa must be at least 1");
  const double cap = params.max_aggregate_volume;

  InterpolationOperator P;
  P.rows.resize(g.n());
  std::vector<NodeId> aggregate_of(g.n(), kInvalidNode);
  std::vector<double> volume;
  auto found_aggregate = [&](NodeId i) {
    aggregate_of[i] = static_cast<NodeId>(P.aggregate_seed.size());
    P.aggregate_seed.push_back(i);
    volume.push_back(g.node_weight(i));
    P.rows[i].push(aggregate_of[i], 1.0);
  };
  for (NodeId i = 0; i < g.n(); ++i) {
    if (role[i] == NodeRole::coarse) found_aggregate(i);
  }

  struct Candidate {
    NodeId node;
    double rho;
  };
  std::vector<Candidate> candidates;
  for (NodeId i : order) {
    if (role[i] == NodeRole::coarse) continue;
    const double ci = g.node_weight(i);
    candidates.clear();
    auto nb = g.neighbors(i);
    auto ids = g.incident_edges(i);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      if (role[nb[t]] == NodeRole::coarse && detail::same_block(constraint, i, nb[t])) {
        candidates.push_back({nb[t], rho.clamped(ids[t])});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.rho < b.rho; });

    auto fits = [&](NodeId j, double share) { return volume[aggregate_of[j]] + share <= cap; };

    // Best admissible pair among the kappa strongest.
    const std::size_t limit = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(params.kappa));
    std::size_t best_a = limit;
    std::size_t best_b = limit;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < limit; ++a) {
      for (std::size_t b = a + 1; b < limit; ++b) {
        const double sum = candidates[a].rho + candidates[b].rho;
        if (!(sum < best_sum)) continue;
        const double sa = 1.0 / candidates[a].rho;
        const double sb = 1.0 / candidates[b].rho;
        const double wa = 1.0 / (candidates[a].rho * (sa + sb));
        const double wb = 1.0 / (candidates[b].rho * (sa + sb));
        if (fits(candidates[a].node, ci * wa) && fits(candidates[b].node, ci * wb)) {
          best_sum = sum;
          best_a = a;
          best_b = b;
        }
      }
    }

    auto& row = P.rows[i];
    if (best_a < limit) {
      const auto& ca = candidates[best_a];
      const auto& cb = candidates[best_b];
      const double s = 1.0 / ca.rho + 1.0 / cb.rho;
      const double wa = 1.0 / (ca.rho * s);
      const double wb = 1.0 / (cb.rho * s);
      row.push(aggregate_of[ca.node], wa);
      row.push(aggregate_of[cb.node], wb);
      volume[aggregate_of[ca.node]] += ci * wa;
      volume[aggregate_of[cb.node]] += ci * wb;
      continue;
    }
    auto single = std::find_if(candidates.begin(), candidates.end(),
                               [&](const Candidate& c) { return fits(c.node, ci); });
    if (single != candidates.end()) {
      row.push(aggregate_of[single->node], 1.0);
      volume[aggregate_of[single->node]] += ci;
      continue;
    }
    role[i] = NodeRole::coarse;
    ++P.promoted;
    found_aggregate(i);
  }

  P.role = std::move(role);
  P.aggregate_volume.assign(P.coarse_n(), 0.0);
  for (NodeId i = 0; i < g.n(); ++i) {
    for (const auto& entry : P.rows[i].view()) P.aggregate_volume[entry.aggregate] += g.node_weight(i) * entry.weight;
  }
  return P;
}

/// Coarse edges lighter than this are not materialized.
inline constexpr double kCoarseEdgeFloor = 1e-12;

/// Coarse graph of L_c = P^T L_f P: w_pq = sum_{k != l} P_kp w_kl P_lq for
/// p != q, node weights are aggregate volumes.
inline Graph galerkin_coarsen(const Graph& g, const InterpolationOperator& P) {
  if (P.rows.size() != g.n()) throw std::invalid_argument("interpolation operator does not match graph");
  std::vector<WeightedEdge> coarse;
  coarse.reserve(g.m());
  for (const auto& e : g.edges()) {
    for (const auto& a : P.rows[e.u].view()) {
      for (const auto& b : P.rows[e.v].view()) {
        if (a.aggregate != b.aggregate) coarse.push_back({a.aggregate, b.aggregate, a.weight * e.weight * b.weight});
      }
    }
  }
  std::vector<double> volumes(P.coarse_n(), 0.0);
  for (NodeId i = 0; i < g.n(); ++i) {
    for (const auto& entry : P.rows[i].view()) volumes[entry.aggregate] += g.node_weight(i) * entry.weight;
  }
  return Graph::merging(std::move(volumes), std::move(coarse), kCoarseEdgeFloor);
}

/// Interpolation operator of a matching contraction: every row has a
/// single unit entry, every column one or two.
inline InterpolationOperator interpolation_from_matching(const Graph& fine, const MatchingMap& map) {
  InterpolationOperator P;
  P.rows.resize(fine.n());
  P.role.assign(fine.n(), NodeRole::fine);
  P.aggregate_seed.resize(map.coarse_n());
  P.aggregate_volume.assign(map.coarse_n(), 0.0);
  for (NodeId x = 0; x < map.coarse_n(); ++x) {
    P.aggregate_seed[x] = map.coarse_to_fine[x][0];
    P.role[map.coarse_to_fine[x][0]] = NodeRole::coarse;
  }
  for (NodeId v = 0; v < fine.n(); ++v) {
    P.rows[v].push(map.fine_to_coarse[v], 1.0);
    P.aggregate_volume[map.fine_to_coarse[v]] += fine.node_weight(v);
  }
  return P;
}

}  // namespace mlpart
