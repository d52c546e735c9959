#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "mlpart/graph.hpp"
#include "mlpart/random.hpp"
#include "mlpart/refinement.hpp"

namespace mlpart {

/// When to stop coarsening and how hard to work on the coarsest graph.
struct CoarsestPolicy {
  int stop_threshold = 30;  // nodes per block
  int attempts = 8;

  std::size_t stop_size(BlockId k) const {
    return std::max<std::size_t>(static_cast<std::size_t>(stop_threshold) * k, 60);
  }
};

/// Rounds x up with probability frac(x), down otherwise.
inline double randomized_round(double x, Rng& rng) {
  const double lo = std::floor(x);
  const double frac = x - lo;
  if (frac <= 0.0) return lo;
  return rng.coin(frac) ? lo + 1.0 : lo;
}

/// Integer-weighted copy of g for partitioners that need integral edge
/// weights >= 1: divide by the smallest edge weight, then round each weight
/// randomly so its expectation is preserved.
inline Graph normalize_and_round(const Graph& g, std::uint64_t seed) {
  if (g.m() == 0) return g;
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& e : g.edges()) smallest = std::min(smallest, e.weight);
  Rng rng(seed);
  std::vector<WeightedEdge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) {
    const double normalized = e.weight == smallest ? 1.0 : e.weight / smallest;
    e.weight = std::max(1.0, randomized_round(normalized, rng));
  }
  std::vector<double> nodes(g.node_weights().begin(), g.node_weights().end());
  return Graph(std::move(nodes), std::move(edges));
}

namespace detail {

/// How an initial-partition attempt builds its starting assignment.
enum class GrowthKey {
  gain,          // edges into block - edges to unassigned nodes
  connectivity,  // edges into block
};

/// Grows blocks 0..k-2 one at a time from random start nodes, always adding
/// the frontier node with the largest key; the last block takes the rest.
inline std::vector<BlockId> grow_blocks(const Graph& g, BlockId k, double lmax, Rng& rng,
                                        GrowthKey key = GrowthKey::gain) {
  const auto n = g.n();
  std::vector<BlockId> assignment(n, kInvalidBlock);
  std::vector<double> to_block(n, 0.0);
  std::vector<double> to_free(n, 0.0);
  std::vector<std::uint32_t> version(n, 0);
  for (NodeId v = 0; v < n; ++v) to_free[v] = g.weighted_degree(v);
  std::vector<NodeId> unassigned(n);
  std::iota(unassigned.begin(), unassigned.end(), NodeId{0});

  struct Entry {
    double key;
    std::uint64_t tiebreak;
    NodeId node;
    std::uint32_t version;
    bool operator<(const Entry& o) const { return key != o.key ? key < o.key : tiebreak < o.tiebreak; }
  };

  auto random_free = [&]() -> NodeId {
    while (!unassigned.empty()) {
      const std::size_t idx = rng.bounded(unassigned.size());
      const NodeId v = unassigned[idx];
      unassigned[idx] = unassigned.back();
      unassigned.pop_back();
      if (assignment[v] == kInvalidBlock) return v;
    }
    return kInvalidNode;
  };

  double remaining = g.total_node_weight();
  for (BlockId b = 0; b + 1 < k; ++b) {
    const double target = remaining / static_cast<double>(k - b);
    double weight = 0.0;
    std::priority_queue<Entry> frontier;
    std::vector<NodeId> touched;
    auto take = [&](NodeId v) {
      assignment[v] = b;
      weight += g.node_weight(v);
      auto nb = g.neighbors(v);
      auto ids = g.incident_edges(v);
      for (std::size_t t = 0; t < nb.size(); ++t) {
        const NodeId u = nb[t];
        const double w = g.edge_weight(ids[t]);
        to_free[u] -= w;
        if (assignment[u] != kInvalidBlock) continue;
        if (to_block[u] == 0.0) touched.push_back(u);
        to_block[u] += w;
        const double priority = key == GrowthKey::gain ? to_block[u] - to_free[u] : to_block[u];
        frontier.push({priority, rng.next(), u, ++version[u]});
      }
    };
    while (weight < target) {
      NodeId next = kInvalidNode;
      while (!frontier.empty()) {
        const Entry top = frontier.top();
        frontier.pop();
        if (assignment[top.node] != kInvalidBlock || top.version != version[top.node]) continue;
        if (weight + g.node_weight(top.node) > lmax) continue;
        next = top.node;
        break;
      }
      if (next == kInvalidNode) {
        next = random_free();
        if (next == kInvalidNode) break;
        if (weight > 0.0 && weight + g.node_weight(next) > lmax) {
          unassigned.push_back(next);
          break;
        }
      }
      take(next);
    }
    for (NodeId u : touched) to_block[u] = 0.0;
    remaining -= weight;
  }
  for (NodeId v = 0; v < n; ++v) {
    if (assignment[v] == kInvalidBlock) assignment[v] = k - 1;
  }
  return assignment;
}

/// Visits nodes in random order and puts each into the currently lightest
/// block.
inline std::vector<BlockId> random_balanced_assignment(const Graph& g, BlockId k, Rng& rng) {
  std::vector<NodeId> order(g.n());
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.bounded(i)]);
  std::vector<BlockId> assignment(g.n());
  std::vector<double> weight(k, 0.0);
  for (NodeId v : order) {
    const auto lightest = static_cast<BlockId>(std::min_element(weight.begin(), weight.end()) - weight.begin());
    assignment[v] = lightest;
    weight[lightest] += g.node_weight(v);
  }
  return assignment;
}

/// Starting assignment of attempt i: gain growth, random balanced
/// assignment and connectivity growth in turn.
inline std::vector<BlockId> starting_assignment(const Graph& g, BlockId k, double lmax, Rng& rng, int attempt) {
  switch (attempt % 3) {
    case 1:
      return random_balanced_assignment(g, k, rng);
    case 2:
      return grow_blocks(g, k, lmax, rng, GrowthKey::connectivity);
    default:
      return grow_blocks(g, k, lmax, rng, GrowthKey::gain);
  }
}

}  // namespace detail

/// Partitions a small graph directly: best of `attempts` seeded starting
/// assignments (see detail::starting_assignment), each followed by FM (and
/// a balance repair when needed).
/// Selection prefers balanced results, then smaller cut, then the earlier
/// attempt. The result may be unbalanced when no attempt found a feasible
/// assignment; callers check Partition::balanced().
inline Partition initial_partition(const Graph& g, BlockId k, double lmax, int attempts, std::uint64_t seed,
                                   double epsilon = 0.03, int max_stall = 300) {
  if (k == 0) throw std::invalid_argument("block count k must be at least 1");
  if (k == 1 || g.n() == 0) return make_partition(g, k, std::vector<BlockId>(g.n(), 0), epsilon, lmax);
  if (g.n() <= k) {
    std::vector<BlockId> assignment(g.n());
    std::iota(assignment.begin(), assignment.end(), BlockId{0});
    return make_partition(g, k, std::move(assignment), epsilon, lmax);
  }
  attempts = std::max(1, attempts);

  Partition best;
  bool have_best = false;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const std::uint64_t attempt_seed = derive_seed(seed, static_cast<std::uint64_t>(attempt));
    Rng rng(attempt_seed);
    auto candidate = make_partition(g, k, detail::starting_assignment(g, k, lmax, rng, attempt), epsilon, lmax);
    if (!candidate.balanced()) candidate = rebalance(g, std::move(candidate), lmax);
    candidate = fm_refine(g, std::move(candidate), lmax, max_stall, derive_seed(attempt_seed, 1));
    auto better = [&] {
      if (!have_best) return true;
      if (candidate.balanced() != best.balanced()) return candidate.balanced();
      if (!candidate.balanced() && candidate.overload() != best.overload()) {
        return candidate.overload() < best.overload();
      }
      return candidate.cut < best.cut;
    };
    if (better()) {
      best = std::move(candidate);
      have_best = true;
    }
  }
  return best;
}

}  // namespace mlpart
