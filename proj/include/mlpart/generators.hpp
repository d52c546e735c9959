#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "mlpart/graph.hpp"
#include "mlpart/random.hpp"

namespace mlpart {

/// rows x cols 4-neighbor grid, node id r * cols + c, unit weights.
inline Graph grid2d(std::size_t rows, std::size_t cols) {
  std::vector<WeightedEdge> edges;
  edges.reserve(2 * rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<NodeId>(r * cols + c);
      if (c + 1 < cols) edges.push_back({v, v + 1, 1.0});
      if (r + 1 < rows) edges.push_back({v, static_cast<NodeId>(v + cols), 1.0});
    }
  }
  return Graph::unit(rows * cols, std::move(edges));
}

/// Barabasi-Albert graph: a clique on edges_per_node + 1 nodes, then every
/// new node links to edges_per_node distinct earlier nodes chosen with
/// probability proportional to degree.
inline Graph preferential_attachment(std::size_t n, std::size_t edges_per_node, std::uint64_t seed) {
  if (edges_per_node < 1) throw std::invalid_argument("edges_per_node must be at least 1");
  const std::size_t core = std::min(n, edges_per_node + 1);
  std::vector<WeightedEdge> edges;
  std::vector<NodeId> endpoints;  // node v appears deg(v) times
  for (NodeId u = 0; u < core; ++u) {
    for (NodeId v = u + 1; v < core; ++v) {
      edges.push_back({u, v, 1.0});
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  Rng rng(seed);
  std::vector<NodeId> targets;
  for (auto v = static_cast<NodeId>(core); v < n; ++v) {
    targets.clear();
    while (targets.size() < edges_per_node) {
      const NodeId t = endpoints[rng.bounded(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.push_back({t, v, 1.0});
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Graph::unit(n, std::move(edges));
}

/// Uniform random graph with exactly m distinct edges.
inline Graph gnm(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2 && m > 0) throw std::invalid_argument("too many edges requested");
  if (m > n * (n - 1) / 2) throw std::invalid_argument("too many edges requested");
  Rng rng(seed);
  std::unordered_set<std::uint64_t> seen;
  std::vector<WeightedEdge> edges;
  edges.reserve(m);
  while (edges.size() < m) {
    auto u = static_cast<NodeId>(rng.bounded(n));
    auto v = static_cast<NodeId>(rng.bounded(n));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (seen.insert((static_cast<std::uint64_t>(u) << 32) | v).second) edges.push_back({u, v, 1.0});
  }
  return Graph::unit(n, std::move(edges));
}

/// Each of the n(n-1)/2 pairs is an edge with probability p.
inline Graph gnp(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WeightedEdge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.coin(p)) edges.push_back({u, v, 1.0});
    }
  }
  return Graph::unit(n, std::move(edges));
}

/// True when every node is reachable from node 0.
inline bool is_connected(const Graph& g) {
  if (g.n() == 0) return true;
  std::vector<char> seen(g.n(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId u : g.neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == g.n();
}

}  // namespace mlpart
