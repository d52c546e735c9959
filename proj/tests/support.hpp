#pragma once

// Reference instances and brute-force oracles shared by the unit tests and
// the acceptance runner. Nothing here uses the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mlpart/amg.hpp"
#include "mlpart/graph.hpp"

namespace mlpart::testing {

/// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
inline Graph two_triangles() {
  return Graph::unit(6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}});
}

/// Two cliques of `size` nodes joined by one bridge between the last node of
/// the first and the first node of the second. Returns the bridge id too.
inline Graph two_cliques(std::size_t size, EdgeId* bridge = nullptr) {
  std::vector<WeightedEdge> edges;
  for (std::size_t side = 0; side < 2; ++side) {
    const auto base = static_cast<NodeId>(side * size);
    for (NodeId a = 0; a < size; ++a) {
      for (NodeId b = a + 1; b < size; ++b) edges.push_back({base + a, base + b, 1.0});
    }
  }
  const auto u = static_cast<NodeId>(size - 1);
  const auto v = static_cast<NodeId>(size);
  edges.push_back({u, v, 1.0});
  Graph g = Graph::unit(2 * size, std::move(edges));
  if (bridge != nullptr) *bridge = g.find_edge(u, v);
  return g;
}

/// Connected random graph: a random spanning tree plus extra random edges.
/// Node weights are 1 unless `weighted`, then integers in [1, 3]; edge
/// weights are integers in [1, 5] when weighted.
inline Graph random_connected_graph(std::size_t n, std::size_t extra_edges, std::uint64_t seed,
                                    bool weighted = false) {
  std::mt19937_64 gen(seed);
  auto pick = [&](std::size_t hi) { return std::uniform_int_distribution<std::size_t>(0, hi - 1)(gen); };
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  std::vector<WeightedEdge> edges;
  auto weight = [&] { return weighted ? static_cast<double>(1 + pick(5)) : 1.0; };
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t u = pick(v);
    has[u][v] = has[v][u] = 1;
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), weight()});
  }
  const std::size_t max_edges = n * (n - 1) / 2;
  for (std::size_t t = 0; t < extra_edges && edges.size() < max_edges; ++t) {
    std::size_t u = pick(n);
    std::size_t v = pick(n);
    if (u == v || has[u][v]) continue;
    has[u][v] = has[v][u] = 1;
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), weight()});
  }
  std::vector<double> nodes(n, 1.0);
  if (weighted) {
    for (auto& c : nodes) c = static_cast<double>(1 + pick(3));
  }
  return Graph(std::move(nodes), std::move(edges));
}

struct BruteForceResult {
  double best_cut = std::numeric_limits<double>::infinity();  // over balanced assignments
  bool balanced_exists = false;
};

/// Exhaustive k-way search over all assignments (k^n of them).
inline BruteForceResult brute_force_partition(const Graph& g, BlockId k, double lmax) {
  BruteForceResult r;
  const std::size_t n = g.n();
  std::vector<BlockId> a(n, 0);
  while (true) {
    std::vector<double> w(k, 0.0);
    for (std::size_t v = 0; v < n; ++v) w[a[v]] += g.node_weight(static_cast<NodeId>(v));
    if (std::all_of(w.begin(), w.end(), [&](double x) { return x <= lmax; })) {
      double c = 0.0;
      for (const auto& e : g.edges()) {
        if (a[e.u] != a[e.v]) c += e.weight;
      }
      r.balanced_exists = true;
      r.best_cut = std::min(r.best_cut, c);
    }
    std::size_t i = 0;
    while (i < n && ++a[i] == k) a[i++] = 0;
    if (i == n) break;
  }
  return r;
}

/// Maximum total rating of a set of pairwise non-adjacent edges of a path
/// (or cycle) by enumerating every subset.
inline double brute_force_path_matching(const std::vector<double>& r, bool cycle) {
  const std::size_t len = r.size();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < len && ok; ++i) ok = !((mask >> i & 1u) && (mask >> (i + 1) & 1u));
    if (ok && cycle && len >= 2) ok = !((mask & 1u) && (mask >> (len - 1) & 1u));
    if (!ok) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (mask >> i & 1u) sum += r[i];
    }
    best = std::max(best, sum);
  }
  return best;
}

/// Dense n x n adjacency matrix.
inline std::vector<std::vector<double>> dense_adjacency(const Graph& g) {
  std::vector<std::vector<double>> W(g.n(), std::vector<double>(g.n(), 0.0));
  for (const auto& e : g.edges()) W[e.u][e.v] = W[e.v][e.u] = e.weight;
  return W;
}

/// P^T W P computed densely.
inline std::vector<std::vector<double>> dense_galerkin(const Graph& g, const InterpolationOperator& P) {
  const std::size_t n = g.n();
  const std::size_t nc = P.coarse_n();
  std::vector<std::vector<double>> Pd(n, std::vector<double>(nc, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : P.rows[i].view()) Pd[i][e.aggregate] += e.weight;
  }
  const auto W = dense_adjacency(g);
  std::vector<std::vector<double>> WP(n, std::vector<double>(nc, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < nc; ++q) WP[i][q] += W[i][j] * Pd[j][q];
    }
  }
  std::vector<std::vector<double>> C(nc, std::vector<double>(nc, 0.0));
  for (std::size_t p = 0; p < nc; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < nc; ++q) C[p][q] += Pd[i][p] * WP[i][q];
    }
  }
  return C;
}

/// Random interpolation operator: a random non-empty C set, each other node
/// split over one or two random aggregates with random positive weights.
inline InterpolationOperator random_interpolation(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  InterpolationOperator P;
  P.rows.resize(n);
  P.role.assign(n, NodeRole::fine);
  std::vector<NodeId> aggregate_of(n, kInvalidNode);
  for (NodeId i = 0; i < n; ++i) {
    if (i == 0 || gen() % 3 == 0) {
      P.role[i] = NodeRole::coarse;
      aggregate_of[i] = static_cast<NodeId>(P.aggregate_seed.size());
      P.aggregate_seed.push_back(i);
      P.rows[i].push(aggregate_of[i], 1.0);
    }
  }
  const std::size_t nc = P.aggregate_seed.size();
  for (NodeId i = 0; i < n; ++i) {
    if (P.role[i] == NodeRole::coarse) continue;
    const auto a = static_cast<NodeId>(gen() % nc);
    if (nc >= 2 && gen() % 2 == 0) {
      auto b = static_cast<NodeId>(gen() % (nc - 1));
      if (b >= a) ++b;
      const double w = unit(gen);
      P.rows[i].push(a, w);
      P.rows[i].push(b, 1.0 - w);
    } else {
      P.rows[i].push(a, 1.0);
    }
  }
  P.aggregate_volume.assign(nc, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    for (const auto& e : P.rows[i].view()) P.aggregate_volume[e.aggregate] += e.weight;
  }
  return P;
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace mlpart::testing
