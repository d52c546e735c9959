#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlpart {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using BlockId = std::uint32_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();
inline constexpr BlockId kInvalidBlock = std::numeric_limits<BlockId>::max();

struct WeightedEdge {
  NodeId u;
  NodeId v;
  double weight;
};

/// Weighted undirected graph in compressed adjacency form.
///
/// Every undirected edge has an id in [0, m). Edge ids are ordered by
/// (min endpoint, max endpoint), and every adjacency list is sorted by
/// neighbor id. Node weights act as volumes: contraction and aggregation
/// sum them, so c(v) is the amount of original graph a coarse node stands for.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from a simple edge list. Rejects self-loops, parallel
  /// edges, non-positive edge weights and negative node weights.
  Graph(std::vector<double> node_weights, std::vector<WeightedEdge> edges)
      : node_weights_(std::move(node_weights)) {
    const auto n = node_weights_.size();
    for (std::size_t v = 0; v < n; ++v) {
      if (!(node_weights_[v] >= 0.0)) {
        throw std::invalid_argument("negative node weight at node " + std::to_string(v));
      }
    }
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw std::invalid_argument("edge endpoint out of range");
      }
      if (e.u == e.v) {
        throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
      }
      if (!(e.weight > 0.0)) {
        throw std::invalid_argument("non-positive edge weight");
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
        throw std::invalid_argument("parallel edge {" + std::to_string(edges[i].u) + "," +
                                    std::to_string(edges[i].v) + "}");
      }
    }
    edges_ = std::move(edges);
    build_adjacency();
  }

  /// Accumulates parallel edges by weight addition, drops self-loops and
  /// edges whose merged weight is below `drop_below` (or not positive).
  static Graph merging(std::vector<double> node_weights, std::vector<WeightedEdge> edges,
                       double drop_below = 0.0) {
    for (auto& e : edges) {
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::erase_if(edges, [](const WeightedEdge& e) { return e.u == e.v; });
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::vector<WeightedEdge> merged;
    merged.reserve(edges.size());
    for (const auto& e : edges) {
      if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
        merged.back().weight += e.weight;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [&](const WeightedEdge& e) { return e.weight < drop_below || !(e.weight > 0.0); });
    return Graph(std::move(node_weights), std::move(merged));
  }

  /// Unit node weights.
  static Graph unit(std::size_t n, std::vector<WeightedEdge> edges) {
    return Graph(std::vector<double>(n, 1.0), std::move(edges));
  }

  std::size_t n() const { return node_weights_.size(); }
  std::size_t m() const { return edges_.size(); }

  double node_weight(NodeId v) const { return node_weights_[v]; }
  std::span<const double> node_weights() const { return node_weights_; }

  double total_node_weight() const {
    return std::accumulate(node_weights_.begin(), node_weights_.end(), 0.0);
  }
  double max_node_weight() const {
    return node_weights_.empty() ? 0.0 : *std::max_element(node_weights_.begin(), node_weights_.end());
  }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets_.data() + offsets_[v], degree(v)};
  }
  /// Edge ids parallel to neighbors(v).
  std::span<const EdgeId> incident_edges(NodeId v) const {
    return {arc_edges_.data() + offsets_[v], degree(v)};
  }

  const WeightedEdge& edge(EdgeId e) const { return edges_[e]; }
  double edge_weight(EdgeId e) const { return edges_[e].weight; }
  std::span<const WeightedEdge> edges() const { return edges_; }

  /// Out(v): total weight of edges incident to v.
  double weighted_degree(NodeId v) const {
    double sum = 0.0;
    for (EdgeId e : incident_edges(v)) sum += edges_[e].weight;
    return sum;
  }

  /// Edge id of {u, v}, or m() when absent.
  EdgeId find_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return static_cast<EdgeId>(m());
    return incident_edges(u)[static_cast<std::size_t>(it - nb.begin())];
  }

 private:
  void build_adjacency() {
    const auto n = node_weights_.size();
    offsets_.assign(n + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    targets_.resize(offsets_[n]);
    arc_edges_.resize(offsets_[n]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    // Edges are sorted by (u, v): for each node the smaller neighbors arrive
    // first and in ascending order, then the larger ones.
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      const auto& edge = edges_[e];
      targets_[fill[edge.u]] = edge.v;
      arc_edges_[fill[edge.u]++] = e;
      targets_[fill[edge.v]] = edge.u;
      arc_edges_[fill[edge.v]++] = e;
    }
  }

  std::vector<double> node_weights_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
  std::vector<EdgeId> arc_edges_;
};

/// L_max = (1 + epsilon) * c(V) / k + max_v c(v).
inline double compute_lmax(double total_weight, BlockId k, double epsilon, double max_node_weight) {
  if (k == 0) throw std::invalid_argument("block count k must be at least 1");
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
  return (1.0 + epsilon) * total_weight / static_cast<double>(k) + max_node_weight;
}

inline double compute_lmax(const Graph& g, BlockId k, double epsilon) {
  return compute_lmax(g.total_node_weight(), k, epsilon, g.max_node_weight());
}

/// Sum of edge weights whose endpoints lie in different blocks.
inline double cut(const Graph& g, std::span<const BlockId> assignment) {
  double total = 0.0;
  for (const auto& e : g.edges()) {
    if (assignment[e.u] != assignment[e.v]) total += e.weight;
  }
  return total;
}

inline std::vector<double> block_weights(const Graph& g, std::span<const BlockId> assignment,
                                         BlockId k) {
  std::vector<double> weights(k, 0.0);
  for (NodeId v = 0; v < g.n(); ++v) weights[assignment[v]] += g.node_weight(v);
  return weights;
}

/// Block assignment plus cached block weights and cut.
struct Partition {
  BlockId k = 1;
  std::vector<BlockId> assignment;
  std::vector<double> block_weight;
  double epsilon = 0.0;
  double lmax = 0.0;
  double cut = 0.0;

  /// Total weight above L_max, summed over blocks.
  double overload() const {
    double total = 0.0;
    for (double w : block_weight) total += std::max(0.0, w - lmax);
    return total;
  }

  bool balanced() const {
    const double tolerance = 1e-9 * std::max(1.0, lmax);
    return std::all_of(block_weight.begin(), block_weight.end(),
                       [&](double w) { return w <= lmax + tolerance; });
  }
};

/// Assembles a Partition, recomputing block weights and cut from scratch.
inline Partition make_partition(const Graph& g, BlockId k, std::vector<BlockId> assignment,
                                double epsilon, double lmax) {
  if (assignment.size() != g.n()) {
    throw std::invalid_argument("assignment size does not match node count");
  }
  for (BlockId b : assignment) {
    if (b >= k) throw std::invalid_argument("block id out of range");
  }
  Partition p;
  p.k = k;
  p.epsilon = epsilon;
  p.lmax = lmax;
  p.block_weight = block_weights(g, assignment, k);
  p.cut = cut(g, assignment);
  p.assignment = std::move(assignment);
  return p;
}

inline Partition make_partition(const Graph& g, BlockId k, std::vector<BlockId> assignment,
                                double epsilon) {
  return make_partition(g, k, std::move(assignment), epsilon, compute_lmax(g, k, epsilon));
}

inline double cut(const Graph& g, const Partition& p) { return cut(g, p.assignment); }

/// Nodes with at least one neighbor in another block, ascending.
inline std::vector<NodeId> boundary_nodes(const Graph& g, std::span<const BlockId> assignment) {
  std::vector<NodeId> result;
  for (NodeId v = 0; v < g.n(); ++v) {
    for (NodeId u : g.neighbors(v)) {
      if (assignment[u] != assignment[v]) {
        result.push_back(v);
        break;
      }
    }
  }
  return result;
}

inline std::vector<NodeId> boundary_nodes(const Graph& g, const Partition& p) {
  return boundary_nodes(g, p.assignment);
}

}  // namespace mlpart
