#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlpart/graph.hpp"

namespace mlpart {

/// A set of edge ids with pairwise disjoint endpoints.
using Matching = std::vector<EdgeId>;

class InvalidMatching : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mate of every node under `matching` (kInvalidNode when unmatched).
/// Throws InvalidMatching when two edges share an endpoint.
inline std::vector<NodeId> matching_mates(const Graph& g, std::span<const EdgeId> matching) {
  std::vector<NodeId> mate(g.n(), kInvalidNode);
  for (EdgeId e : matching) {
    if (e >= g.m()) throw InvalidMatching("edge id " + std::to_string(e) + " out of range");
    const auto& edge = g.edge(e);
    if (mate[edge.u] != kInvalidNode || mate[edge.v] != kInvalidNode) {
      throw InvalidMatching("matching edges share endpoint at edge " + std::to_string(e));
    }
    mate[edge.u] = edge.v;
    mate[edge.v] = edge.u;
  }
  return mate;
}

inline bool is_valid_matching(const Graph& g, std::span<const EdgeId> matching) {
  try {
    matching_mates(g, matching);
    return true;
  } catch (const InvalidMatching&) {
    return false;
  }
}

/// Fine/coarse correspondence of a contracted matching.
struct MatchingMap {
  std::vector<NodeId> fine_to_coarse;
  /// One or two fine nodes per coarse node; second is kInvalidNode for singletons.
  std::vector<std::array<NodeId, 2>> coarse_to_fine;

  std::size_t coarse_n() const { return coarse_to_fine.size(); }
};

struct Contraction {
  Graph coarse;
  MatchingMap map;
};

/// Contracts every matched edge {u,v} into one node x with c(x) = c(u)+c(v).
/// Parallel edges merge by weight addition; the contracted edges vanish.
/// Coarse nodes are numbered in order of their smallest fine node.
inline Contraction contract_matching(const Graph& g, std::span<const EdgeId> matching) {
  const auto mate = matching_mates(g, matching);
  MatchingMap map;
  map.fine_to_coarse.assign(g.n(), kInvalidNode);
  std::vector<double> coarse_weights;
  for (NodeId v = 0; v < g.n(); ++v) {
    if (map.fine_to_coarse[v] != kInvalidNode) continue;
    const auto x = static_cast<NodeId>(map.coarse_to_fine.size());
    map.fine_to_coarse[v] = x;
    double c = g.node_weight(v);
    if (mate[v] != kInvalidNode) {
      map.fine_to_coarse[mate[v]] = x;
      c += g.node_weight(mate[v]);
    }
    map.coarse_to_fine.push_back({v, mate[v]});
    coarse_weights.push_back(c);
  }

  std::vector<WeightedEdge> coarse_edges;
  coarse_edges.reserve(g.m());
  for (const auto& e : g.edges()) {
    const NodeId cu = map.fine_to_coarse[e.u];
    const NodeId cv = map.fine_to_coarse[e.v];
    if (cu != cv) coarse_edges.push_back({cu, cv, e.weight});
  }
  return {Graph::merging(std::move(coarse_weights), std::move(coarse_edges)), std::move(map)};
}

}  // namespace mlpart
