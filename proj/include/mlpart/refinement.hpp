#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mlpart/amg.hpp"
#include "mlpart/contraction.hpp"
#include "mlpart/graph.hpp"
#include "mlpart/random.hpp"

namespace mlpart {

/// Per-node connectivity to every block: conn(v, P) = weight of v's edges
/// into P. The gain of moving v to P is conn(v, P) - conn(v, block(v)).
/// Dense n x k storage.
class GainTable {
 public:
  GainTable(const Graph& g, std::span<const BlockId> assignment, BlockId k)
      : k_(k), conn_(g.n() * static_cast<std::size_t>(k), 0.0) {
    for (NodeId v = 0; v < g.n(); ++v) {
      auto nb = g.neighbors(v);
      auto ids = g.incident_edges(v);
      for (std::size_t t = 0; t < nb.size(); ++t) at(v, assignment[nb[t]]) += g.edge_weight(ids[t]);
    }
  }

  double connectivity(NodeId v, BlockId b) const { return conn_[index(v, b)]; }

  double gain(NodeId v, BlockId own, BlockId to) const { return connectivity(v, to) - connectivity(v, own); }

  /// Best target other than `own` among blocks v is connected to; returns
  /// kInvalidBlock when v has no neighbor outside its block.
  BlockId best_target(NodeId v, BlockId own, double* gain_out = nullptr) const {
    BlockId best = kInvalidBlock;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (BlockId b = 0; b < k_; ++b) {
      if (b == own || connectivity(v, b) <= 0.0) continue;
      const double gv = gain(v, own, b);
      if (gv > best_gain) {
        best_gain = gv;
        best = b;
      }
    }
    if (gain_out != nullptr) *gain_out = best_gain;
    return best;
  }

  bool is_boundary(NodeId v, BlockId own) const { return best_target(v, own) != kInvalidBlock; }

  /// Updates neighbor connectivities after v moved from `from` to `to`.
  void move(const Graph& g, NodeId v, BlockId from, BlockId to) {
    auto nb = g.neighbors(v);
    auto ids = g.incident_edges(v);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      const double w = g.edge_weight(ids[t]);
      at(nb[t], from) -= w;
      at(nb[t], to) += w;
    }
  }

  /// Largest absolute difference against a from-scratch rebuild.
  double max_deviation(const Graph& g, std::span<const BlockId> assignment) const {
    GainTable fresh(g, assignment, k_);
    double worst = 0.0;
    for (std::size_t i = 0; i < conn_.size(); ++i) worst = std::max(worst, std::abs(conn_[i] - fresh.conn_[i]));
    return worst;
  }

 private:
  std::size_t index(NodeId v, BlockId b) const { return static_cast<std::size_t>(v) * k_ + b; }
  double& at(NodeId v, BlockId b) { return conn_[index(v, b)]; }

  BlockId k_;
  std::vector<double> conn_;
};

struct FmOptions {
  /// A search stops after this many consecutive moves without a new best.
  int max_stall = 300;
  /// Upper bound on FM rounds; rounds normally stop at the first one
  /// without improvement.
  int max_rounds = 64;
  /// Test hook: compare the gain table against a rebuild every this many
  /// moves and throw std::logic_error on mismatch. 0 disables.
  int verify_gains_every = 0;
};

namespace detail {

inline double overload_of(std::span<const double> block_weight, double lmax) {
  double total = 0.0;
  for (double w : block_weight) total += std::max(0.0, w - lmax);
  return total;
}

/// Shared state for FM searches on one partition.
class FmSearch {
 public:
  FmSearch(const Graph& g, Partition& p, double lmax, const FmOptions& options)
      : g_(g),
        p_(p),
        lmax_(lmax),
        options_(options),
        gains_(g, p.assignment, p.k),
        moved_(g.n(), 0),
        version_(g.n(), 0) {}

  GainTable& gains() { return gains_; }

  /// One localized FM search started from `seeds`; leaves the partition at
  /// the best state reached (possibly the starting one). Returns true when
  /// the cut strictly improved, or stayed equal with less overload.
  bool run(std::span<const NodeId> seeds, Rng& rng) {
    const double start_cut = p_.cut;
    const double tolerance = 1e-9 * std::max(1.0, std::abs(start_cut));
    double best_cut = start_cut;
    double best_overload = overload_of(p_.block_weight, lmax_);
    const double start_overload = best_overload;
    std::size_t best_index = 0;
    int stall = 0;

    heap_ = {};
    for (NodeId v : seeds) push(v, rng);
    log_.clear();

    while (!heap_.empty() && stall < options_.max_stall) {
      const Entry top = heap_.top();
      heap_.pop();
      if (moved_[top.node] || top.version != version_[top.node]) continue;
      const NodeId v = top.node;
      const BlockId from = p_.assignment[v];
      const double cv = g_.node_weight(v);

      BlockId to = kInvalidBlock;
      double gain = -std::numeric_limits<double>::infinity();
      for (BlockId b = 0; b < p_.k; ++b) {
        if (b == from || gains_.connectivity(v, b) <= 0.0) continue;
        if (p_.block_weight[b] + cv > lmax_) continue;
        const double gb = gains_.gain(v, from, b);
        if (gb > gain || (to != kInvalidBlock && gb == gain && p_.block_weight[b] < p_.block_weight[to])) {
          gain = gb;
          to = b;
        }
      }
      if (to == kInvalidBlock) continue;

      apply(v, from, to, gain);
      moved_[v] = 1;
      touched_.push_back(v);
      log_.push_back({v, from});

      const double overload = overload_of(p_.block_weight, lmax_);
      if (p_.cut < best_cut - tolerance ||
          (p_.cut <= best_cut + tolerance && overload < best_overload - tolerance)) {
        best_cut = p_.cut;
        best_overload = overload;
        best_index = log_.size();
        stall = 0;
      } else {
        ++stall;
      }

      for (NodeId u : g_.neighbors(v)) {
        if (!moved_[u]) push(u, rng);
      }
    }

    while (log_.size() > best_index) {
      const auto [v, back] = log_.back();
      log_.pop_back();
      const BlockId cur = p_.assignment[v];
      apply(v, cur, back, gains_.gain(v, cur, back));
    }
    if (best_index == 0) p_.cut = start_cut;
    for (NodeId v : touched_) moved_[v] = 0;
    touched_.clear();
    return best_cut < start_cut - tolerance || best_overload < start_overload - tolerance;
  }

 private:
  struct Entry {
    double gain;
    std::uint64_t tiebreak;
    NodeId node;
    std::uint32_t version;
    bool operator<(const Entry& o) const { return gain != o.gain ? gain < o.gain : tiebreak < o.tiebreak; }
  };
  struct Move {
    NodeId node;
    BlockId from;
  };

  void push(NodeId v, Rng& rng) {
    double gain = 0.0;
    if (gains_.best_target(v, p_.assignment[v], &gain) == kInvalidBlock) return;
    heap_.push({gain, rng.next(), v, ++version_[v]});
  }

  void apply(NodeId v, BlockId from, BlockId to, double gain) {
    p_.assignment[v] = to;
    p_.block_weight[from] -= g_.node_weight(v);
    p_.block_weight[to] += g_.node_weight(v);
    p_.cut -= gain;
    gains_.move(g_, v, from, to);
    ++moves_;
    if (options_.verify_gains_every > 0 && moves_ % options_.verify_gains_every == 0) {
      if (gains_.max_deviation(g_, p_.assignment) > 1e-9) {
        throw std::logic_error("gain table diverged from recomputation");
      }
    }
  }

  const Graph& g_;
  Partition& p_;
  double lmax_;
  FmOptions options_;
  GainTable gains_;
  std::vector<char> moved_;
  std::vector<std::uint32_t> version_;
  std::vector<NodeId> touched_;
  std::priority_queue<Entry> heap_;
  std::vector<Move> log_;
  std::uint64_t moves_ = 0;
};

/// Accepts `candidate` only if it is no worse than `original` in both cut
/// and overload once recomputed from scratch.
inline Partition keep_if_not_worse(const Graph& g, Partition original, Partition candidate) {
  candidate.cut = cut(g, candidate.assignment);
  candidate.block_weight = block_weights(g, candidate.assignment, candidate.k);
  if (candidate.cut <= original.cut &&
      overload_of(candidate.block_weight, candidate.lmax) <= overload_of(original.block_weight, original.lmax)) {
    return candidate;
  }
  return original;
}

}  // namespace detail

/// k-way FM local search in rounds. Each round queues every boundary node
/// in random order, repeatedly moves the highest-gain node (each node at
/// most once per round, target block must stay within lmax), queues the
/// mover's unmoved neighbors, and finally rolls back to the best cut seen.
/// Rounds repeat until one brings no improvement.
inline Partition fm_refine(const Graph& g, Partition p, double lmax, int max_stall, std::uint64_t seed,
                           FmOptions options = {}) {
  options.max_stall = max_stall;
  const Partition original = p;
  p.lmax = lmax;
  Rng rng(seed);
  detail::FmSearch search(g, p, lmax, options);
  for (int round = 0; round < options.max_rounds; ++round) {
    auto seeds = boundary_nodes(g, p.assignment);
    rng.shuffle(std::span<NodeId>(seeds));
    if (!search.run(seeds, rng)) break;
  }
  Partition input = original;
  input.lmax = lmax;
  return detail::keep_if_not_worse(g, std::move(input), std::move(p));
}

/// Localized FM: each of `rounds` searches starts from a single randomly
/// chosen boundary node.
inline Partition multi_try_fm(const Graph& g, Partition p, double lmax, int rounds, std::uint64_t seed,
                              FmOptions options = {}) {
  const Partition original = p;
  p.lmax = lmax;
  if (rounds <= 0) return original;
  Rng rng(seed);
  detail::FmSearch search(g, p, lmax, options);
  std::vector<NodeId> pool = boundary_nodes(g, p.assignment);
  for (int round = 0; round < rounds; ++round) {
    NodeId start = kInvalidNode;
    while (start == kInvalidNode) {
      if (pool.empty()) {
        pool = boundary_nodes(g, p.assignment);
        if (pool.empty()) break;
      }
      const std::size_t idx = rng.bounded(pool.size());
      const NodeId v = pool[idx];
      pool[idx] = pool.back();
      pool.pop_back();
      if (search.gains().is_boundary(v, p.assignment[v])) start = v;
    }
    if (start == kInvalidNode) break;
    const NodeId seeds[] = {start};
    search.run(seeds, rng);
  }
  Partition input = original;
  input.lmax = lmax;
  return detail::keep_if_not_worse(g, std::move(input), std::move(p));
}

/// Moves nodes out of overloaded blocks, best gain first, into blocks with
/// room. May increase the cut; used only to repair infeasible partitions.
inline Partition rebalance(const Graph& g, Partition p, double lmax) {
  p.lmax = lmax;
  if (p.balanced()) return p;
  GainTable gains(g, p.assignment, p.k);

  auto best_move = [&](NodeId v, double* gain) {
    const BlockId own = p.assignment[v];
    BlockId best = kInvalidBlock;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (BlockId b = 0; b < p.k; ++b) {
      if (b == own || p.block_weight[b] + g.node_weight(v) > lmax) continue;
      const double gb = gains.gain(v, own, b);
      if (best == kInvalidBlock || gb > best_gain ||
          (gb == best_gain && p.block_weight[b] < p.block_weight[best])) {
        best_gain = gb;
        best = b;
      }
    }
    *gain = best_gain;
    return best;
  };

  struct Entry {
    double gain;
    NodeId node;
    bool operator<(const Entry& o) const { return gain != o.gain ? gain < o.gain : node > o.node; }
  };
  for (std::size_t guard = 0; guard < g.n() && !p.balanced(); ++guard) {
    std::priority_queue<Entry> heap;
    for (NodeId v = 0; v < g.n(); ++v) {
      if (p.block_weight[p.assignment[v]] <= lmax || g.node_weight(v) <= 0.0) continue;
      double gain = 0.0;
      if (best_move(v, &gain) != kInvalidBlock) heap.push({gain, v});
    }
    if (heap.empty()) break;
    bool progressed = false;
    while (!heap.empty()) {
      const auto [stale_gain, v] = heap.top();
      heap.pop();
      const BlockId own = p.assignment[v];
      if (p.block_weight[own] <= lmax) continue;
      double gain = 0.0;
      const BlockId to = best_move(v, &gain);
      if (to == kInvalidBlock) continue;
      if (gain < stale_gain) {
        heap.push({gain, v});
        continue;
      }
      p.assignment[v] = to;
      p.block_weight[own] -= g.node_weight(v);
      p.block_weight[to] += g.node_weight(v);
      gains.move(g, v, own, to);
      progressed = true;
    }
    if (!progressed) break;
  }
  p.cut = cut(g, p.assignment);
  return p;
}

/// Fine node inherits the block of its coarse node; cut and block weights
/// carry over unchanged.
inline Partition project_matching(const Partition& coarse, const MatchingMap& map) {
  Partition fine;
  fine.k = coarse.k;
  fine.epsilon = coarse.epsilon;
  fine.lmax = coarse.lmax;
  fine.cut = coarse.cut;
  fine.block_weight = coarse.block_weight;
  fine.assignment.resize(map.fine_to_coarse.size());
  for (std::size_t v = 0; v < map.fine_to_coarse.size(); ++v) {
    fine.assignment[v] = coarse.assignment[map.fine_to_coarse[v]];
  }
  return fine;
}

enum class PenaltyForm {
  /// 2^max(0, 100 * ((c(B) + c(v)) / L_max - 1)): only prospective overload is penalized.
  overload,
  /// 2^max(0, 100 * (c(B) + c(v)) / L_max), literal form.
  printed,
};

inline std::string_view penalty_name(PenaltyForm f) { return f == PenaltyForm::overload ? "overload" : "printed"; }

inline PenaltyForm parse_penalty(std::string_view name) {
  if (name == "overload") return PenaltyForm::overload;
  if (name == "printed") return PenaltyForm::printed;
  throw std::invalid_argument("unknown penalty form '" + std::string(name) + "'");
}

/// Exponent is capped at 60 before exponentiation.
inline double block_penalty(double block_weight_with_v, double lmax, PenaltyForm form) {
  double ratio = block_weight_with_v / lmax;
  if (form == PenaltyForm::overload) ratio -= 1.0;
  const double exponent = std::min(60.0, std::max(0.0, 100.0 * ratio));
  return std::exp2(exponent);
}

/// Projects a partition of the Galerkin coarse graph back through P.
///
/// Every fine node starts in the block of its heaviest aggregate. Nodes
/// whose aggregates lie in different blocks are then revisited by
/// descending c(v) and placed in the candidate block B minimizing
/// cut_B * p_B(v), where cut_B is the cut of the fine assignment if v sat
/// in B. Candidates are the blocks of v's aggregates and of its neighbors;
/// equal scores go to the lower block id.
inline Partition project_amg(const Graph& fine, const Partition& coarse, const InterpolationOperator& P,
                             double lmax, PenaltyForm form = PenaltyForm::overload) {
  if (P.rows.size() != fine.n()) throw std::invalid_argument("interpolation operator does not match graph");
  const BlockId k = coarse.k;
  std::vector<BlockId> assignment(fine.n());
  std::vector<NodeId> split;
  for (NodeId v = 0; v < fine.n(); ++v) {
    auto row = P.rows[v].view();
    const InterpolationEntry* heaviest = &row[0];
    for (const auto& e : row) {
      if (e.weight > heaviest->weight) heaviest = &e;
    }
    assignment[v] = coarse.assignment[heaviest->aggregate];
    for (const auto& e : row) {
      if (coarse.assignment[e.aggregate] != assignment[v]) {
        split.push_back(v);
        break;
      }
    }
  }
  std::stable_sort(split.begin(), split.end(),
                   [&](NodeId a, NodeId b) { return fine.node_weight(a) > fine.node_weight(b); });

  auto weights = block_weights(fine, assignment, k);
  double total_cut = cut(fine, assignment);
  std::vector<double> to_block(k, 0.0);
  std::vector<BlockId> candidates;
  for (NodeId v : split) {
    const BlockId current = assignment[v];
    const double cv = fine.node_weight(v);
    candidates.clear();
    for (const auto& e : P.rows[v].view()) candidates.push_back(coarse.assignment[e.aggregate]);
    double incident = 0.0;
    std::fill(to_block.begin(), to_block.end(), 0.0);
    auto nb = fine.neighbors(v);
    auto ids = fine.incident_edges(v);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      const double w = fine.edge_weight(ids[t]);
      to_block[assignment[nb[t]]] += w;
      incident += w;
      candidates.push_back(assignment[nb[t]]);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const double base = total_cut - (incident - to_block[current]);
    BlockId best = current;
    double best_score = std::numeric_limits<double>::infinity();
    double best_cut = total_cut;
    for (BlockId b : candidates) {
      const double cut_b = base + (incident - to_block[b]);
      const double weight_b = weights[b] - (b == current ? cv : 0.0) + cv;
      const double score = cut_b * block_penalty(weight_b, lmax, form);
      if (score < best_score) {
        best_score = score;
        best = b;
        best_cut = cut_b;
      }
    }
    if (best != current) {
      weights[current] -= cv;
      weights[best] += cv;
      assignment[v] = best;
      total_cut = best_cut;
    }
  }
  return make_partition(fine, k, std::move(assignment), coarse.epsilon, lmax);
}

}  // namespace mlpart
