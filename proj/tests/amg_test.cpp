#include <gtest/gtest.h>

#include <cmath>

#include "mlpart/amg.hpp"
#include "mlpart/refinement.hpp"
#include "support.hpp"

namespace mlpart {
namespace {

AlgebraicDistances uniform_rho(const Graph& g, double value = 1.0) {
  return AlgebraicDistances{std::vector<double>(g.m(), value)};
}

TEST(FutureVolume, StarCenterFirst) {
  Graph star = Graph::unit(5, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}});
  // Put the center last by id to show the order is not just by id.
  Graph relabeled = Graph::unit(5, {{4, 0, 1}, {4, 1, 1}, {4, 2, 1}, {4, 3, 1}});
  const auto order = future_volume_order(relabeled, uniform_rho(relabeled));
  EXPECT_EQ(order.front(), 4u);
  EXPECT_EQ(future_volume_order(star, uniform_rho(star)).front(), 0u);
  Graph single = Graph::unit(1, {});
  EXPECT_EQ(future_volume_order(single, uniform_rho(single)), (std::vector<NodeId>{0}));
}

TEST(FutureVolume, UniformTiesAscending) {
  Graph cycle = Graph::unit(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 0, 1}});
  EXPECT_EQ(future_volume_order(cycle, uniform_rho(cycle)), (std::vector<NodeId>{0, 1, 2, 3, 4}));
}

TEST(SelectSeeds, Examples) {
  Graph edge = Graph::unit(2, {{0, 1, 1}});
  const NodeId ab[] = {0, 1};
  EXPECT_EQ(select_seeds(edge, uniform_rho(edge), ab, 0.5), (std::vector<NodeRole>{NodeRole::coarse, NodeRole::fine}));

  Graph isolated = Graph::unit(1, {});
  const NodeId only[] = {0};
  EXPECT_EQ(select_seeds(isolated, uniform_rho(isolated), only, 0.5), (std::vector<NodeRole>{NodeRole::coarse}));

  Graph triangle = Graph::unit(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  const NodeId order[] = {1, 0, 2};
  EXPECT_EQ(select_seeds(triangle, uniform_rho(triangle), order, 0.5),
            (std::vector<NodeRole>{NodeRole::fine, NodeRole::coarse, NodeRole::fine}));
}

TEST(SelectSeeds, EveryFineNodeIsStronglyCoupled) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Graph g = testing::random_connected_graph(30, 40, seed, true);
    AlgebraicDistances rho;
    for (EdgeId e = 0; e < g.m(); ++e) rho.rho.push_back(0.05 + 0.9 * ((e * 7919 + seed) % 101) / 101.0);
    const auto order = future_volume_order(g, rho);
    const auto role = select_seeds(g, rho, order, 0.5);
    for (NodeId i = 0; i < g.n(); ++i) {
      if (role[i] != NodeRole::fine) continue;
      double to_c = 0.0;
      double all = 0.0;
      auto nb = g.neighbors(i);
      auto ids = g.incident_edges(i);
      for (std::size_t t = 0; t < nb.size(); ++t) {
        all += 1.0 / rho[ids[t]];
        if (role[nb[t]] == NodeRole::coarse) to_c += 1.0 / rho[ids[t]];
      }
      EXPECT_GE(to_c, 0.5 * all - 1e-12);
    }
  }
}

InterpolationOperator interpolate_middle(double rho_left, double rho_right, double cap) {
  // Path 0 - 1 - 2 with 1 as the only F-node.
  Graph path = Graph::unit(3, {{0, 1, 1}, {1, 2, 1}});
  AlgebraicDistances rho{{rho_left, rho_right}};
  std::vector<NodeRole> roles{NodeRole::coarse, NodeRole::fine, NodeRole::coarse};
  const NodeId order[] = {0, 1, 2};
  AmgParams params;
  params.max_aggregate_volume = cap;
  return build_interpolation(path, rho, roles, order, params);
}

TEST(Interpolation, WeightsFollowInverseDistance) {
  auto even = interpolate_middle(1.0, 1.0, 10.0);
  auto row = even.rows[1].view();
  ASSERT_EQ(row.size(), 2u);
  EXPECT_DOUBLE_EQ(row[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(row[1].weight, 0.5);

  auto skew = interpolate_middle(1.0, 3.0, 10.0);
  row = skew.rows[1].view();
  ASSERT_EQ(row.size(), 2u);
  EXPECT_EQ(row[0].aggregate, 0u);
  EXPECT_DOUBLE_EQ(row[0].weight, 0.75);
  EXPECT_DOUBLE_EQ(row[1].weight, 0.25);
}

TEST(Interpolation, PromotesWhenEveryAggregateIsFull) {
  auto full = interpolate_middle(1.0, 1.0, 1.0);
  EXPECT_EQ(full.promoted, 1u);
  EXPECT_EQ(full.role[1], NodeRole::coarse);
  EXPECT_EQ(full.coarse_n(), 3u);
  auto row = full.rows[1].view();
  ASSERT_EQ(row.size(), 1u);
  EXPECT_EQ(row[0].aggregate, 2u);
  EXPECT_DOUBLE_EQ(row[0].weight, 1.0);
}

TEST(Interpolation, CapacityDecidesBetweenPairSingleAndPromotion) {
  // Both aggregates start at volume 1; a half share of c=1 fits up to 1.5.
  EXPECT_EQ(interpolate_middle(1.0, 1.0, 1.5).rows[1].size, 2);
  EXPECT_EQ(interpolate_middle(1.0, 1.0, 1.4).promoted, 1u);

  // The pair overflows the heavy aggregate, the whole node fits the light one.
  Graph heavy({1, 1, 2}, {{0, 1, 1}, {1, 2, 1}});
  AlgebraicDistances rho{{1.0, 1.0}};
  std::vector<NodeRole> roles{NodeRole::coarse, NodeRole::fine, NodeRole::coarse};
  const NodeId order[] = {0, 1, 2};
  AmgParams params;
  params.max_aggregate_volume = 2.0;
  auto P = build_interpolation(heavy, rho, roles, order, params);
  auto row = P.rows[1].view();
  ASSERT_EQ(row.size(), 1u);
  EXPECT_EQ(P.aggregate_seed[row[0].aggregate], 0u);
  EXPECT_EQ(P.promoted, 0u);
}

TEST(Interpolation, RowStochasticOrderTwoAndCapped) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Graph g = testing::random_connected_graph(40, 60, seed, true);
    RelaxationParams rp;
    rp.rng_seed = seed;
    const auto rho = algebraic_distances(g, rp);
    const auto order = future_volume_order(g, rho);
    AmgParams params;
    params.max_aggregate_volume = 0.3 * g.total_node_weight();
    auto P = build_interpolation(g, rho, select_seeds(g, rho, order, 0.5), order, params);
    double volume = 0.0;
    for (NodeId i = 0; i < g.n(); ++i) {
      auto row = P.rows[i].view();
      ASSERT_GE(row.size(), 1u);
      ASSERT_LE(row.size(), 2u);
      double sum = 0.0;
      for (const auto& e : row) {
        EXPECT_GT(e.weight, 0.0);
        sum += e.weight;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      if (P.role[i] == NodeRole::coarse) {
        ASSERT_EQ(row.size(), 1u);
        EXPECT_EQ(P.aggregate_seed[row[0].aggregate], i);
      }
    }
    for (double v : P.aggregate_volume) {
      volume += v;
      EXPECT_LE(v, std::max(params.max_aggregate_volume, g.max_node_weight()) + 1e-9);
    }
    EXPECT_NEAR(volume, g.total_node_weight(), 1e-9);
  }
}

TEST(Galerkin, PathExample) {
  Graph path = Graph::unit(3, {{0, 1, 1}, {1, 2, 1}});
  InterpolationOperator P;
  P.rows.resize(3);
  P.rows[0].push(0, 1.0);
  P.rows[1].push(0, 0.5);
  P.rows[1].push(1, 0.5);
  P.rows[2].push(1, 1.0);
  P.aggregate_seed = {0, 2};
  const Graph c = galerkin_coarsen(path, P);
  ASSERT_EQ(c.n(), 2u);
  ASSERT_EQ(c.m(), 1u);
  EXPECT_DOUBLE_EQ(c.edge_weight(0), 1.0);
  EXPECT_DOUBLE_EQ(c.node_weight(0), 1.5);
  EXPECT_DOUBLE_EQ(c.node_weight(1), 1.5);
}

TEST(Galerkin, IdentityKeepsGraph) {
  const Graph g = testing::random_connected_graph(12, 15, 5, true);
  InterpolationOperator P;
  P.rows.resize(g.n());
  for (NodeId i = 0; i < g.n(); ++i) {
    P.rows[i].push(i, 1.0);
    P.aggregate_seed.push_back(i);
  }
  const Graph c = galerkin_coarsen(g, P);
  ASSERT_EQ(c.m(), g.m());
  for (EdgeId e = 0; e < g.m(); ++e) {
    EXPECT_EQ(c.edge(e).u, g.edge(e).u);
    EXPECT_EQ(c.edge(e).v, g.edge(e).v);
    EXPECT_DOUBLE_EQ(c.edge(e).weight, g.edge(e).weight);
  }
  for (NodeId v = 0; v < g.n(); ++v) EXPECT_DOUBLE_EQ(c.node_weight(v), g.node_weight(v));
}

TEST(Galerkin, MatchesDenseProduct) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const Graph g = testing::random_connected_graph(n, n, seed, true);
    const auto P = testing::random_interpolation(n, seed * 31);
    const auto dense = testing::dense_galerkin(g, P);
    const Graph c = galerkin_coarsen(g, P);
    for (NodeId p = 0; p < c.n(); ++p) {
      for (NodeId q = p + 1; q < c.n(); ++q) {
        const EdgeId e = c.find_edge(p, q);
        const double sparse = e == c.m() ? 0.0 : c.edge_weight(e);
        EXPECT_NEAR(sparse, dense[p][q], 1e-12 * std::max(1.0, dense[p][q]));
      }
    }
    EXPECT_NEAR(c.total_node_weight(), g.total_node_weight(), 1e-12);
  }
}

TEST(Galerkin, MatchingOperatorEqualsContraction) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = testing::random_connected_graph(20, 30, seed, true);
    Matching m;
    std::vector<char> used(g.n(), 0);
    for (EdgeId e = 0; e < g.m(); ++e) {
      if (!used[g.edge(e).u] && !used[g.edge(e).v]) {
        used[g.edge(e).u] = used[g.edge(e).v] = 1;
        m.push_back(e);
      }
    }
    const auto contraction = contract_matching(g, m);
    const Graph via_p = galerkin_coarsen(g, interpolation_from_matching(g, contraction.map));
    ASSERT_EQ(via_p.m(), contraction.coarse.m());
    for (EdgeId e = 0; e < via_p.m(); ++e) EXPECT_DOUBLE_EQ(via_p.edge_weight(e), contraction.coarse.edge_weight(e));
  }
}

TEST(ProjectAmg, OrderOneAndSameBlockSplits) {
  Graph path = Graph::unit(3, {{0, 1, 1}, {1, 2, 1}});
  InterpolationOperator P;
  P.rows.resize(3);
  P.rows[0].push(0, 1.0);
  P.rows[1].push(0, 0.5);
  P.rows[1].push(1, 0.5);
  P.rows[2].push(1, 1.0);
  P.aggregate_seed = {0, 2};
  Graph coarse({1.5, 1.5}, {{0, 1, 1}});
  auto same = make_partition(coarse, 2, {1, 1}, 0.03, 10.0);
  auto fine = project_amg(path, same, P, 10.0);
  EXPECT_EQ(fine.assignment, (std::vector<BlockId>{1, 1, 1}));
  auto split = make_partition(coarse, 2, {0, 1}, 0.03, 10.0);
  fine = project_amg(path, split, P, 10.0);
  EXPECT_EQ(fine.assignment[0], 0u);
  EXPECT_EQ(fine.assignment[2], 1u);
  EXPECT_DOUBLE_EQ(fine.cut, 1.0);
}

TEST(ProjectAmg, SplitNodeJoinsItsNeighborsBlock) {
  // Path 0-1-2-3-4; node 2 is split between the aggregates of 0 and 4,
  // while its neighbors 1 and 3 sit in block 1.
  Graph fine = Graph::unit(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  InterpolationOperator P;
  P.rows.resize(5);
  P.rows[0].push(0, 1.0);
  P.rows[1].push(1, 1.0);
  P.rows[2].push(0, 0.6);
  P.rows[2].push(3, 0.4);
  P.rows[3].push(2, 1.0);
  P.rows[4].push(3, 1.0);
  P.aggregate_seed = {0, 1, 3, 4};
  const Graph coarse = galerkin_coarsen(fine, P);
  const double lmax = 10.0;
  auto cp = make_partition(coarse, 2, {0, 1, 1, 1}, 0.03, lmax);
  const auto result = project_amg(fine, cp, P, lmax);

  // Exhaustive scoring of node 2 over both blocks with the others fixed.
  double best_score = std::numeric_limits<double>::infinity();
  BlockId best = kInvalidBlock;
  for (BlockId b = 0; b < 2; ++b) {
    std::vector<BlockId> a{0, 1, b, 1, 1};
    const auto w = block_weights(fine, a, 2);
    const double score = cut(fine, a) * block_penalty(w[b], lmax, PenaltyForm::overload);
    if (score < best_score) {
      best_score = score;
      best = b;
    }
  }
  EXPECT_EQ(best, 1u);
  EXPECT_EQ(result.assignment[2], best);
  EXPECT_DOUBLE_EQ(result.cut, 1.0);
}

TEST(ProjectAmg, PenaltyForms) {
  EXPECT_DOUBLE_EQ(block_penalty(5.0, 10.0, PenaltyForm::overload), 1.0);
  EXPECT_DOUBLE_EQ(block_penalty(10.1, 10.0, PenaltyForm::overload), std::exp2(100.0 * (10.1 / 10.0 - 1.0)));
  EXPECT_DOUBLE_EQ(block_penalty(5.0, 10.0, PenaltyForm::printed), std::exp2(50.0));
  EXPECT_DOUBLE_EQ(block_penalty(50.0, 10.0, PenaltyForm::printed), std::exp2(60.0));
}

}  // namespace
}  // namespace mlpart
