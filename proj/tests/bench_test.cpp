#include <gtest/gtest.h>

#include <sstream>

#include "mlpart/bench.hpp"
#include "mlpart/generators.hpp"
#include "support.hpp"

namespace mlpart {
namespace {

TEST(Generators, Shapes) {
  const Graph grid = grid2d(4, 5);
  EXPECT_EQ(grid.n(), 20u);
  EXPECT_EQ(grid.m(), 4u * 4 + 3u * 5);
  const Graph pa = preferential_attachment(500, 2, 3);
  EXPECT_EQ(pa.n(), 500u);
  EXPECT_EQ(pa.m(), 3u + 2u * 497);  // triangle core, then two edges per node
  EXPECT_TRUE(is_connected(pa));
  EXPECT_EQ(gnm(30, 50, 1).m(), 50u);
  EXPECT_THROW(gnm(4, 7, 1), std::invalid_argument);
  EXPECT_EQ(gnp(10, 1.0, 1).m(), 45u);
  EXPECT_EQ(gnp(10, 0.0, 1).m(), 0u);
}

TEST(Budget, StrictlyBelowFractionTimesEdges) {
  EXPECT_EQ(inter_edge_budget(0.03, 1000), 29u);
  EXPECT_EQ(inter_edge_budget(0.025, 1000), 24u);
  EXPECT_EQ(inter_edge_budget(0.029, 1984), 57u);
  EXPECT_EQ(inter_edge_budget(0.01, 50), 0u);
}

TEST(HardMixture, TwoComponentsOfThousandEdges) {
  const Graph s1 = preferential_attachment(501, 2, 2);
  ASSERT_EQ(s1.m(), 3u + 2u * 498);
  const Graph parts[] = {grid2d(20, 26), s1};
  ASSERT_EQ(parts[0].m(), 19u * 26 + 20u * 25);
  MixtureParams params;
  params.fraction = 0.03;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    params.seed = seed;
    const auto mix = generate_hard_mixture(parts, params);
    EXPECT_LT(mix.inter_edges[1], 30u);
    EXPECT_LT(static_cast<double>(mix.inter_edges[1]), 0.03 * static_cast<double>(parts[1].m()));
    EXPECT_TRUE(is_connected(mix.graph));
    EXPECT_EQ(mix.graph.m(), parts[0].m() + parts[1].m() + mix.inter_edges[1]);
    // Every endpoint in S_1 of an inter-edge receives at least two of them.
    std::vector<int> per_node(parts[1].n(), 0);
    for (const auto& e : mix.graph.edges()) {
      const bool cross = (e.u < mix.offsets[1]) != (e.v < mix.offsets[1]);
      if (cross) ++per_node[std::max(e.u, e.v) - mix.offsets[1]];
    }
    for (int c : per_node) EXPECT_TRUE(c == 0 || c >= 2);
  }
}

TEST(HardMixture, CenterOnlyIsUnchanged) {
  const Graph parts[] = {grid2d(5, 5)};
  const auto mix = generate_hard_mixture(parts, MixtureParams{});
  EXPECT_EQ(mix.graph.m(), parts[0].m());
  EXPECT_EQ(mix.graph.n(), parts[0].n());
}

TEST(HardMixture, TinyBudgetNamesTheComponent) {
  const Graph parts[] = {grid2d(10, 10), grid2d(3, 3), grid2d(2, 2)};
  try {
    generate_hard_mixture(parts, MixtureParams{});
    FAIL() << "expected MixtureError";
  } catch (const MixtureError& e) {
    EXPECT_NE(std::string(e.what()).find("component 1"), std::string::npos);
  }
  MixtureParams bad;
  bad.fraction = 0.05;
  EXPECT_THROW(generate_hard_mixture(parts, bad), std::invalid_argument);
  bad.fraction = 0.02;
  bad.edges_per_boundary_node = 1;
  EXPECT_THROW(generate_hard_mixture(parts, bad), std::invalid_argument);
}

TEST(HardMixture, SpecFileParsing) {
  std::istringstream in("# mixture\ncenter = grid.graph\npart=pa.graph  # power law\nfraction=0.02\n"
                        "edges_per_node=3\nboundary_nodes=4\nseed=9\n");
  const auto spec = parse_mixture_spec(in, "/data");
  ASSERT_EQ(spec.parts.size(), 2u);
  EXPECT_EQ(spec.parts[0], "/data/grid.graph");
  EXPECT_EQ(spec.parts[1], "/data/pa.graph");
  EXPECT_DOUBLE_EQ(spec.params.fraction, 0.02);
  EXPECT_EQ(spec.params.edges_per_boundary_node, 3);
  EXPECT_EQ(spec.params.boundary_nodes, 4u);
  EXPECT_EQ(spec.params.seed, 9u);
  std::istringstream bad("center=a\nwhat=1\n");
  EXPECT_THROW(parse_mixture_spec(bad), ParseError);
  std::istringstream none("part=a\n");
  EXPECT_THROW(parse_mixture_spec(none), ParseError);
}

TEST(Ratios, WorkedExample) {
  const std::vector<double> a(10, 203.0);
  const std::vector<double> b(10, 100.0);
  EXPECT_DOUBLE_EQ(ratio_of_averages(a, b), 2.03);
  EXPECT_DOUBLE_EQ(ratio_of_averages(a, a), 1.0);
  EXPECT_THROW(ratio_of_averages(a, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST(Experiment, ReportIsConsistentAndDeterministic) {
  const std::vector<NamedGraph> graphs{{"grid", grid2d(12, 12)}, {"pa", preferential_attachment(200, 2, 4)}};
  const Preset presets[] = {Preset::eco, Preset::amg_eco};
  const BlockId ks[] = {2, 4};
  const std::uint64_t seeds[] = {1, 2, 3};
  const auto report = run_experiment(graphs, presets, ks, seeds);
  ASSERT_EQ(report.runs.size(), 2u * 2 * 2 * 3);
  for (const auto& r : report.runs) {
    EXPECT_FALSE(r.failed());
    EXPECT_LE(r.t_uncoarsen_ms, r.t_total_ms);
  }
  double sum = 0.0;
  for (const auto* r : report.cell("grid", Preset::eco, 2)) sum += r->cut;
  EXPECT_DOUBLE_EQ(report.average_cut("grid", Preset::eco, 2), sum / 3);
  EXPECT_DOUBLE_EQ(report.ratio_of_averages("pa", 4, Preset::eco, Preset::eco), 1.0);

  const auto again = run_experiment(graphs, presets, ks, seeds);
  std::ostringstream x;
  std::ostringstream y;
  write_runs_csv(x, report, false);
  write_runs_csv(y, again, false);
  EXPECT_EQ(x.str(), y.str());
  std::ostringstream ratios;
  write_ratios_csv(ratios, report);
  EXPECT_NE(ratios.str().find("grid,2,eco,amg-eco,"), std::string::npos);
}

TEST(Experiment, FailuresAreFlaggedAndExcluded) {
  // Zero node weights make algebraic distances undefined.
  const Graph grid = grid2d(10, 10);
  std::vector<WeightedEdge> edges(grid.edges().begin(), grid.edges().end());
  const std::vector<NamedGraph> graphs{{"massless", Graph(std::vector<double>(grid.n(), 0.0), edges)}};
  const Preset presets[] = {Preset::eco_alg};
  const BlockId ks[] = {2};
  const std::uint64_t seeds[] = {1};
  const auto report = run_experiment(graphs, presets, ks, seeds);
  ASSERT_EQ(report.runs.size(), 1u);
  EXPECT_TRUE(report.runs[0].failed());
  EXPECT_TRUE(std::isnan(report.average_cut("massless", Preset::eco_alg, 2)));
}

}  // namespace
}  // namespace mlpart
