#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "robust_gossip/errors.hpp"
#include "robust_gossip/graph.hpp"

using namespace rgossip;

namespace {

Graph complete(std::size_t n) { return build_graph({topology::Complete{}, n}); }
Graph cycle(std::size_t n) { return build_graph({topology::Cycle{}, n}); }
Graph grid(std::size_t r, std::size_t c) { return build_graph({topology::Grid2D{r, c}, r * c}); }

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST(Graph, EdgeCounts) {
  EXPECT_EQ(complete(500).edge_count(), 124750u);
  EXPECT_EQ(grid(20, 25).edge_count(), 955u);
  EXPECT_EQ(cycle(500).edge_count(), 500u);
  EXPECT_EQ(build_graph({topology::WattsStrogatz{4, 0.2, 1}, 100}).edge_count(), 200u);
  EXPECT_EQ(build_graph({topology::KRegular{3, 2}, 50}).edge_count(), 75u);
}

TEST(Graph, CanonicalEdgesAndRejects) {
  Graph g(3, {{2, 0}, {1, 2}});
  EXPECT_EQ(g.edges()[0], (Edge{0, 2}));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_EQ(g.degree(2), 2u);
  EXPECT_THROW(Graph(3, {{0, 0}}), ParameterError);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), ParameterError);
  EXPECT_THROW(Graph(3, {{0, 3}}), ParameterError);
  EXPECT_THROW(Graph(2, {{0, 1}}, std::vector<double>{1.5}), ParameterError);
}

TEST(Graph, GridDims) {
  EXPECT_EQ(grid_dims(100).rows, 10u);
  EXPECT_EQ(grid_dims(500).rows, 20u);
  EXPECT_EQ(grid_dims(500).cols, 25u);
  EXPECT_EQ(grid_dims(7).rows, 1u);
}

TEST(Graph, LaplacianRowsSumToZero) {
  const Graph g = build_graph({topology::WattsStrogatz{4, 0.3, 5}, 40});
  const Eigen::MatrixXd lap = laplacian(g);
  EXPECT_LT(lap.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((lap - lap.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(lap.trace(), 2.0 * static_cast<double>(g.edge_count()), 1e-12);
}

TEST(Graph, AnalyticSecondEigenvalues) {
  for (std::size_t n : {3u, 5u, 17u}) {
    EXPECT_NEAR(spectral_info(complete(n)).lambda2, static_cast<double>(n), 1e-9);
    EXPECT_NEAR(spectral_info(cycle(n)).lambda2, 2.0 * (1.0 - std::cos(2.0 * std::numbers::pi / n)), 1e-9);
  }
  const auto info = spectral_info(grid(4, 7));
  EXPECT_NEAR(info.lambda2, 2.0 * (1.0 - std::cos(std::numbers::pi / 7.0)), 1e-9);
  EXPECT_NEAR(info.c, info.lambda2 / static_cast<double>(info.edge_count), 1e-15);
  EXPECT_NEAR(info.c2, info.c / 2.0, 1e-15);
  EXPECT_NEAR(info.lambda2_swap, 1.0 - info.c, 1e-15);
  EXPECT_NEAR(info.lambda2_avg, 1.0 - info.c / 2.0, 1e-15);
  EXPECT_TRUE(info.bipartite);
}

TEST(Graph, LanczosRouteMatchesAnalytic) {
  const std::size_t n = 2500;
  const auto info = spectral_info(cycle(n));
  EXPECT_NEAR(info.lambda2 / (2.0 * (1.0 - std::cos(2.0 * std::numbers::pi / n))), 1.0, 1e-6);
  const auto g = grid(50, 60);
  const auto ginfo = spectral_info(g);
  EXPECT_NEAR(ginfo.lambda2 / (2.0 * (1.0 - std::cos(std::numbers::pi / 60.0))), 1.0, 1e-6);
}

TEST(Graph, LanczosAgreesWithDenseOnRandomGraph) {
  const Graph g = build_graph({topology::WattsStrogatz{4, 0.2, 9}, 300});
  SpectralOptions sparse;
  sparse.dense_limit = 10;
  EXPECT_NEAR(spectral_info(g, sparse).lambda2, spectral_info(g).lambda2, 1e-7);
}

TEST(Graph, EdgeFailureWeightsScaleGap) {
  Graph g = complete(6);
  std::vector<double> w(g.edge_count(), 0.5 / static_cast<double>(g.edge_count()));
  const auto info = spectral_info(g.with_weights(w));
  EXPECT_NEAR(info.effective_c, 0.5 * info.c, 1e-12);
}

TEST(Graph, ValidateFlagsBipartiteAndDisconnected) {
  const auto v = validate(cycle(6));
  EXPECT_TRUE(v.connected);
  EXPECT_TRUE(v.bipartite);
  EXPECT_FALSE(v.warnings.empty());
  const Graph split(4, {{0, 1}, {2, 3}});
  EXPECT_FALSE(is_connected(split));
  EXPECT_FALSE(is_bipartite(cycle(5)));
  Graph parts(5, {{0, 1}, {1, 2}, {3, 4}});
  const auto big = largest_component(parts);
  EXPECT_EQ(big, (std::vector<NodeId>{0, 1, 2}));
  const Graph sub = induced_subgraph(parts, big);
  EXPECT_EQ(sub.node_count(), 3u);
  EXPECT_EQ(sub.edge_count(), 2u);
}

TEST(Graph, EdgeListRoundTrip) {
  const Graph g = build_graph({topology::WattsStrogatz{4, 0.2, 3}, 30});
  const auto path = temp_file("rg_edges_roundtrip.txt");
  write_edge_list(g, path);
  const Graph back = read_edge_list(path);
  ASSERT_EQ(back.node_count(), g.node_count());
  ASSERT_EQ(back.edge_count(), g.edge_count());
  for (std::size_t i = 0; i < g.edge_count(); ++i) EXPECT_EQ(back.edges()[i], g.edges()[i]);
  std::filesystem::remove(path);
}

TEST(Graph, EdgeListParseErrorCarriesLine) {
  const auto path = temp_file("rg_edges_bad.txt");
  {
    std::ofstream out(path);
    out << "# comment\n0 1\n1 x\n";
  }
  try {
    read_edge_list(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::filesystem::remove(path);
}

TEST(Graph, WattsStrogatzDeterministicAndSimple) {
  const Graph a = build_graph({topology::WattsStrogatz{4, 0.2, 11}, 80});
  const Graph b = build_graph({topology::WattsStrogatz{4, 0.2, 11}, 80});
  const Graph c = build_graph({topology::WattsStrogatz{4, 0.2, 12}, 80});
  ASSERT_EQ(a.edge_count(), b.edge_count());
  bool same_as_c = a.edge_count() == c.edge_count();
  for (std::size_t i = 0; i < a.edge_count(); ++i) {
    EXPECT_EQ(a.edges()[i], b.edges()[i]);
    if (same_as_c && !(a.edges()[i] == c.edges()[i])) same_as_c = false;
  }
  EXPECT_FALSE(same_as_c);
  const Graph ring = build_graph({topology::WattsStrogatz{4, 0.0, 0}, 10});
  for (NodeId k = 0; k < 10; ++k) EXPECT_EQ(ring.degree(k), 4u);
  EXPECT_THROW(build_graph({topology::WattsStrogatz{3, 0.2, 0}, 10}), ParameterError);
}

TEST(Graph, KRegularDegrees) {
  const Graph g = build_graph({topology::KRegular{4, 7}, 30});
  for (NodeId k = 0; k < 30; ++k) EXPECT_EQ(g.degree(k), 4u);
  EXPECT_THROW(build_graph({topology::KRegular{3, 0}, 7}), ParameterError);
}

TEST(Graph, ClusteredBridges) {
  const Graph g = build_graph({topology::Clustered{{5, 6}, 2, 4}, 11});
  EXPECT_EQ(g.edge_count(), 10u + 15u + 2u);
  EXPECT_TRUE(is_connected(g));
}

TEST(Graph, TopologyNames) {
  EXPECT_EQ(topology_name({topology::Complete{}, 3}), "complete");
  EXPECT_EQ(topology_name({topology::Grid2D{2, 2}, 4}), "grid");
  EXPECT_EQ(topology_name({topology::Cycle{}, 3}), "cycle");
}
