#include <cmath>

#include <gtest/gtest.h>

#include "robust_gossip/bounds.hpp"
#include "robust_gossip/errors.hpp"
#include "robust_gossip/metrics.hpp"

using namespace rgossip;

namespace {

Graph complete(std::size_t n) { return build_graph({topology::Complete{}, n}); }

// Direct Cesaro sum with explicit matrix powers.
std::vector<double> brute_rank_oracle(const Graph& g, const std::vector<double>& x, std::uint64_t t) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::MatrixXd w = expected_gossip_matrix(g, 1.0);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (std::uint64_t s = 0; s < t; ++s) {
    acc += power;
    power = power * w;
  }
  std::vector<double> out(x.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto h = comparison_profile(x, static_cast<std::size_t>(k));
    double v = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) v += h[l] * acc(l, k);
    out[k] = static_cast<double>(n) * v / static_cast<double>(t) + 1.0;
  }
  return out;
}

}  // namespace

TEST(RankError, Examples) {
  const std::vector<double> r{1, 2, 3, 4};
  EXPECT_EQ(rank_error(r, r).mean, 0.0);
  const std::vector<double> est{1, 2, 1, 4};
  EXPECT_DOUBLE_EQ(rank_error(est, r).per_node[2], 0.5);
  const std::vector<double> top{5, 2, 3, 4};
  EXPECT_DOUBLE_EQ(rank_error(top, r).per_node[0], 1.0);
}

TEST(TrimError, Examples) {
  const std::vector<double> z{4, 6};
  EXPECT_DOUBLE_EQ(trim_error(z, 5.0), 1.0);
  const std::vector<double> flat{5, 5, 5};
  EXPECT_DOUBLE_EQ(trim_error(flat, 5.0), 0.0);
}

TEST(ComparisonProfile, SumsToRankMinusOne) {
  const std::vector<double> x{4.2, -1.0, 7.5, 0.3, 2.2};
  const auto r = true_ranks(x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto h = comparison_profile(x, k);
    double s = 0.0;
    for (double v : h) s += v;
    EXPECT_DOUBLE_EQ(s + 1.0, r[k]);
  }
}

TEST(RankOracle, SmallCases) {
  const Graph k3 = complete(3);
  const std::vector<double> x{1, 2, 3};
  for (double v : expected_rank_oracle(k3, x, 1)) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_NEAR(expected_rank_oracle(k3, x, 2)[1], 1.5, 1e-12);
}

TEST(RankOracle, MatchesMatrixPowers) {
  const Graph g = build_graph({topology::Grid2D{3, 3}, 9});
  const std::vector<double> x{0.5, 8, 3, 7, 1, 4, 6, 2, 5};
  const ExpectedRankOracle oracle(g, x);
  for (std::uint64_t t : {1u, 2u, 3u, 10u, 57u}) {
    const auto a = oracle.at(t);
    const auto b = brute_rank_oracle(g, x, t);
    for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(a[k], b[k], 1e-9);
  }
}

TEST(RankOracle, LimitIsTrueRank) {
  const Graph g = build_graph({topology::Cycle{}, 7});
  const std::vector<double> x{3, 9, 1, 4, 8, 2, 6};
  const auto est = expected_rank_oracle(g, x, 1000000);
  const auto r = true_ranks(x);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(est[k], r[k], 1e-3);
}

TEST(AverageOracle, Examples) {
  const Graph edge(2, {{0, 1}});
  const std::vector<double> x0{0, 2};
  const auto same = expected_average_oracle(edge, x0, 0);
  EXPECT_NEAR(same[0], 0.0, 1e-12);
  EXPECT_NEAR(same[1], 2.0, 1e-12);
  const auto x1 = expected_average_oracle(edge, x0, 1);
  EXPECT_NEAR(x1[0], 1.0, 1e-12);
  EXPECT_NEAR(x1[1], 1.0, 1e-12);
  const Graph k3 = complete(3);
  const std::vector<double> y0{0, 0, 3};
  const Eigen::MatrixXd w2 = expected_gossip_matrix(k3, 2.0);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y0.data(), 3);
  for (std::uint64_t t = 1; t <= 12; ++t) {
    y = w2 * y;
    const auto o = expected_average_oracle(k3, y0, t);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(o[k], y(k), 1e-12);
    EXPECT_NEAR((o[0] + o[1] + o[2]) / 3.0, 1.0, 1e-12);
  }
}

TEST(Oracles, RejectLargeOrWeightedGraphs) {
  const Graph big = build_graph({topology::Cycle{}, 201});
  std::vector<double> x(201);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = static_cast<double>(k);
  EXPECT_THROW(ExpectedRankOracle(big, x), ParameterError);
}

TEST(EventMatrices, Identities) {
  const Graph g = build_graph({topology::WattsStrogatz{4, 0.3, 1}, 8});
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd mean1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd mean2 = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    const Eigen::MatrixXd w1 = event_matrix(g.node_count(), e, 1.0);
    const Eigen::MatrixXd w2 = event_matrix(g.node_count(), e, 2.0);
    EXPECT_LT((w1 * w1 - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((w2 * w2 - w2).cwiseAbs().maxCoeff(), 1e-12);
    mean1 += w1 / static_cast<double>(g.edge_count());
    mean2 += w2 / static_cast<double>(g.edge_count());
  }
  EXPECT_LT((mean1 - expected_gossip_matrix(g, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((mean2 - expected_gossip_matrix(g, 2.0)).cwiseAbs().maxCoeff(), 1e-12);
  // Doubly stochastic and symmetric.
  const Eigen::MatrixXd w = expected_gossip_matrix(g, 2.0);
  EXPECT_LT((w.rowwise().sum() - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((w - w.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spearman, Basics) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{10, 20, 30, 40};
  const std::vector<double> c{4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, b), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, c), -1.0, 1e-12);
}

TEST(Bounds, SigmaAndGamma) {
  EXPECT_DOUBLE_EQ(phi(0.5), 0.5);
  EXPECT_DOUBLE_EQ(phi(0.0), 0.0);
  EXPECT_DOUBLE_EQ(phi(1.2), 0.0);
  const std::vector<double> x4{1, 2, 3, 4};
  const auto p4 = make_bound_params(1.0, x4);
  EXPECT_DOUBLE_EQ(p4.sigma[2], 4.0);
  EXPECT_DOUBLE_EQ(p4.sigma[0], 0.0);
  std::vector<double> x10(10);
  for (std::size_t k = 0; k < 10; ++k) x10[k] = static_cast<double>(k + 1);
  const auto p10 = make_bound_params(1.0, x10, TrimSpec(0.2, 10));
  EXPECT_DOUBLE_EQ(p10.gamma[4], 2.5);
  for (double g : p10.gamma) EXPECT_GE(g, 0.5);
  EXPECT_DOUBLE_EQ(p10.gamma[1], 0.5);
  const std::vector<double> tied{1, 1, 2};
  EXPECT_THROW(make_bound_params(1.0, tied), ParameterError);
  EXPECT_THROW(make_bound_params(0.0, x4), ParameterError);
}

TEST(Bounds, RankBiasHoldsOnK5) {
  const Graph g = complete(5);
  const std::vector<double> x{2.5, 1.0, 4.0, 3.0, 5.0};
  const double c = spectral_info(g).c;
  EXPECT_NEAR(c, 0.5, 1e-12);
  const auto params = make_bound_params(c, x);
  const ExpectedRankOracle oracle(g, x);
  const auto r = true_ranks(x);
  for (std::uint64_t t = 1; t <= 100; ++t) {
    const auto e = oracle.at(t);
    const auto b = rank_bias_bound(params, t);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_LE(std::abs(e[k] - r[k]), b[k] + 1e-12);
  }
}

TEST(Bounds, RankGapConsistency) {
  const std::vector<double> x{3, 1, 2, 5, 4, 6};
  const auto params = make_bound_params(0.1, x);
  for (std::uint64_t t : {1u, 7u, 100u}) {
    const auto b1 = rank_bias_bound(params, t);
    const auto b2 = rank_gap_bounds(params, t);
    const double ct = 0.1 * static_cast<double>(t);
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_NEAR(b2.second_moment[k], 3.0 * ct * b1[k] * b1[k], 1e-9 * (1.0 + b2.second_moment[k]));
      EXPECT_NEAR(b2.abs_deviation[k] * b2.abs_deviation[k], b2.second_moment[k], 1e-9 * (1.0 + b2.second_moment[k]));
    }
  }
  EXPECT_THROW(rank_bias_bound(params, 0), ParameterError);
}

TEST(Bounds, WeightBiasNeedsTrim) {
  const std::vector<double> x{3, 1, 2, 5, 4};
  const auto params = make_bound_params(0.5, x);
  EXPECT_THROW(weight_bias_bound(params, 10), ParameterError);
  const auto trimmed = make_bound_params(0.5, x, TrimSpec(0.2, 5));
  const auto b = weight_bias_bound(trimmed, 10);
  // Rank 1 has sigma 0, so its bound vanishes.
  EXPECT_DOUBLE_EQ(b[1], 0.0);
  EXPECT_GT(b[2], 0.0);
}

TEST(Bounds, TrimThreshold) {
  EXPECT_EQ(trim_bound_threshold(0.5), 9u);
  for (double c : {0.9, 0.3, 0.05, 1e-3, 1.65e-5}) {
    const auto t = trim_bound_threshold(c);
    auto f = [c](double s) { return c * s - 2.0 * std::log(s); };
    EXPECT_GT(f(static_cast<double>(t)), 0.0);
    for (std::uint64_t s = 2; s < t && s < 200000; ++s) ASSERT_LE(f(static_cast<double>(s)), 0.0) << c;
  }
}

TEST(Bounds, TrimErrorDomain) {
  std::vector<double> x(10);
  for (std::size_t k = 0; k < 10; ++k) x[k] = static_cast<double>(k + 1);
  const auto params = make_bound_params(0.5, x, TrimSpec(0.2, 10));
  EXPECT_FALSE(trim_error_bound(params, x, 9).has_value());
  const auto b = trim_error_bound(params, x, 10);
  ASSERT_TRUE(b.has_value());
  const double norm = masked_data_norm(params, x);
  EXPECT_GT(norm, 0.0);
  EXPECT_TRUE(std::isfinite(norm));
  const double ct = 5.0;
  EXPECT_NEAR(*b, (5.0 / ct + 4.0 / (ct - 2.0 * std::log(10.0))) * 3.0 / (0.5 * 0.6) * norm, 1e-9 * *b);
  EXPECT_GT(*b, *trim_error_bound(params, x, 1000));
}

TEST(Bounds, BreakdownMonotoneAndLimit) {
  const Graph g = complete(10);
  std::vector<double> x(10);
  for (std::size_t k = 0; k < 10; ++k) x[k] = static_cast<double>(k + 1);
  const double c = spectral_info(g).c;
  const auto params = make_bound_params(c, x, TrimSpec(0.2, 10));
  const double big_t = propagation_time(params, x, 1.0, 0.1);
  EXPECT_NEAR(big_t, 4.0 / c * std::log(10.0 / (0.1 / 10.0)), 1e-9);
  EXPECT_FALSE(breakdown_bounds(params, x, 1.0, 0.1, static_cast<std::uint64_t>(big_t)).has_value());
  double prev = -1.0;
  for (std::uint64_t t = static_cast<std::uint64_t>(big_t) + 1; t < 1e12; t *= 3) {
    const auto b = breakdown_bounds(params, x, 1.0, 0.1, t);
    ASSERT_TRUE(b.has_value());
    EXPECT_DOUBLE_EQ(b->upper, 0.2);
    EXPECT_GE(b->lower, prev);
    EXPECT_LE(b->lower, b->upper);
    prev = b->lower;
  }
  EXPECT_DOUBLE_EQ(prev, 0.2);
  EXPECT_NEAR(k_delta(params, 0.1), params.c_m / ((1.0 - 0.1) * std::sqrt(c) * 0.1), 1e-12);
}

TEST(Bounds, AveragingAndClipping) {
  EXPECT_NEAR(averaging_rate_bound(0.5, 4), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(averaging_tail_bound(0.5, 4, 0.5), 4.0 * std::exp(-1.0), 1e-14);
  const Graph g = complete(4);
  const std::vector<double> x{0, 1, 2, 10};
  EXPECT_DOUBLE_EQ(max_edge_gap(g, x), 10.0);
  // tau = 1, m0 = 10: a = 0.05, beta = 0.095.
  EXPECT_NEAR(clipped_contraction_factor(g, 4.0, x, 1.0), 1.0 - 0.095 * 4.0 / 6.0, 1e-12);
}
