#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "robust_gossip/dataset.hpp"
#include "robust_gossip/errors.hpp"

using namespace rgossip;

namespace {

// Sort-and-average reference.
double sorted_trim(std::vector<double> v, std::size_t m) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (std::size_t i = m; i < v.size() - m; ++i) s += v[i];
  return s / static_cast<double>(v.size() - 2 * m);
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Ranks, Definition) {
  const std::vector<double> a{3, 1, 2};
  EXPECT_EQ(true_ranks(a), (std::vector<double>{3, 1, 2}));
  const std::vector<double> b{5, 7, 5};
  EXPECT_EQ(true_ranks(b), (std::vector<double>{1.5, 3, 1.5}));
  const std::vector<double> c{10};
  EXPECT_EQ(true_ranks(c), (std::vector<double>{1}));
  EXPECT_TRUE(has_ties(b));
  EXPECT_FALSE(has_ties(a));
}

TEST(TrimSpec, Interval) {
  const TrimSpec t(0.2, 5);
  EXPECT_EQ(t.m(), 1u);
  EXPECT_DOUBLE_EQ(t.lower(), 1.5);
  EXPECT_DOUBLE_EQ(t.upper(), 4.5);
  EXPECT_DOUBLE_EQ(t.normalizer(), 5.0 / 3.0);
  // alpha n lands on an integer despite rounding in 0.3 * 10.
  EXPECT_EQ(TrimSpec(0.3, 10).m(), 3u);
  EXPECT_THROW(TrimSpec(0.5, 10), ParameterError);
  EXPECT_THROW(TrimSpec(0.0, 10), ParameterError);
}

TEST(TrimmedMean, Examples) {
  const std::vector<double> a{1, 2, 3, 10, 100};
  EXPECT_DOUBLE_EQ(trimmed_mean(a, TrimSpec(0.2, 5)), 5.0);
  const std::vector<double> b{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(trimmed_mean(b, TrimSpec(0.1, 5)), 3.0);
  std::vector<double> c{1, 2, 3, 4, 5, 6, 7, 8, 9, 1000};
  EXPECT_DOUBLE_EQ(trimmed_mean(c, TrimSpec(0.2, 10)), 5.5);
  const std::vector<double> tied{1, 1, 2, 3, 4};
  EXPECT_THROW(trimmed_mean(tied, TrimSpec(0.2, 5)), ParameterError);
}

TEST(Weight, ClosedInterval) {
  const TrimSpec t(0.2, 5);
  EXPECT_DOUBLE_EQ(weight(3.0, t), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(weight(1.0, t), 0.0);
  EXPECT_DOUBLE_EQ(weight(4.5, t), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(weight(1.5, t), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(weight(4.5000001, t), 0.0);
}

TEST(TrimmedMean, WeightedFormMatchesSortOracle) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist(0.0, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 5 + rep;
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    for (double alpha : {0.05, 0.1, 0.2, 0.33, 0.45}) {
      const TrimSpec t(alpha, n);
      const auto r = true_ranks(x);
      double weighted = 0.0;
      for (std::size_t k = 0; k < n; ++k) weighted += weight(r[k], t) * x[k];
      weighted /= static_cast<double>(n);
      const double ref = sorted_trim(x, t.m());
      EXPECT_NEAR(weighted, ref, 1e-9 * (1.0 + std::abs(ref)));
      EXPECT_NEAR(trimmed_mean(x, t), ref, 1e-9 * (1.0 + std::abs(ref)));
    }
  }
}

TEST(Contaminate, ShiftOneValue) {
  const Dataset clean = synthetic_range(10);
  const Dataset d = contaminate(clean, {0.1, ContaminationSpec::Mode::Shift, 100.0, 7});
  int changed = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    if (d.corrupted[k]) {
      ++changed;
      EXPECT_DOUBLE_EQ(d.values[k], clean.values[k] + 100.0);
    } else {
      EXPECT_DOUBLE_EQ(d.values[k], clean.values[k]);
    }
  }
  EXPECT_EQ(changed, 1);
}

TEST(Contaminate, FloorToZeroWarns) {
  const Dataset clean = synthetic_range(5);
  std::vector<std::string> warnings;
  const Dataset d = contaminate(clean, {0.1, ContaminationSpec::Mode::Scale, 10.0, 0}, &warnings);
  EXPECT_EQ(d.values, clean.values);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Contaminate, ScaleRaisesMean) {
  const Dataset clean = synthetic_range(10);
  const Dataset d = contaminate(clean, {0.2, ContaminationSpec::Mode::Scale, 10.0, 3});
  EXPECT_EQ(std::count(d.corrupted.begin(), d.corrupted.end(), true), 2);
  EXPECT_GT(mean(d.values), mean(clean.values));
  const Dataset again = contaminate(clean, {0.2, ContaminationSpec::Mode::Scale, 10.0, 3});
  EXPECT_EQ(again.values, d.values);
}

TEST(Jitter, SeparatesTies) {
  Dataset d(std::vector<double>{1, 1, 2, 2, 2, 3});
  jitter(d, 5);
  EXPECT_FALSE(has_ties(d.values));
  EXPECT_NEAR(d.values[0], 1.0, 1e-6);
}

TEST(Haversine, KnownDistance) {
  EXPECT_NEAR(haversine_km(0, 0, 0, 1), 111.19, 0.05);
  EXPECT_DOUBLE_EQ(haversine_km(47.5, 7.6, 47.5, 7.6), 0.0);
}

TEST(Csv, PlainValues) {
  const auto path = write_temp("rg_plain.csv", "node_id,value\n0,1.0\n1,2.0\n2,3.0\n");
  const CsvData data = load_csv(path);
  EXPECT_EQ(data.dataset.values, (std::vector<double>{1, 2, 3}));
  EXPECT_FALSE(data.graph.has_value());
  std::filesystem::remove(path);
}

TEST(Csv, ProximityGraph) {
  // 0.5 km apart along a meridian: 0.5 / 111.19 degrees.
  const double dlat = 0.5 / 111.195;
  std::string body = "node_id,value,lat,lon\n";
  body += "0,1.0,47.0,7.0\n";
  body += "1,2.0," + std::to_string(47.0 + dlat) + ",7.0\n";
  const auto path = write_temp("rg_geo.csv", body);
  const CsvData data = load_csv(path, {1.0, false, 0});
  ASSERT_TRUE(data.graph.has_value());
  EXPECT_EQ(data.graph->edge_count(), 1u);
  std::filesystem::remove(path);
}

TEST(Csv, KeepsLargestComponent) {
  const auto path = write_temp("rg_split.csv",
                               "node_id,value,lat,lon\n0,1,47.0,7.0\n1,2,47.001,7.0\n2,3,47.002,7.0\n3,4,48.0,7.0\n");
  const CsvData data = load_csv(path);
  ASSERT_TRUE(data.graph.has_value());
  EXPECT_EQ(data.dataset.size(), 3u);
  EXPECT_EQ(data.node_ids, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_FALSE(data.warnings.empty());
  std::filesystem::remove(path);
}

TEST(Csv, JitterOption) {
  const auto path = write_temp("rg_dupes.csv", "node_id,value\n0,5\n1,5\n2,5\n");
  const CsvData data = load_csv(path, {1.0, true, 9});
  EXPECT_FALSE(has_ties(data.dataset.values));
  std::filesystem::remove(path);
}

TEST(Csv, Malformed) {
  const auto path = write_temp("rg_bad.csv", "node_id,value\n0,1\n1,abc\n");
  try {
    load_csv(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::filesystem::remove(path);
}
