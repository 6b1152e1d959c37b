#ifndef ROBUST_GOSSIP_DATASET_HPP
#define ROBUST_GOSSIP_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robust_gossip/graph.hpp"

namespace rgossip {

// One real observation per node plus a flag recording whether contamination
// replaced it.
struct Dataset {
  std::vector<double> values;
  std::vector<bool> corrupted;

  Dataset() = default;
  explicit Dataset(std::vector<double> v) : values(std::move(v)), corrupted(values.size(), false) {}

  std::size_t size() const { return values.size(); }
};

// The values 1, 2, ..., n.
Dataset synthetic_range(std::size_t n);

struct ContaminationSpec {
  enum class Mode { Scale, Shift };

  double epsilon = 0.1;
  Mode mode = Mode::Scale;
  double magnitude = 10.0;
  std::uint64_t seed = 0;
};

/// Trimming level alpha resolved against a sample size n.
///
/// m = floor(alpha n) observations are discarded at each end. Rank estimates
/// are weighted through the closed inclusion interval [m + 1/2, n - m + 1/2],
/// which for integer ranks selects exactly m + 1, ..., n - m.
class TrimSpec {
 public:
  TrimSpec(double alpha, std::size_t n);

  double alpha() const { return alpha_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  double lower() const { return static_cast<double>(m_) + 0.5; }
  double upper() const { return static_cast<double>(n_ - m_) + 0.5; }
  double normalizer() const { return static_cast<double>(n_) / static_cast<double>(n_ - 2 * m_); }
  bool contains(double rank) const { return rank >= lower() && rank <= upper(); }

 private:
  double alpha_;
  std::size_t n_;
  std::size_t m_;
};

// 1 + number of strictly smaller values; tied values share the mid-rank.
std::vector<double> true_ranks(std::span<const double> values);

bool has_ties(std::span<const double> values);

double mean(std::span<const double> values);

// Average of order statistics m+1 .. n-m. Throws ParameterError on ties.
double trimmed_mean(std::span<const double> values, const TrimSpec& trim);

// n/(n-2m) inside the inclusion interval, zero outside.
double weight(double rank, const TrimSpec& trim);

// Replaces floor(epsilon n) uniformly chosen values. When that count is zero
// the input is returned unchanged and a warning is appended.
Dataset contaminate(const Dataset& data, const ContaminationSpec& spec,
                    std::vector<std::string>* warnings = nullptr);

// Adds seeded uniform noise of size relative * (max - min) until all values
// are pairwise distinct.
void jitter(Dataset& data, std::uint64_t seed, double relative = 1e-9);

double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct CsvOptions {
  double radius_km = 1.0;
  bool jitter = false;
  std::uint64_t jitter_seed = 0;
};

struct CsvData {
  Dataset dataset;
  // Present when the file carries lat/lon columns.
  std::optional<Graph> graph;
  // Original node_id of each retained row.
  std::vector<std::size_t> node_ids;
  std::vector<std::string> warnings;
};

// Schema: header `node_id,value[,lat,lon]`, node ids 0-based and contiguous.
// With coordinates, sensors within radius_km are linked and only the largest
// connected component is kept.
CsvData load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_DATASET_HPP
