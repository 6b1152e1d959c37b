#ifndef ROBUST_GOSSIP_EXPERIMENT_HPP
#define ROBUST_GOSSIP_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robust_gossip/dataset.hpp"
#include "robust_gossip/engine.hpp"
#include "robust_gossip/graph.hpp"

namespace rgossip {

struct DatasetSource {
  enum class Kind { Range, Csv };

  Kind kind = Kind::Range;
  // Range only; 0 means "one value per topology node".
  std::size_t n = 0;
  // Range only; places the values on nodes in a seeded random order.
  std::optional<std::uint64_t> shuffle_seed;
  std::filesystem::path path;
  CsvOptions csv;
};

struct ProtocolChoice {
  std::string name;
  std::string ranker = "gorank";
  double tau = 1.0;
  NodeId seed_node = 0;
  std::uint64_t burn_in = 0;
};

struct RecordPolicy {
  // Empty selects defaults for the protocol.
  std::vector<std::string> metrics;
  std::size_t points = 200;
  // Explicit sample times; overrides `points` when non-empty.
  std::vector<std::uint64_t> times;
  // Emit per-node rows in addition to the ALL rows.
  bool per_node = true;
};

struct BreakdownSweep {
  // Empty selects {m - 1, m, m + 1}.
  std::vector<std::size_t> counts;
  std::vector<double> magnitudes{1e3, 1e6, 1e9};
  double tau = 1.0;
  double delta = 0.1;
};

/// Declarative experiment description, loaded from JSON.
///
/// Only `topology` and `protocol` are required. A topology of kind
/// "proximity" takes its graph from a CSV dataset with coordinates.
struct ExperimentConfig {
  std::string id = "experiment";
  std::optional<TopologySpec> topology;
  bool proximity_topology = false;
  double edge_survival = 1.0;
  DatasetSource dataset;
  std::optional<ContaminationSpec> contamination;
  std::optional<double> alpha;
  ProtocolChoice protocol;
  std::uint64_t iterations = 20000;
  std::size_t trials = 100;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
  RecordPolicy record;
  std::filesystem::path output;
  BreakdownSweep breakdown;
};

// Throws ConfigError on malformed or inconsistent input.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Graph and data resolved from a config.
struct Prepared {
  Graph graph;
  Dataset clean;
  Dataset data;  // after contamination
  std::vector<std::string> warnings;
};

Prepared prepare(const ExperimentConfig& config);

struct OutputRow {
  std::string experiment;
  std::string protocol;
  std::uint64_t t = 0;
  std::string metric;
  std::optional<NodeId> node;  // nullopt prints as ALL
  double mean = 0.0;
  double std = 0.0;
  std::size_t trials = 0;
};

struct RunResult {
  // Written as `# key=value` lines ahead of the header.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<OutputRow> rows;
};

void append_rows(RunResult& result, const std::string& experiment, const std::string& protocol,
                 const AggregateTrajectory& agg);

void write_csv(std::ostream& out, const RunResult& result);
void write_csv(const std::filesystem::path& path, const RunResult& result);

struct SpectralReport {
  std::string topology;
  SpectralInfo info;
  Validation validation;
};

SpectralReport cmd_spectral(const ExperimentConfig& config);
void write_spectral(std::ostream& out, const SpectralReport& report);

// Runs the configured ensemble; one row per (t, metric, node or ALL).
RunResult cmd_run(const ExperimentConfig& config);

/// One cell of the corruption sweep.
///
/// Excursion is max_k |Z_k(T) - xbar_alpha| against the trimmed mean of the
/// uncorrupted data; oracle_shift is how far the exact trimmed mean of the
/// corrupted data itself moved.
struct BreakdownRow {
  std::size_t count = 0;
  double magnitude = 0.0;
  std::uint64_t horizon = 0;
  double excursion_mean = 0.0;
  double excursion_std = 0.0;
  double excursion_max = 0.0;
  double oracle_shift = 0.0;
  std::optional<double> bound_lower;
  double bound_upper = 0.0;
  std::size_t trials = 0;
};

struct BreakdownResult {
  std::string experiment;
  std::string protocol;
  double clean_range = 0.0;
  double clean_trimmed_mean = 0.0;
  std::vector<BreakdownRow> rows;
};

BreakdownResult cmd_breakdown(const ExperimentConfig& config);
void write_breakdown_csv(std::ostream& out, const BreakdownResult& result);

struct PresetOptions {
  std::size_t n = 100;
  std::optional<std::size_t> trials;
  std::uint64_t base_seed = 0;
  std::optional<std::uint64_t> iterations;
  std::size_t workers = 1;
};

const std::vector<std::string>& preset_names();

// Throws ConfigError for unknown names.
RunResult run_preset(const std::string& name, const PresetOptions& options = {});

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_EXPERIMENT_HPP
