#ifndef ROBUST_GOSSIP_ENGINE_HPP
#define ROBUST_GOSSIP_ENGINE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "robust_gossip/graph.hpp"

namespace rgossip {

/// Node-state machine driven by the engine.
///
/// Each round the engine calls local_update(k, s) for every node k in index
/// order (only if has_local_phase()), then samples one edge and calls
/// edge_update(i, j, s). local_update may only touch node k's state and
/// edge_update only the two endpoints' state. Rounds are 1-based.
class Protocol {
 public:
  virtual ~Protocol() = default;

  virtual std::string name() const = 0;
  virtual std::size_t node_count() const = 0;

  virtual bool has_local_phase() const { return false; }
  virtual void local_update(NodeId /*k*/, std::uint64_t /*round*/) {}
  virtual void edge_update(NodeId i, NodeId j, std::uint64_t round) = 0;

  // The protocol's per-node output: rank estimates, mean estimates, ...
  virtual std::span<const double> estimates() const = 0;
};

// Draws the edge activated in each round, uniformly or by per-edge
// probability. With weights summing below one the remainder is the chance
// that a round carries no communication.
class EdgeSampler {
 public:
  EdgeSampler(const Graph& g, std::uint64_t seed);

  // Index into graph.edges(), or nullopt for a silent round.
  std::optional<std::size_t> next();

  double no_event_probability() const { return no_event_; }

 private:
  std::size_t edge_count_;
  bool weighted_;
  double no_event_ = 0.0;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::size_t> uniform_;
  std::discrete_distribution<std::size_t> weighted_dist_;
};

// Copy of g where every edge survives with probability `survival`, i.e.
// p_e = survival * (base p_e, or 1/|E| when g is unweighted).
Graph with_edge_failure(const Graph& g, double survival);

// Deterministic 64-bit mixing of base_seed + trial.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial);

struct Metric {
  std::string name;
  bool per_node = false;
  // Returns node_count values when per_node, otherwise exactly one.
  std::function<std::vector<double>(const Protocol&)> evaluate;
};

class TrialRecorder {
 public:
  TrialRecorder(std::vector<std::uint64_t> sample_times, std::vector<Metric> metrics);

  // `points` log-spaced times in [1, horizon] plus {1, 2, 5, 10}, deduplicated.
  static std::vector<std::uint64_t> default_times(std::uint64_t horizon, std::size_t points = 200);

  const std::vector<std::uint64_t>& sample_times() const { return times_; }
  const std::vector<Metric>& metrics() const { return metrics_; }

 private:
  std::vector<std::uint64_t> times_;
  std::vector<Metric> metrics_;
};

struct Trajectory {
  std::vector<std::uint64_t> times;
  std::vector<std::string> metric_names;
  std::vector<bool> per_node;
  // values[metric][time index][node, or 0 for aggregates]
  std::vector<std::vector<std::vector<double>>> values;
};

using RoundObserver = std::function<void(std::uint64_t round, const Protocol&)>;

// Runs `horizon` rounds. A sample time of 0 records the initial state.
Trajectory run_trial(Protocol& protocol, const Graph& g, std::uint64_t horizon, const TrialRecorder& recorder,
                     std::uint64_t seed, const RoundObserver& observer = {});

struct AggregateTrajectory {
  std::vector<std::uint64_t> times;
  std::vector<std::string> metric_names;
  std::vector<bool> per_node;
  // mean/std[metric][time index][node or 0]; std is the sample standard
  // deviation over trials (zero for a single trial).
  std::vector<std::vector<std::vector<double>>> mean;
  std::vector<std::vector<std::vector<double>>> std;
  std::size_t trials = 0;

  std::size_t metric_index(const std::string& name) const;
};

// Welford reduction over trajectories in the given order.
AggregateTrajectory aggregate(std::span<const Trajectory> trials);

using ProtocolFactory = std::function<std::unique_ptr<Protocol>(std::size_t trial)>;

struct EnsembleConfig {
  ProtocolFactory make_protocol;
  std::uint64_t horizon = 1;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  // Worker threads; results do not depend on this value.
  std::size_t workers = 1;
};

AggregateTrajectory run_ensemble(const EnsembleConfig& config, const Graph& g, const TrialRecorder& recorder);

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_ENGINE_HPP
