#include "robust_gossip/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "robust_gossip/errors.hpp"

namespace rgossip {

EdgeSampler::EdgeSampler(const Graph& g, std::uint64_t seed)
    : edge_count_(g.edge_count()), weighted_(g.has_weights()), rng_(seed) {
  if (edge_count_ == 0) throw SetupError("cannot sample edges from an edgeless graph");
  uniform_ = std::uniform_int_distribution<std::size_t>(0, edge_count_ - 1);
  if (weighted_) {
    std::vector<double> p(g.weights().begin(), g.weights().end());
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    no_event_ = std::max(0.0, 1.0 - total);
    if (no_event_ > 1e-15) p.push_back(no_event_);
    weighted_dist_ = std::discrete_distribution<std::size_t>(p.begin(), p.end());
  }
}

std::optional<std::size_t> EdgeSampler::next() {
  if (!weighted_) return uniform_(rng_);
  const std::size_t draw = weighted_dist_(rng_);
  if (draw >= edge_count_) return std::nullopt;
  return draw;
}

Graph with_edge_failure(const Graph& g, double survival) {
  if (!(survival > 0.0 && survival <= 1.0)) throw ParameterError("edge survival probability must lie in (0, 1]");
  std::vector<double> p(g.edge_count(), 1.0 / static_cast<double>(g.edge_count()));
  if (g.has_weights()) p.assign(g.weights().begin(), g.weights().end());
  for (double& w : p) w *= survival;
  return g.with_weights(std::move(p));
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial) {
  // splitmix64 finalizer
  std::uint64_t z = base_seed + trial + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TrialRecorder::TrialRecorder(std::vector<std::uint64_t> sample_times, std::vector<Metric> metrics)
    : times_(std::move(sample_times)), metrics_(std::move(metrics)) {
  std::sort(times_.begin(), times_.end());
  times_.erase(std::unique(times_.begin(), times_.end()), times_.end());
}

std::vector<std::uint64_t> TrialRecorder::default_times(std::uint64_t horizon, std::size_t points) {
  std::vector<std::uint64_t> times = {1, 2, 5, 10};
  if (horizon >= 1 && points >= 2) {
    const double top = std::log(static_cast<double>(horizon));
    for (std::size_t i = 0; i < points; ++i) {
      const double t = std::exp(top * static_cast<double>(i) / static_cast<double>(points - 1));
      times.push_back(static_cast<std::uint64_t>(std::llround(t)));
    }
    times.push_back(horizon);
  }
  std::erase_if(times, [&](std::uint64_t t) { return t > horizon; });
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

namespace {

void record(const TrialRecorder& recorder, const Protocol& protocol, Trajectory& out) {
  const auto& metrics = recorder.metrics();
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    std::vector<double> v = metrics[m].evaluate(protocol);
    const std::size_t expected = metrics[m].per_node ? protocol.node_count() : 1;
    if (v.size() != expected) throw SetupError("metric '" + metrics[m].name + "' returned the wrong length");
    out.values[m].push_back(std::move(v));
  }
}

}  // namespace

Trajectory run_trial(Protocol& protocol, const Graph& g, std::uint64_t horizon, const TrialRecorder& recorder,
                     std::uint64_t seed, const RoundObserver& observer) {
  if (protocol.node_count() != g.node_count()) {
    throw SetupError("protocol holds " + std::to_string(protocol.node_count()) + " nodes but the graph has " +
                     std::to_string(g.node_count()));
  }
  if (horizon < 1) throw SetupError("horizon must be at least one round");

  Trajectory out;
  for (const auto& m : recorder.metrics()) {
    out.metric_names.push_back(m.name);
    out.per_node.push_back(m.per_node);
  }
  out.values.resize(recorder.metrics().size());

  const auto& times = recorder.sample_times();
  auto next_sample = times.begin();
  while (next_sample != times.end() && *next_sample == 0) {
    out.times.push_back(0);
    record(recorder, protocol, out);
    ++next_sample;
  }

  EdgeSampler sampler(g, seed);
  const auto edges = g.edges();
  const auto n = static_cast<NodeId>(g.node_count());
  const bool local = protocol.has_local_phase();
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    if (local) {
      for (NodeId k = 0; k < n; ++k) protocol.local_update(k, t);
    }
    if (const auto e = sampler.next()) protocol.edge_update(edges[*e].u, edges[*e].v, t);
    if (observer) observer(t, protocol);
    if (next_sample != times.end() && *next_sample == t) {
      out.times.push_back(t);
      record(recorder, protocol, out);
      ++next_sample;
    }
  }
  return out;
}

std::size_t AggregateTrajectory::metric_index(const std::string& name) const {
  const auto it = std::find(metric_names.begin(), metric_names.end(), name);
  if (it == metric_names.end()) throw SetupError("no metric named '" + name + "'");
  return static_cast<std::size_t>(it - metric_names.begin());
}

AggregateTrajectory aggregate(std::span<const Trajectory> trials) {
  AggregateTrajectory agg;
  if (trials.empty()) return agg;
  const Trajectory& first = trials.front();
  agg.times = first.times;
  agg.metric_names = first.metric_names;
  agg.per_node = first.per_node;
  agg.trials = trials.size();
  agg.mean.resize(first.values.size());
  agg.std.resize(first.values.size());
  for (std::size_t m = 0; m < first.values.size(); ++m) {
    agg.mean[m].resize(first.values[m].size());
    agg.std[m].resize(first.values[m].size());
    for (std::size_t ti = 0; ti < first.values[m].size(); ++ti) {
      const std::size_t width = first.values[m][ti].size();
      std::vector<double> mu(width, 0.0);
      std::vector<double> m2(width, 0.0);
      for (std::size_t r = 0; r < trials.size(); ++r) {
        const auto& row = trials[r].values[m][ti];
        const double count = static_cast<double>(r + 1);
        for (std::size_t k = 0; k < width; ++k) {
          const double delta = row[k] - mu[k];
          mu[k] += delta / count;
          m2[k] += delta * (row[k] - mu[k]);
        }
      }
      std::vector<double> sd(width, 0.0);
      if (trials.size() > 1) {
        for (std::size_t k = 0; k < width; ++k) {
          sd[k] = std::sqrt(std::max(0.0, m2[k] / static_cast<double>(trials.size() - 1)));
        }
      }
      agg.mean[m][ti] = std::move(mu);
      agg.std[m][ti] = std::move(sd);
    }
  }
  return agg;
}

AggregateTrajectory run_ensemble(const EnsembleConfig& config, const Graph& g, const TrialRecorder& recorder) {
  if (config.trials < 1) throw SetupError("an ensemble needs at least one trial");
  std::vector<Trajectory> results(config.trials);
  auto run_one = [&](std::size_t trial) {
    auto protocol = config.make_protocol(trial);
    results[trial] = run_trial(*protocol, g, config.horizon, recorder, trial_seed(config.base_seed, trial));
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, config.trials));
  if (workers == 1) {
    for (std::size_t trial = 0; trial < config.trials; ++trial) run_one(trial);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t trial = next++; trial < config.trials; trial = next++) {
          try {
            run_one(trial);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return aggregate(results);
}

}  // namespace rgossip
