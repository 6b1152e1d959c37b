#ifndef ROBUST_GOSSIP_PROTOCOLS_HPP
#define ROBUST_GOSSIP_PROTOCOLS_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robust_gossip/dataset.hpp"
#include "robust_gossip/engine.hpp"

namespace rgossip {

// A protocol whose per-node output is a rank estimate.
class Ranker : public Protocol {
 public:
  std::span<const double> ranks() const { return estimates(); }
};

/// Synchronous GoRank.
///
/// Every node keeps a running average of comparisons between its own
/// observation and an auxiliary observation that random-walks through the
/// network by swaps along sampled edges. In round s node k sets
///   Rp_k <- (1 - 1/s) Rp_k + (1/s) [X_k > Y_k],   R_k <- n Rp_k + 1,
/// and afterwards the sampled edge swaps its endpoints' auxiliary values.
class GoRankSync : public Ranker {
 public:
  explicit GoRankSync(std::span<const double> values);

  std::string name() const override { return "gorank"; }
  std::size_t node_count() const override { return x_.size(); }
  bool has_local_phase() const override { return true; }
  void local_update(NodeId k, std::uint64_t round) override;
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return r_; }

  std::span<const double> auxiliary() const { return y_; }
  std::span<const double> comparison_average() const { return rp_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> rp_;
  std::vector<double> r_;
};

// GoRank with a per-node activation counter in place of the global round;
// only the two sampled endpoints update, each against its pre-swap Y.
class GoRankAsync : public Ranker {
 public:
  explicit GoRankAsync(std::span<const double> values);

  std::string name() const override { return "gorank-async"; }
  std::size_t node_count() const override { return x_.size(); }
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return r_; }

  std::span<const double> auxiliary() const { return y_; }
  std::span<const std::uint64_t> counters() const { return count_; }

 private:
  void update(NodeId p);

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> rp_;
  std::vector<double> r_;
  std::vector<std::uint64_t> count_;
};

/// Ranking by traveling tokens (Chiuso et al.).
///
/// Each node starts with local rank k (1-based) and a token (id, rank,
/// observation) that wanders by swaps. On each sampled edge: swap local
/// ranks if they are discordant with the local observations; swap the token
/// ranks if they are discordant with the token observations; swap the
/// tokens; a node whose own token has come home adopts the token's rank.
class ChiusoBaseline : public Ranker {
 public:
  explicit ChiusoBaseline(std::span<const double> values);

  std::string name() const override { return "baseline"; }
  std::size_t node_count() const override { return x_.size(); }
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return r_; }

  std::span<const double> token_ranks() const { return token_rank_; }
  std::span<const double> token_values() const { return token_value_; }
  std::span<const NodeId> token_ids() const { return token_id_; }

 private:
  std::vector<double> x_;
  std::vector<double> r_;
  std::vector<double> token_rank_;
  std::vector<double> token_value_;
  std::vector<NodeId> token_id_;
};

// Baseline++: auxiliary (rank, observation) pairs are sorted by discordance
// swaps while they travel; a node adopts the auxiliary rank whenever it is
// ordered inconsistently with its own pair, or when it holds its own value.
class BaselinePlusPlus : public Ranker {
 public:
  explicit BaselinePlusPlus(std::span<const double> values);

  std::string name() const override { return "baselinepp"; }
  std::size_t node_count() const override { return x_.size(); }
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return r_; }

  std::span<const double> auxiliary_ranks() const { return aux_rank_; }
  std::span<const double> auxiliary_values() const { return aux_value_; }

 private:
  std::vector<double> x_;
  std::vector<double> r_;
  std::vector<double> aux_rank_;
  std::vector<double> aux_value_;
};

// Fixed rank estimates, e.g. the exact ranks, for driving GoTrim in isolation.
class OracleRanker : public Ranker {
 public:
  explicit OracleRanker(std::vector<double> ranks) : r_(std::move(ranks)) {}

  std::string name() const override { return "oracle"; }
  std::size_t node_count() const override { return r_.size(); }
  void edge_update(NodeId, NodeId, std::uint64_t) override {}
  std::span<const double> estimates() const override { return r_; }

 private:
  std::vector<double> r_;
};

/// GoTrim: gossip averaging of weight-corrected observations.
///
/// Each round, after the embedded ranker's local phase, node k recomputes
/// its weight W' = w(R_k) and injects (W' - W_k) X_k into its running
/// estimate Z_k. The sampled edge then averages Z over its endpoints and
/// hands the ranker its own edge update. sum_k Z_k = sum_k W_k X_k holds
/// after every round.
class GoTrim : public Protocol {
 public:
  GoTrim(std::span<const double> values, TrimSpec trim, std::unique_ptr<Ranker> ranker);

  std::string name() const override { return "gotrim+" + ranker_->name(); }
  std::size_t node_count() const override { return x_.size(); }
  bool has_local_phase() const override { return true; }
  void local_update(NodeId k, std::uint64_t round) override;
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return z_; }

  std::span<const double> weights() const { return w_; }
  std::span<const double> observations() const { return x_; }
  const Ranker& ranker() const { return *ranker_; }
  const TrimSpec& trim() const { return trim_; }

 private:
  std::vector<double> x_;
  TrimSpec trim_;
  std::unique_ptr<Ranker> ranker_;
  std::vector<double> z_;
  std::vector<double> w_;
};

// Pairwise averaging: both endpoints take the mean of their values.
class GossipAverage : public Protocol {
 public:
  explicit GossipAverage(std::span<const double> values) : x_(values.begin(), values.end()) {}

  std::string name() const override { return "average"; }
  std::size_t node_count() const override { return x_.size(); }
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return x_; }

 protected:
  std::vector<double> x_;
};

// CLIP(z, tau) = min(1, tau / |z|) z.
double clip(double z, double tau);

// Pairwise averaging with each move clipped to radius tau; conserves the sum.
class ClippedGossip : public Protocol {
 public:
  ClippedGossip(std::span<const double> values, double tau);

  std::string name() const override { return "clipped"; }
  std::size_t node_count() const override { return x_.size(); }
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;
  std::span<const double> estimates() const override { return x_; }

  double tau() const { return tau_; }

 private:
  std::vector<double> x_;
  double tau_;
};

// Averaging of an indicator seeded at one node; every value tends to 1/n,
// so its reciprocal estimates the network size.
class SizeEstimation : public GossipAverage {
 public:
  SizeEstimation(std::size_t n, NodeId seed_node, std::uint64_t burn_in = 0);

  std::string name() const override { return "size"; }
  void edge_update(NodeId i, NodeId j, std::uint64_t round) override;

  // 1 / x_k once the burn-in has elapsed and x_k >= 1e-12, else nullopt.
  std::optional<double> size_estimate(NodeId k) const;

  std::uint64_t rounds_seen() const { return rounds_; }

 private:
  std::uint64_t burn_in_;
  std::uint64_t rounds_ = 0;
};

struct ProtocolOptions {
  std::string ranker = "gorank";
  std::optional<TrimSpec> trim;
  double tau = 1.0;
  NodeId seed_node = 0;
  std::uint64_t burn_in = 0;
};

// Names: gorank, gorank-async, baseline, baselinepp.
std::unique_ptr<Ranker> make_ranker(std::string_view name, std::span<const double> values);

// Names: the rankers above plus gotrim, average, clipped, size.
std::unique_ptr<Protocol> make_protocol(std::string_view name, std::span<const double> values,
                                        const ProtocolOptions& options = {});

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_PROTOCOLS_HPP
