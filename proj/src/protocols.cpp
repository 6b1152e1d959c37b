#include "robust_gossip/protocols.hpp"

#include <cmath>
#include <utility>

#include "robust_gossip/errors.hpp"

namespace rgossip {

namespace {

bool discordant(double xa, double xb, double ra, double rb) { return (xa - xb) * (ra - rb) < 0.0; }

std::vector<double> identity_ranks(std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = static_cast<double>(k + 1);
  return r;
}

}  // namespace

GoRankSync::GoRankSync(std::span<const double> values)
    : x_(values.begin(), values.end()), y_(x_), rp_(x_.size(), 0.0), r_(x_.size(), 1.0) {}

void GoRankSync::local_update(NodeId k, std::uint64_t round) {
  const double s = static_cast<double>(round);
  const double win = x_[k] > y_[k] ? 1.0 : 0.0;
  rp_[k] = (1.0 - 1.0 / s) * rp_[k] + win / s;
  r_[k] = static_cast<double>(x_.size()) * rp_[k] + 1.0;
}

void GoRankSync::edge_update(NodeId i, NodeId j, std::uint64_t) { std::swap(y_[i], y_[j]); }

GoRankAsync::GoRankAsync(std::span<const double> values)
    : x_(values.begin(), values.end()),
      y_(x_),
      rp_(x_.size(), 0.0),
      r_(x_.size(), 1.0),
      count_(x_.size(), 0) {}

void GoRankAsync::update(NodeId p) {
  const double c = static_cast<double>(++count_[p]);
  const double win = x_[p] > y_[p] ? 1.0 : 0.0;
  rp_[p] = (1.0 - 1.0 / c) * rp_[p] + win / c;
  r_[p] = static_cast<double>(x_.size()) * rp_[p] + 1.0;
}

void GoRankAsync::edge_update(NodeId i, NodeId j, std::uint64_t) {
  update(i);
  update(j);
  std::swap(y_[i], y_[j]);
}

ChiusoBaseline::ChiusoBaseline(std::span<const double> values)
    : x_(values.begin(), values.end()),
      r_(identity_ranks(x_.size())),
      token_rank_(r_),
      token_value_(x_),
      token_id_(x_.size()) {
  for (std::size_t k = 0; k < token_id_.size(); ++k) token_id_[k] = static_cast<NodeId>(k);
}

void ChiusoBaseline::edge_update(NodeId i, NodeId j, std::uint64_t) {
  if (discordant(x_[i], x_[j], r_[i], r_[j])) std::swap(r_[i], r_[j]);
  if (discordant(token_value_[i], token_value_[j], token_rank_[i], token_rank_[j])) {
    std::swap(token_rank_[i], token_rank_[j]);
  }
  std::swap(token_id_[i], token_id_[j]);
  std::swap(token_rank_[i], token_rank_[j]);
  std::swap(token_value_[i], token_value_[j]);
  for (const NodeId p : {i, j}) {
    if (token_id_[p] == p) r_[p] = token_rank_[p];
  }
}

BaselinePlusPlus::BaselinePlusPlus(std::span<const double> values)
    : x_(values.begin(), values.end()), r_(identity_ranks(x_.size())), aux_rank_(r_), aux_value_(x_) {}

void BaselinePlusPlus::edge_update(NodeId i, NodeId j, std::uint64_t) {
  if (discordant(aux_value_[i], aux_value_[j], aux_rank_[i], aux_rank_[j])) std::swap(aux_rank_[i], aux_rank_[j]);
  for (const NodeId p : {i, j}) {
    if (discordant(aux_value_[p], x_[p], aux_rank_[p], r_[p]) || aux_value_[p] == x_[p]) r_[p] = aux_rank_[p];
  }
  std::swap(aux_rank_[i], aux_rank_[j]);
  std::swap(aux_value_[i], aux_value_[j]);
}

GoTrim::GoTrim(std::span<const double> values, TrimSpec trim, std::unique_ptr<Ranker> ranker)
    : x_(values.begin(), values.end()),
      trim_(trim),
      ranker_(std::move(ranker)),
      z_(x_.size(), 0.0),
      w_(x_.size(), 0.0) {
  if (!ranker_) throw SetupError("gotrim needs a ranker");
  if (ranker_->node_count() != x_.size() || trim_.n() != x_.size()) {
    throw SetupError("gotrim: ranker, trim spec and data disagree on n");
  }
}

void GoTrim::local_update(NodeId k, std::uint64_t round) {
  if (ranker_->has_local_phase()) ranker_->local_update(k, round);
  const double next = weight(ranker_->ranks()[k], trim_);
  z_[k] += (next - w_[k]) * x_[k];
  w_[k] = next;
}

void GoTrim::edge_update(NodeId i, NodeId j, std::uint64_t round) {
  const double avg = (z_[i] + z_[j]) / 2.0;
  z_[i] = avg;
  z_[j] = avg;
  ranker_->edge_update(i, j, round);
}

void GossipAverage::edge_update(NodeId i, NodeId j, std::uint64_t) {
  const double avg = (x_[i] + x_[j]) / 2.0;
  x_[i] = avg;
  x_[j] = avg;
}

double clip(double z, double tau) {
  const double mag = std::abs(z);
  if (mag <= tau) return z;
  return tau / mag * z;
}

ClippedGossip::ClippedGossip(std::span<const double> values, double tau)
    : x_(values.begin(), values.end()), tau_(tau) {
  if (!(tau > 0.0)) throw ParameterError("clipping radius must be positive");
}

void ClippedGossip::edge_update(NodeId i, NodeId j, std::uint64_t) {
  const double xi = x_[i];
  const double xj = x_[j];
  const double step = 0.5 * clip(xj - xi, tau_);
  // CLIP is odd, so the two moves are exactly opposite.
  x_[i] = xi + step;
  x_[j] = xj - step;
}

SizeEstimation::SizeEstimation(std::size_t n, NodeId seed_node, std::uint64_t burn_in)
    : GossipAverage(std::vector<double>(n, 0.0)), burn_in_(burn_in) {
  if (seed_node >= n) throw ParameterError("size estimation seed node out of range");
  x_[seed_node] = 1.0;
}

void SizeEstimation::edge_update(NodeId i, NodeId j, std::uint64_t round) {
  GossipAverage::edge_update(i, j, round);
  rounds_ = round;
}

std::optional<double> SizeEstimation::size_estimate(NodeId k) const {
  if (rounds_ < burn_in_ || x_[k] < 1e-12) return std::nullopt;
  return 1.0 / x_[k];
}

std::unique_ptr<Ranker> make_ranker(std::string_view name, std::span<const double> values) {
  if (name == "gorank") return std::make_unique<GoRankSync>(values);
  if (name == "gorank-async") return std::make_unique<GoRankAsync>(values);
  if (name == "baseline") return std::make_unique<ChiusoBaseline>(values);
  if (name == "baselinepp") return std::make_unique<BaselinePlusPlus>(values);
  throw SetupError("'" + std::string(name) + "' does not produce rank estimates");
}

std::unique_ptr<Protocol> make_protocol(std::string_view name, std::span<const double> values,
                                        const ProtocolOptions& options) {
  if (name == "gorank" || name == "gorank-async" || name == "baseline" || name == "baselinepp") {
    return make_ranker(name, values);
  }
  if (name == "gotrim") {
    if (!options.trim) throw SetupError("gotrim requires a trimming level");
    return std::make_unique<GoTrim>(values, *options.trim, make_ranker(options.ranker, values));
  }
  if (name == "average") return std::make_unique<GossipAverage>(values);
  if (name == "clipped") return std::make_unique<ClippedGossip>(values, options.tau);
  if (name == "size") return std::make_unique<SizeEstimation>(values.size(), options.seed_node, options.burn_in);
  throw SetupError("unknown protocol '" + std::string(name) + "'");
}

}  // namespace rgossip
