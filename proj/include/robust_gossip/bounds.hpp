#ifndef ROBUST_GOSSIP_BOUNDS_HPP
#define ROBUST_GOSSIP_BOUNDS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "robust_gossip/dataset.hpp"
#include "robust_gossip/graph.hpp"

namespace rgossip {

// Score generating function sqrt(u (1 - u)); zero outside [0, 1].
double phi(double u);

/// Constants shared by the rank and trimmed-mean convergence bounds.
///
/// sigma_k = n^{3/2} phi((r_k - 1)/n) depends only on the true rank. With a
/// trimming level, gamma_k = min(|r_k - a|, |r_k - b|) is the distance to the
/// closer end of the inclusion interval [a, b], and
/// c_m = sqrt(3) n^{3/2} phi((m - 1)/n).
struct BoundParams {
  double c = 0.0;
  std::size_t n = 0;
  std::vector<double> ranks;
  std::vector<double> sigma;
  std::optional<TrimSpec> trim;
  std::vector<double> gamma;
  double c_m = 0.0;
};

// Throws ParameterError on tied values or a non-positive c.
BoundParams make_bound_params(double c, std::span<const double> values,
                              std::optional<TrimSpec> trim = std::nullopt);

// sigma_k / (c t), bounding |E[R_k(t)] - r_k|.
std::vector<double> rank_bias_bound(const BoundParams& params, std::uint64_t t);

struct GapBounds {
  std::vector<double> second_moment;  // 3 sigma_k^2 / (c t)
  std::vector<double> abs_deviation;  // sqrt(3 / (c t)) sigma_k
};

GapBounds rank_gap_bounds(const BoundParams& params, std::uint64_t t);

// (3 / (c t)) sigma_k^2 / (gamma_k^2 (1 - 2 alpha)), bounding |E[W_k(t)] - w(r_k)|.
std::vector<double> weight_bias_bound(const BoundParams& params, std::uint64_t t);

// Smallest integer t > 1 with c t > 2 log t.
std::uint64_t trim_bound_threshold(double c);

// (5/(ct) + 4/(ct - 2 log t)) * 3/(c (1 - 2 alpha)) * ||K . X||, K_k = sigma_k^2/gamma_k^2,
// bounding ||E[Z(t)] - xbar 1||. nullopt when t <= T* or ct <= 2 log t.
std::optional<double> trim_error_bound(const BoundParams& params, std::span<const double> values, std::uint64_t t);

// ||K . X|| from the bound above.
double masked_data_norm(const BoundParams& params, std::span<const double> values);

// K(delta) = c_m / ((1 - 1/n) sqrt(c) delta)
double k_delta(const BoundParams& params, double delta);

// (4/c) log(n / (eps delta)) with eps = tau / max_k |X_k|.
double propagation_time(const BoundParams& params, std::span<const double> values, double tau, double delta);

struct BreakdownBounds {
  double lower = 0.0;
  double upper = 0.0;
  double propagation_time = 0.0;
};

// ((1/n) max(floor(m + 1/2 - K(delta)/sqrt(t - T)), 0), m/n) for t > T.
std::optional<BreakdownBounds> breakdown_bounds(const BoundParams& params, std::span<const double> values,
                                                     double tau, double delta, std::uint64_t t);

// e^{-c t / 2}: ||E[Z(t)] - mean 1|| <= this * ||X - mean 1|| for gossip averaging.
double averaging_rate_bound(double c, std::uint64_t t);

// e^{-c t / 2} / eps^2 bounding P(||Z(t) - mean 1|| >= eps ||X - mean 1||).
double averaging_tail_bound(double c, std::uint64_t t, double eps);

// Largest |x_u - x_v| over edges.
double max_edge_gap(const Graph& g, std::span<const double> x);

// 1 - beta lambda2 / |E| with beta = 2 a (1 - a), a = min(1, tau / m0) / 2 and
// m0 the largest initial edge gap: per-round contraction of E||x - xbar 1||^2
// under clipped gossip.
double clipped_contraction_factor(const Graph& g, double lambda2, std::span<const double> initial, double tau);

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_BOUNDS_HPP
