#include "robust_gossip/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "robust_gossip/errors.hpp"

namespace rgossip {

namespace {

double ct_margin(double c, std::uint64_t t) {
  const double tt = static_cast<double>(t);
  return c * tt - 2.0 * std::log(tt);
}

const TrimSpec& require_trim(const BoundParams& params) {
  if (!params.trim) throw ParameterError("bound needs a trimming level");
  return *params.trim;
}

void require_t(std::uint64_t t) {
  if (t < 1) throw ParameterError("bounds are stated for t >= 1");
}

}  // namespace

double phi(double u) {
  if (!(u > 0.0 && u < 1.0)) return 0.0;
  return std::sqrt(u * (1.0 - u));
}

BoundParams make_bound_params(double c, std::span<const double> values, std::optional<TrimSpec> trim) {
  if (!(c > 0.0)) throw ParameterError("connectivity constant must be positive");
  if (has_ties(values)) throw ParameterError("bounds assume distinct observations");
  BoundParams p;
  p.c = c;
  p.n = values.size();
  p.ranks = true_ranks(values);
  const double n = static_cast<double>(p.n);
  const double scale = n * std::sqrt(n);
  p.sigma.resize(p.n);
  for (std::size_t k = 0; k < p.n; ++k) p.sigma[k] = scale * phi((p.ranks[k] - 1.0) / n);
  if (trim) {
    if (trim->n() != p.n) throw ParameterError("trim spec built for a different sample size");
    p.trim = trim;
    p.gamma.resize(p.n);
    for (std::size_t k = 0; k < p.n; ++k) {
      p.gamma[k] = std::min(std::abs(p.ranks[k] - trim->lower()), std::abs(p.ranks[k] - trim->upper()));
    }
    p.c_m = std::sqrt(3.0) * scale * phi((static_cast<double>(trim->m()) - 1.0) / n);
  }
  return p;
}

std::vector<double> rank_bias_bound(const BoundParams& params, std::uint64_t t) {
  require_t(t);
  std::vector<double> out(params.n);
  const double ct = params.c * static_cast<double>(t);
  for (std::size_t k = 0; k < params.n; ++k) out[k] = params.sigma[k] / ct;
  return out;
}

GapBounds rank_gap_bounds(const BoundParams& params, std::uint64_t t) {
  require_t(t);
  GapBounds out;
  const double ct = params.c * static_cast<double>(t);
  for (double s : params.sigma) {
    out.second_moment.push_back(3.0 * s * s / ct);
    out.abs_deviation.push_back(std::sqrt(3.0 / ct) * s);
  }
  return out;
}

std::vector<double> weight_bias_bound(const BoundParams& params, std::uint64_t t) {
  require_t(t);
  const TrimSpec& trim = require_trim(params);
  const double ct = params.c * static_cast<double>(t);
  const double shrink = 1.0 - 2.0 * trim.alpha();
  std::vector<double> out(params.n);
  for (std::size_t k = 0; k < params.n; ++k) {
    const double s = params.sigma[k];
    const double g = params.gamma[k];
    out[k] = 3.0 / ct * s * s / (g * g * shrink);
  }
  return out;
}

std::uint64_t trim_bound_threshold(double c) {
  if (!(c > 0.0)) throw ParameterError("connectivity constant must be positive");
  if (ct_margin(c, 2) > 0.0) return 2;
  // ct - 2 log t is convex with its minimum at 2/c, so beyond that point the
  // first positive integer is found by bisection.
  auto lo = static_cast<std::uint64_t>(std::max(2.0, std::floor(2.0 / c)));
  std::uint64_t hi = lo * 2;
  while (ct_margin(c, hi) <= 0.0) hi *= 2;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (ct_margin(c, mid) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

double masked_data_norm(const BoundParams& params, std::span<const double> values) {
  require_trim(params);
  double sq = 0.0;
  for (std::size_t k = 0; k < params.n; ++k) {
    const double s = params.sigma[k];
    const double g = params.gamma[k];
    const double masked = s * s / (g * g) * values[k];
    sq += masked * masked;
  }
  return std::sqrt(sq);
}

std::optional<double> trim_error_bound(const BoundParams& params, std::span<const double> values, std::uint64_t t) {
  const TrimSpec& trim = require_trim(params);
  if (values.size() != params.n) throw ParameterError("trim_error_bound: data size mismatch");
  if (t <= trim_bound_threshold(params.c)) return std::nullopt;
  const double margin = ct_margin(params.c, t);
  if (margin <= 0.0) return std::nullopt;
  const double ct = params.c * static_cast<double>(t);
  const double rate = 5.0 / ct + 4.0 / margin;
  return rate * 3.0 / (params.c * (1.0 - 2.0 * trim.alpha())) * masked_data_norm(params, values);
}

double k_delta(const BoundParams& params, double delta) {
  require_trim(params);
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("confidence delta must lie in (0, 1)");
  const double n = static_cast<double>(params.n);
  return params.c_m / ((1.0 - 1.0 / n) * std::sqrt(params.c) * delta);
}

double propagation_time(const BoundParams& params, std::span<const double> values, double tau, double delta) {
  if (!(tau > 0.0)) throw ParameterError("threshold tau must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("confidence delta must lie in (0, 1)");
  double largest = 0.0;
  for (double x : values) largest = std::max(largest, std::abs(x));
  if (largest == 0.0) throw ParameterError("propagation time undefined for all-zero data");
  const double eps = tau / largest;
  return 4.0 / params.c * std::log(static_cast<double>(params.n) / (eps * delta));
}

std::optional<BreakdownBounds> breakdown_bounds(const BoundParams& params, std::span<const double> values,
                                                     double tau, double delta, std::uint64_t t) {
  const TrimSpec& trim = require_trim(params);
  BreakdownBounds out;
  out.propagation_time = propagation_time(params, values, tau, delta);
  const double tt = static_cast<double>(t);
  if (tt <= out.propagation_time) return std::nullopt;
  const double n = static_cast<double>(params.n);
  const double m = static_cast<double>(trim.m());
  const double p = std::floor(m + 0.5 - k_delta(params, delta) / std::sqrt(tt - out.propagation_time));
  out.lower = std::max(p, 0.0) / n;
  out.upper = m / n;
  return out;
}

double averaging_rate_bound(double c, std::uint64_t t) { return std::exp(-c / 2.0 * static_cast<double>(t)); }

double averaging_tail_bound(double c, std::uint64_t t, double eps) {
  if (!(eps > 0.0)) throw ParameterError("tolerance must be positive");
  return averaging_rate_bound(c, t) / (eps * eps);
}

double max_edge_gap(const Graph& g, std::span<const double> x) {
  double gap = 0.0;
  for (const Edge& e : g.edges()) gap = std::max(gap, std::abs(x[e.u] - x[e.v]));
  return gap;
}

double clipped_contraction_factor(const Graph& g, double lambda2, std::span<const double> initial, double tau) {
  if (!(tau > 0.0)) throw ParameterError("clipping radius must be positive");
  const double m0 = max_edge_gap(g, initial);
  const double a = m0 > 0.0 ? std::min(1.0, tau / m0) / 2.0 : 0.5;
  const double beta = 2.0 * a * (1.0 - a);
  return 1.0 - beta * lambda2 / static_cast<double>(g.edge_count());
}

}  // namespace rgossip
