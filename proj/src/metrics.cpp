#include "robust_gossip/metrics.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "robust_gossip/dataset.hpp"
#include "robust_gossip/errors.hpp"

namespace rgossip {

namespace {

constexpr std::size_t kOracleLimit = 200;

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diagonalize(const Graph& g) {
  if (g.node_count() > kOracleLimit) throw ParameterError("dense oracles are limited to n <= 200");
  if (g.has_weights()) throw ParameterError("dense oracles assume uniform edge sampling");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian(g));
  if (eig.info() != Eigen::Success) throw NumericalError("Laplacian diagonalization failed", 0);
  return eig;
}

// (1/t) sum_{s<t} (1 - gap)^s, stable for gap near 0.
double cesaro(double gap, std::uint64_t t) {
  const double tt = static_cast<double>(t);
  if (std::abs(gap) < 1e-300) return 1.0;
  if (gap < 1.0) return -std::expm1(tt * std::log1p(-gap)) / (gap * tt);
  return (1.0 - std::pow(1.0 - gap, tt)) / (gap * tt);
}

double power(double gap, std::uint64_t t) {
  const double tt = static_cast<double>(t);
  if (gap < 1.0) return std::exp(tt * std::log1p(-gap));
  return std::pow(1.0 - gap, tt);
}

}  // namespace

RankError rank_error(std::span<const double> estimates, std::span<const double> true_ranks) {
  if (estimates.size() != true_ranks.size()) throw ParameterError("rank_error: length mismatch");
  RankError out;
  const double n = static_cast<double>(estimates.size());
  out.per_node.resize(estimates.size());
  double total = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    out.per_node[k] = std::abs(estimates[k] - true_ranks[k]) / n;
    total += out.per_node[k];
  }
  out.mean = estimates.empty() ? 0.0 : total / n;
  return out;
}

double trim_error(std::span<const double> estimates, double trimmed_mean) {
  if (estimates.empty()) throw ParameterError("trim_error: empty estimate vector");
  double total = 0.0;
  for (double z : estimates) total += std::abs(z - trimmed_mean);
  return total / static_cast<double>(estimates.size());
}

std::vector<double> comparison_profile(std::span<const double> values, std::size_t k) {
  std::vector<double> h(values.size());
  for (std::size_t l = 0; l < values.size(); ++l) h[l] = values[k] > values[l] ? 1.0 : 0.0;
  return h;
}

Eigen::MatrixXd event_matrix(std::size_t n, Edge e, double alpha) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  d(e.u) = 1.0;
  d(e.v) = -1.0;
  return Eigen::MatrixXd::Identity(d.size(), d.size()) - d * d.transpose() / alpha;
}

Eigen::MatrixXd expected_gossip_matrix(const Graph& g, double alpha) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  return Eigen::MatrixXd::Identity(n, n) - sampling_laplacian(g) / alpha;
}

ExpectedRankOracle::ExpectedRankOracle(const Graph& g, std::span<const double> values) : n_(g.node_count()) {
  if (values.size() != n_) throw ParameterError("oracle: data and graph sizes differ");
  const auto eig = diagonalize(g);
  const auto& v = eig.eigenvectors();
  gaps_ = eig.eigenvalues() / static_cast<double>(g.edge_count());
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto row = comparison_profile(values, static_cast<std::size_t>(k));
    h.row(k) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), n);
  }
  const Eigen::MatrixXd hv = h * v;  // (k, i) -> h_k . v_i
  weights_ = hv.cwiseProduct(v);     // times v_i(k)
}

std::vector<double> ExpectedRankOracle::at(std::uint64_t t) const {
  if (t < 1) throw ParameterError("oracle: t must be at least 1");
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::VectorXd factor(n);
  for (Eigen::Index i = 0; i < n; ++i) factor(i) = cesaro(gaps_(i), t);
  const Eigen::VectorXd rp = weights_ * factor;
  std::vector<double> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = static_cast<double>(n_) * rp(static_cast<Eigen::Index>(k)) + 1.0;
  return out;
}

std::vector<double> expected_rank_oracle(const Graph& g, std::span<const double> values, std::uint64_t t) {
  return ExpectedRankOracle(g, values).at(t);
}

ExpectedAverageOracle::ExpectedAverageOracle(const Graph& g, std::span<const double> initial) {
  if (initial.size() != g.node_count()) throw ParameterError("oracle: data and graph sizes differ");
  const auto eig = diagonalize(g);
  vectors_ = eig.eigenvectors();
  gaps_ = eig.eigenvalues() / (2.0 * static_cast<double>(g.edge_count()));
  const Eigen::Map<const Eigen::VectorXd> x0(initial.data(), static_cast<Eigen::Index>(initial.size()));
  coeffs_ = vectors_.transpose() * x0;
}

std::vector<double> ExpectedAverageOracle::at(std::uint64_t t) const {
  Eigen::VectorXd scaled = coeffs_;
  for (Eigen::Index i = 0; i < scaled.size(); ++i) scaled(i) *= power(gaps_(i), t);
  const Eigen::VectorXd x = vectors_ * scaled;
  return {x.data(), x.data() + x.size()};
}

std::vector<double> expected_average_oracle(const Graph& g, std::span<const double> initial, std::uint64_t t) {
  return ExpectedAverageOracle(g, initial).at(t);
}

double deviation_norm(std::span<const double> x) {
  const double mu = mean(x);
  double sq = 0.0;
  for (double v : x) sq += (v - mu) * (v - mu);
  return std::sqrt(sq);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ParameterError("spearman: need two equal-length samples");
  const auto ra = true_ranks(a);
  const auto rb = true_ranks(b);
  const double ma = mean(ra);
  const double mb = mean(rb);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace rgossip
