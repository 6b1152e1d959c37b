#ifndef ROBUST_GOSSIP_METRICS_HPP
#define ROBUST_GOSSIP_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "robust_gossip/graph.hpp"

namespace rgossip {

struct RankError {
  std::vector<double> per_node;  // |R_k - r_k| / n
  double mean = 0.0;
};

RankError rank_error(std::span<const double> estimates, std::span<const double> true_ranks);

// (1/n) sum_k |Z_k - xbar|
double trim_error(std::span<const double> estimates, double trimmed_mean);

// h_k = ([X_k > X_l])_l
std::vector<double> comparison_profile(std::span<const double> values, std::size_t k);

// Per-event matrices for edge (i, j): I - (e_i - e_j)(e_i - e_j)^T / alpha;
// alpha = 1 swaps, alpha = 2 averages.
Eigen::MatrixXd event_matrix(std::size_t n, Edge e, double alpha);

// Expectation of event_matrix under the graph's edge distribution,
// I - L / (alpha |E|) for uniform sampling.
Eigen::MatrixXd expected_gossip_matrix(const Graph& g, double alpha);

/// Expected synchronous GoRank estimates,
///   E[R_k(t)] = (n / t) sum_{s<t} h_k^T W1^s e_k + 1,  W1 = I - L/|E|.
///
/// The Laplacian is diagonalized once; each call evaluates the Cesaro sum in
/// closed form per eigenvalue, so large t costs the same as small t.
class ExpectedRankOracle {
 public:
  ExpectedRankOracle(const Graph& g, std::span<const double> values);

  std::vector<double> at(std::uint64_t t) const;

 private:
  std::size_t n_;
  Eigen::VectorXd gaps_;     // mu_i / |E|, one minus each eigenvalue of W1
  Eigen::MatrixXd weights_;  // weights_(k, i) = (h_k . v_i)(v_i . e_k)
};

std::vector<double> expected_rank_oracle(const Graph& g, std::span<const double> values, std::uint64_t t);

// E[x(t)] = W2^t x0 with W2 = I - L/(2|E|), via the same diagonalization.
class ExpectedAverageOracle {
 public:
  ExpectedAverageOracle(const Graph& g, std::span<const double> initial);

  std::vector<double> at(std::uint64_t t) const;

 private:
  Eigen::VectorXd gaps_;  // mu_i / (2|E|)
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd coeffs_;
};

std::vector<double> expected_average_oracle(const Graph& g, std::span<const double> initial, std::uint64_t t);

// Euclidean norm of x - mean(x) 1.
double deviation_norm(std::span<const double> x);

// Spearman rank correlation (mid-ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_METRICS_HPP
