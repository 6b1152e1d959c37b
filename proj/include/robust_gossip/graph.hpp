#ifndef ROBUST_GOSSIP_GRAPH_HPP
#define ROBUST_GOSSIP_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace rgossip {

using NodeId = std::uint32_t;

// Undirected edge stored canonically with u < v.
struct Edge {
  NodeId u;
  NodeId v;

  friend bool operator==(const Edge&, const Edge&) = default;
};

namespace topology {

struct Complete {};

struct Grid2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct WattsStrogatz {
  std::size_t mean_degree = 4;
  double rewire_prob = 0.2;
  std::uint64_t seed = 0;
};

struct Cycle {};

struct KRegular {
  std::size_t degree = 3;
  std::uint64_t seed = 0;
};

// Complete clusters joined by `bridges` random inter-cluster edges.
struct Clustered {
  std::vector<std::size_t> cluster_sizes;
  std::size_t bridges = 0;
  std::uint64_t seed = 0;
};

struct EdgeListFile {
  std::filesystem::path path;
};

}  // namespace topology

struct TopologySpec {
  std::variant<topology::Complete, topology::Grid2D, topology::WattsStrogatz, topology::Cycle,
               topology::KRegular, topology::Clustered, topology::EdgeListFile>
      kind;
  std::size_t n = 0;
};

std::string topology_name(const TopologySpec& spec);

// rows <= cols with rows * cols == n and cols - rows minimal.
topology::Grid2D grid_dims(std::size_t n);

/// Immutable simple undirected graph.
///
/// Edges are kept once each as (min, max) in insertion order; this list is
/// what the edge samplers index into. Optional per-edge sampling
/// probabilities model non-uniform activation and edge failure: each must be
/// positive and their total at most one, the remainder being the probability
/// that a round carries no communication.
class Graph {
 public:
  Graph(std::size_t n, std::vector<Edge> edges,
        std::optional<std::vector<double>> weights = std::nullopt);

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  bool has_weights() const { return weights_.has_value(); }
  std::span<const double> weights() const;
  std::size_t degree(NodeId k) const { return adjacency_[k].size(); }
  std::span<const NodeId> neighbors(NodeId k) const { return adjacency_[k]; }
  bool has_edge(NodeId a, NodeId b) const;

  // Same topology with every edge sampled with probability p_e.
  Graph with_weights(std::vector<double> weights) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::optional<std::vector<double>> weights_;
  std::vector<std::vector<NodeId>> adjacency_;
};

Graph build_graph(const TopologySpec& spec);

// Combinatorial Laplacian D - A.
Eigen::MatrixXd laplacian(const Graph& g);

// Expected per-round Laplacian sum_e p_e L_e; equals L / |E| without weights.
Eigen::MatrixXd sampling_laplacian(const Graph& g);

struct SpectralInfo {
  double lambda2 = 0.0;       // second-smallest eigenvalue of D - A
  double c = 0.0;             // lambda2 / |E|
  double c2 = 0.0;            // c / 2
  double lambda2_swap = 0.0;  // 1 - c, second eigenvalue of E[W1]
  double lambda2_avg = 0.0;   // 1 - c / 2, second eigenvalue of E[W2]
  // Spectral gap of the expected sampling Laplacian; equals c when edges
  // are sampled uniformly, smaller under edge failure.
  double effective_c = 0.0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  bool connected = false;
  bool bipartite = false;
};

struct SpectralOptions {
  // Above this size the shift-invert Lanczos route is used.
  std::size_t dense_limit = 2000;
  double tolerance = 1e-9;
  std::size_t max_iterations = 400;
};

SpectralInfo spectral_info(const Graph& g, const SpectralOptions& options = {});

// Second-smallest eigenvalue of a symmetric Laplacian-like matrix (rows sum to zero).
double second_smallest_eigenvalue(const Eigen::MatrixXd& lap);

struct Validation {
  bool connected = false;
  bool bipartite = false;
  std::vector<std::string> warnings;
};

Validation validate(const Graph& g);

bool is_connected(const Graph& g);
bool is_bipartite(const Graph& g);

// Node ids of the largest connected component, ascending.
std::vector<NodeId> largest_component(const Graph& g);

// Subgraph induced by `nodes`, relabeled 0..nodes.size()-1 in the given order.
Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

// `u v [p_e]` per line, 0-based ids, `#` comments. When n is zero the node
// count is one past the largest id seen.
Graph read_edge_list(const std::filesystem::path& path, std::size_t n = 0);
void write_edge_list(const Graph& g, const std::filesystem::path& path);

}  // namespace rgossip

#endif  // ROBUST_GOSSIP_GRAPH_HPP
