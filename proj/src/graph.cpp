#include "robust_gossip/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "robust_gossip/errors.hpp"

namespace rgossip {

namespace {

Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Edge set used by the randomized generators while they mutate the graph.
class EdgeSet {
 public:
  explicit EdgeSet(std::size_t n) : adj_(n) {}

  bool contains(NodeId a, NodeId b) const { return adj_[a].count(b) != 0; }
  void add(NodeId a, NodeId b) {
    adj_[a].insert(b);
    adj_[b].insert(a);
  }
  void remove(NodeId a, NodeId b) {
    adj_[a].erase(b);
    adj_[b].erase(a);
  }
  std::size_t degree(NodeId a) const { return adj_[a].size(); }

 private:
  std::vector<std::set<NodeId>> adj_;
};

Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v});
  }
  return Graph(n, std::move(edges));
}

Graph grid_graph(std::size_t n, const topology::Grid2D& grid) {
  if (grid.rows == 0 || grid.cols == 0 || grid.rows * grid.cols != n) {
    throw ParameterError("grid: rows x cols must equal n");
  }
  std::vector<Edge> edges;
  auto id = [&](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * grid.cols + c); };
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (c + 1 < grid.cols) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < grid.rows) edges.push_back({id(r, c), id(r + 1, c)});
    }
  }
  return Graph(n, std::move(edges));
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw ParameterError("cycle: n must be at least 3");
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) edges.push_back(canonical(u, static_cast<NodeId>((u + 1) % n)));
  return Graph(n, std::move(edges));
}

// Ring lattice followed by per-edge rewiring, in the order networkx uses.
Graph watts_strogatz(std::size_t n, const topology::WattsStrogatz& ws) {
  const std::size_t k = ws.mean_degree;
  if (k % 2 != 0) throw ParameterError("watts-strogatz: mean degree must be even");
  if (k < 2 || k >= n) throw ParameterError("watts-strogatz: need 2 <= k < n");
  if (!(ws.rewire_prob >= 0.0 && ws.rewire_prob <= 1.0)) {
    throw ParameterError("watts-strogatz: rewire probability must lie in [0, 1]");
  }
  std::mt19937_64 rng(ws.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));

  EdgeSet set(n);
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (NodeId u = 0; u < n; ++u) set.add(u, static_cast<NodeId>((u + j) % n));
  }
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (NodeId u = 0; u < n; ++u) {
      const auto v = static_cast<NodeId>((u + j) % n);
      if (coin(rng) >= ws.rewire_prob) continue;
      if (set.degree(u) >= n - 1) continue;
      NodeId w = pick(rng);
      while (w == u || set.contains(u, w)) w = pick(rng);
      if (!set.contains(u, v)) continue;
      set.remove(u, v);
      set.add(u, w);
    }
  }
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (set.contains(u, v)) edges.push_back({u, v});
    }
  }
  return Graph(n, std::move(edges));
}

// Pairing (configuration) model with rejection of loops and multi-edges.
Graph k_regular(std::size_t n, const topology::KRegular& spec) {
  const std::size_t d = spec.degree;
  if (d < 3) throw ParameterError("k-regular: degree must be at least 3");
  if (d >= n) throw ParameterError("k-regular: degree must be below n");
  if ((d * n) % 2 != 0) throw ParameterError("k-regular: d * n must be even");

  constexpr int kMaxRetries = 1000;
  std::mt19937_64 rng(spec.seed);
  std::vector<NodeId> stubs;
  stubs.reserve(d * n);
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    stubs.clear();
    for (NodeId u = 0; u < n; ++u) stubs.insert(stubs.end(), d, u);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    EdgeSet set(n);
    std::vector<Edge> edges;
    edges.reserve(d * n / 2);
    bool ok = true;
    for (std::size_t i = 0; i < stubs.size(); i += 2) {
      const NodeId a = stubs[i];
      const NodeId b = stubs[i + 1];
      if (a == b || set.contains(a, b)) {
        ok = false;
        break;
      }
      set.add(a, b);
      edges.push_back(canonical(a, b));
    }
    if (ok) return Graph(n, std::move(edges));
  }
  throw GenerationError("k-regular: pairing model produced no simple graph in 1000 attempts");
}

Graph clustered(std::size_t n, const topology::Clustered& spec) {
  if (spec.cluster_sizes.size() < 2) throw ParameterError("clustered: need at least two clusters");
  const std::size_t total =
      std::accumulate(spec.cluster_sizes.begin(), spec.cluster_sizes.end(), std::size_t{0});
  if (total != n) throw ParameterError("clustered: cluster sizes must sum to n");

  std::vector<std::size_t> cluster_of(n);
  std::vector<Edge> edges;
  std::size_t cross_pairs = 0;
  NodeId start = 0;
  for (std::size_t c = 0; c < spec.cluster_sizes.size(); ++c) {
    const std::size_t size = spec.cluster_sizes[c];
    if (size == 0) throw ParameterError("clustered: empty cluster");
    for (NodeId u = start; u < start + size; ++u) {
      cluster_of[u] = c;
      for (NodeId v = u + 1; v < start + size; ++v) edges.push_back({u, v});
    }
    cross_pairs += size * (n - start - size);
    start += static_cast<NodeId>(size);
  }
  if (spec.bridges > cross_pairs) throw ParameterError("clustered: more bridges than cross-cluster pairs");

  // Uniform over ordered cross pairs, hence uniform over unordered ones.
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::set<std::pair<NodeId, NodeId>> chosen;
  while (chosen.size() < spec.bridges) {
    const NodeId a = pick(rng);
    const NodeId b = pick(rng);
    if (cluster_of[a] == cluster_of[b]) continue;
    const Edge e = canonical(a, b);
    if (chosen.emplace(e.u, e.v).second) edges.push_back(e);
  }
  return Graph(n, std::move(edges));
}

std::vector<int> component_labels(const Graph& g, int* count) {
  std::vector<int> label(g.node_count(), -1);
  int next = 0;
  std::queue<NodeId> queue;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    queue.push(s);
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop();
      for (NodeId v : g.neighbors(u)) {
        if (label[v] < 0) {
          label[v] = next;
          queue.push(v);
        }
      }
    }
    ++next;
  }
  if (count != nullptr) *count = next;
  return label;
}

// Shift-invert Lanczos on the pseudo-inverse of L restricted to the
// complement of the all-ones vector. L^+ b is applied by solving the
// grounded system (node 0 pinned to zero) and re-centering.
double lanczos_lambda2(const Graph& g, const SpectralOptions& options) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  for (NodeId u = 1; u < g.node_count(); ++u) {
    triplets.emplace_back(u - 1, u - 1, static_cast<double>(g.degree(u)));
  }
  for (const Edge& e : g.edges()) {
    if (e.u == 0) continue;
    triplets.emplace_back(e.u - 1, e.v - 1, -1.0);
    triplets.emplace_back(e.v - 1, e.u - 1, -1.0);
  }
  Eigen::SparseMatrix<double> grounded(n - 1, n - 1);
  grounded.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(grounded);
  if (solver.info() != Eigen::Success) throw NumericalError("grounded Laplacian factorization failed", 0);

  auto apply = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    y.tail(n - 1) = solver.solve(b.tail(n - 1));
    y.array() -= y.mean();
    return y;
  };
  auto deflate = [](Eigen::VectorXd& v) { v.array() -= v.mean(); };

  const auto max_steps = static_cast<Eigen::Index>(std::min<std::size_t>(options.max_iterations, g.node_count() - 1));
  Eigen::MatrixXd basis(n, max_steps + 1);
  std::vector<double> alpha;
  std::vector<double> beta;

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = normal(rng);
  deflate(q);
  q.normalize();
  basis.col(0) = q;

  double theta = 0.0;
  for (Eigen::Index j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = apply(basis.col(j));
    alpha.push_back(basis.col(j).dot(w));
    // Full reorthogonalization, twice.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeffs = basis.leftCols(j + 1).transpose() * w;
      w -= basis.leftCols(j + 1) * coeffs;
      deflate(w);
    }
    const double b = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1);
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    theta = tri.eigenvalues()(m - 1);
    const double residual = std::abs(b * tri.eigenvectors()(m - 1, m - 1));
    if (theta > 0.0 && (residual <= options.tolerance * theta * 1e-2 || b <= 1e-14 * theta)) {
      return 1.0 / theta;
    }
    beta.push_back(b);
    basis.col(j + 1) = w / b;
  }
  if (static_cast<std::size_t>(max_steps) == g.node_count() - 1 && theta > 0.0) return 1.0 / theta;
  throw NumericalError("Lanczos iteration for lambda2 did not converge", static_cast<std::size_t>(max_steps));
}

}  // namespace

std::string topology_name(const TopologySpec& spec) {
  struct Namer {
    std::string operator()(const topology::Complete&) const { return "complete"; }
    std::string operator()(const topology::Grid2D&) const { return "grid"; }
    std::string operator()(const topology::WattsStrogatz&) const { return "watts-strogatz"; }
    std::string operator()(const topology::Cycle&) const { return "cycle"; }
    std::string operator()(const topology::KRegular&) const { return "k-regular"; }
    std::string operator()(const topology::Clustered&) const { return "clustered"; }
    std::string operator()(const topology::EdgeListFile&) const { return "edge-list"; }
  };
  return std::visit(Namer{}, spec.kind);
}

topology::Grid2D grid_dims(std::size_t n) {
  if (n == 0) throw ParameterError("grid: n must be positive");
  auto rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (rows * rows > n) --rows;
  while (n % rows != 0) --rows;
  return {rows, n / rows};
}

Graph::Graph(std::size_t n, std::vector<Edge> edges, std::optional<std::vector<double>> weights)
    : n_(n), weights_(std::move(weights)), adjacency_(n) {
  if (n == 0) throw ParameterError("graph must have at least one node");
  edges_.reserve(edges.size());
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& raw : edges) {
    if (raw.u == raw.v) throw ParameterError("self-loop at node " + std::to_string(raw.u));
    if (raw.u >= n || raw.v >= n) throw ParameterError("edge endpoint out of range");
    const Edge e = canonical(raw.u, raw.v);
    if (!seen.emplace(e.u, e.v).second) {
      throw ParameterError("duplicate edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
    }
    edges_.push_back(e);
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  if (weights_) {
    if (weights_->size() != edges_.size()) throw ParameterError("one weight per edge required");
    double total = 0.0;
    for (double p : *weights_) {
      if (!(p > 0.0)) throw ParameterError("edge sampling probabilities must be positive");
      total += p;
    }
    if (total > 1.0 + 1e-12) throw ParameterError("edge sampling probabilities sum above 1");
  }
}

std::span<const double> Graph::weights() const {
  if (!weights_) return {};
  return *weights_;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  const auto& list = adjacency_[a];
  return std::binary_search(list.begin(), list.end(), b);
}

Graph Graph::with_weights(std::vector<double> weights) const {
  return Graph(n_, edges_, std::move(weights));
}

Graph build_graph(const TopologySpec& spec) {
  const std::size_t n = spec.n;
  if (n == 0 && !std::holds_alternative<topology::EdgeListFile>(spec.kind)) {
    throw ParameterError("node count must be positive");
  }
  struct Builder {
    std::size_t n;
    Graph operator()(const topology::Complete&) const { return complete_graph(n); }
    Graph operator()(const topology::Grid2D& g) const { return grid_graph(n, g); }
    Graph operator()(const topology::WattsStrogatz& ws) const { return watts_strogatz(n, ws); }
    Graph operator()(const topology::Cycle&) const { return cycle_graph(n); }
    Graph operator()(const topology::KRegular& k) const { return k_regular(n, k); }
    Graph operator()(const topology::Clustered& c) const { return clustered(n, c); }
    Graph operator()(const topology::EdgeListFile& f) const { return read_edge_list(f.path, n); }
  };
  return std::visit(Builder{n}, spec.kind);
}

Eigen::MatrixXd laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    lap(e.u, e.u) += 1.0;
    lap(e.v, e.v) += 1.0;
    lap(e.u, e.v) -= 1.0;
    lap(e.v, e.u) -= 1.0;
  }
  return lap;
}

Eigen::MatrixXd sampling_laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  const auto edges = g.edges();
  const auto weights = g.weights();
  const double uniform = 1.0 / static_cast<double>(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double p = g.has_weights() ? weights[i] : uniform;
    const Edge& e = edges[i];
    lap(e.u, e.u) += p;
    lap(e.v, e.v) += p;
    lap(e.u, e.v) -= p;
    lap(e.v, e.u) -= p;
  }
  return lap;
}

double second_smallest_eigenvalue(const Eigen::MatrixXd& lap) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("dense symmetric eigensolver failed", static_cast<std::size_t>(lap.rows()));
  }
  return std::max(0.0, solver.eigenvalues()(1));
}

SpectralInfo spectral_info(const Graph& g, const SpectralOptions& options) {
  if (g.node_count() < 2 || g.edge_count() == 0) {
    throw ParameterError("spectral info needs at least two nodes and one edge");
  }
  SpectralInfo info;
  info.node_count = g.node_count();
  info.edge_count = g.edge_count();
  info.connected = is_connected(g);
  info.bipartite = is_bipartite(g);

  const double edges = static_cast<double>(g.edge_count());
  if (g.node_count() <= options.dense_limit) {
    info.lambda2 = second_smallest_eigenvalue(laplacian(g));
    info.effective_c = g.has_weights() ? second_smallest_eigenvalue(sampling_laplacian(g))
                                       : info.lambda2 / edges;
  } else {
    info.lambda2 = info.connected ? lanczos_lambda2(g, options) : 0.0;
    if (g.has_weights()) {
      throw ParameterError("weighted spectral gap is only computed for graphs up to the dense limit");
    }
    info.effective_c = info.lambda2 / edges;
  }
  if (!info.connected) info.lambda2 = std::min(info.lambda2, 0.0);
  info.c = info.lambda2 / edges;
  info.c2 = info.c / 2.0;
  info.lambda2_swap = 1.0 - info.c;
  info.lambda2_avg = 1.0 - info.c2;
  return info;
}

bool is_connected(const Graph& g) {
  int count = 0;
  component_labels(g, &count);
  return count == 1;
}

bool is_bipartite(const Graph& g) {
  std::vector<int> color(g.node_count(), -1);
  std::queue<NodeId> queue;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    queue.push(s);
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop();
      for (NodeId v : g.neighbors(u)) {
        if (color[v] < 0) {
          color[v] = 1 - color[u];
          queue.push(v);
        } else if (color[v] == color[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

Validation validate(const Graph& g) {
  Validation v;
  v.connected = is_connected(g);
  v.bipartite = is_bipartite(g);
  if (!v.connected) v.warnings.push_back("graph is disconnected; gossip estimates cannot reach consensus");
  if (v.bipartite) v.warnings.push_back("graph is bipartite; convergence guarantees assume a non-bipartite graph");
  return v;
}

std::vector<NodeId> largest_component(const Graph& g) {
  int count = 0;
  const auto label = component_labels(g, &count);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (int l : label) ++sizes[static_cast<std::size_t>(l)];
  const auto best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> nodes;
  for (NodeId k = 0; k < g.node_count(); ++k) {
    if (label[k] == best) nodes.push_back(k);
  }
  return nodes;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<std::int64_t> relabel(g.node_count(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) relabel[nodes[i]] = static_cast<std::int64_t>(i);
  std::vector<Edge> edges;
  std::vector<double> weights;
  const auto all = g.edges();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto a = relabel[all[i].u];
    const auto b = relabel[all[i].v];
    if (a < 0 || b < 0) continue;
    edges.push_back(canonical(static_cast<NodeId>(a), static_cast<NodeId>(b)));
    if (g.has_weights()) weights.push_back(g.weights()[i]);
  }
  if (g.has_weights()) return Graph(nodes.size(), std::move(edges), std::move(weights));
  return Graph(nodes.size(), std::move(edges));
}

Graph read_edge_list(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open edge list");
  std::vector<Edge> edges;
  std::vector<double> weights;
  std::size_t weighted_rows = 0;
  std::size_t max_id = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    long long u = 0;
    long long v = 0;
    if (!(row >> u)) continue;
    if (!(row >> v)) throw ParseError(path.string(), line_no, "expected `u v [p_e]`");
    if (u < 0 || v < 0) throw ParseError(path.string(), line_no, "node ids must be non-negative");
    double p = 0.0;
    if (row >> p) {
      ++weighted_rows;
      weights.push_back(p);
    } else if (!row.eof()) {
      throw ParseError(path.string(), line_no, "malformed weight");
    }
    std::string extra;
    if (row.clear(), row >> extra) throw ParseError(path.string(), line_no, "trailing tokens");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    max_id = std::max<std::size_t>(max_id, static_cast<std::size_t>(std::max(u, v)));
  }
  if (weighted_rows != 0 && weighted_rows != edges.size()) {
    throw ParseError(path.string(), line_no, "either every edge or no edge carries a weight");
  }
  if (n == 0) n = edges.empty() ? 1 : max_id + 1;
  if (!edges.empty() && max_id >= n) throw ParseError(path.string(), line_no, "node id exceeds node count");
  if (weighted_rows != 0) return Graph(n, std::move(edges), std::move(weights));
  return Graph(n, std::move(edges));
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "# n=" << g.node_count() << " edges=" << g.edge_count() << '\n';
  const auto edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out << edges[i].u << ' ' << edges[i].v;
    if (g.has_weights()) out << ' ' << g.weights()[i];
    out << '\n';
  }
}

}  // namespace rgossip
