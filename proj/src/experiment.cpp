#include "robust_gossip/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "robust_gossip/bounds.hpp"
#include "robust_gossip/errors.hpp"
#include "robust_gossip/metrics.hpp"
#include "robust_gossip/protocols.hpp"

namespace rgossip {

namespace {

using nlohmann::json;

const std::vector<std::string> kProtocols = {"gorank", "gorank-async", "baseline", "baselinepp",
                                             "gotrim", "average",      "clipped",  "size"};
const std::vector<std::string> kRankers = {"gorank", "gorank-async", "baseline", "baselinepp"};

bool contains(const std::vector<std::string>& names, const std::string& s) {
  return std::find(names.begin(), names.end(), s) != names.end();
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

void check_keys(const json& obj, const std::string& where, const std::vector<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!contains(allowed, item.key())) throw ConfigError("unknown field '" + item.key() + "' in " + where);
  }
}

std::size_t require_n(const json& obj, const std::string& kind) {
  if (!obj.contains("n")) throw ConfigError("topology '" + kind + "' needs n");
  const auto n = get_or<std::size_t>(obj, "n", 0);
  if (n == 0) throw ConfigError("topology n must be positive");
  return n;
}

void parse_topology(const json& obj, ExperimentConfig& cfg) {
  if (!obj.is_object() || !obj.contains("kind")) throw ConfigError("topology needs a kind");
  const auto kind = get_or<std::string>(obj, "kind", "");
  TopologySpec spec;
  if (kind == "complete" || kind == "cycle") {
    check_keys(obj, "topology", {"kind", "n"});
    spec.n = require_n(obj, kind);
    if (kind == "complete") {
      spec.kind = topology::Complete{};
    } else {
      spec.kind = topology::Cycle{};
    }
  } else if (kind == "grid") {
    check_keys(obj, "topology", {"kind", "n", "rows", "cols"});
    if (obj.contains("rows") || obj.contains("cols")) {
      topology::Grid2D g{get_or<std::size_t>(obj, "rows", 0), get_or<std::size_t>(obj, "cols", 0)};
      if (g.rows == 0 || g.cols == 0) throw ConfigError("grid needs positive rows and cols");
      spec.n = g.rows * g.cols;
      if (obj.contains("n") && get_or<std::size_t>(obj, "n", 0) != spec.n) {
        throw ConfigError("grid n disagrees with rows * cols");
      }
      spec.kind = g;
    } else {
      spec.n = require_n(obj, kind);
      spec.kind = grid_dims(spec.n);
    }
  } else if (kind == "watts-strogatz") {
    check_keys(obj, "topology", {"kind", "n", "k", "p", "seed"});
    spec.n = require_n(obj, kind);
    spec.kind = topology::WattsStrogatz{get_or<std::size_t>(obj, "k", 4), get_or<double>(obj, "p", 0.2),
                                        get_or<std::uint64_t>(obj, "seed", 0)};
  } else if (kind == "k-regular") {
    check_keys(obj, "topology", {"kind", "n", "degree", "seed"});
    spec.n = require_n(obj, kind);
    spec.kind = topology::KRegular{get_or<std::size_t>(obj, "degree", 3), get_or<std::uint64_t>(obj, "seed", 0)};
  } else if (kind == "clustered") {
    check_keys(obj, "topology", {"kind", "sizes", "bridges", "seed"});
    topology::Clustered c{get_or<std::vector<std::size_t>>(obj, "sizes", {}), get_or<std::size_t>(obj, "bridges", 1),
                          get_or<std::uint64_t>(obj, "seed", 0)};
    if (c.cluster_sizes.empty()) throw ConfigError("clustered topology needs sizes");
    for (std::size_t s : c.cluster_sizes) spec.n += s;
    spec.kind = c;
  } else if (kind == "edge-list") {
    check_keys(obj, "topology", {"kind", "path", "n"});
    topology::EdgeListFile f{get_or<std::string>(obj, "path", "")};
    if (f.path.empty()) throw ConfigError("edge-list topology needs a path");
    if (!std::filesystem::exists(f.path)) throw ConfigError("edge list not found: " + f.path.string());
    spec.n = get_or<std::size_t>(obj, "n", 0);
    spec.kind = f;
  } else if (kind == "proximity") {
    check_keys(obj, "topology", {"kind"});
    cfg.proximity_topology = true;
    return;
  } else {
    throw ConfigError("unknown topology kind '" + kind + "'");
  }
  cfg.topology = spec;
}

void parse_dataset(const json& obj, ExperimentConfig& cfg) {
  check_keys(obj, "dataset", {"kind", "n", "shuffle_seed", "path", "radius_km", "jitter", "jitter_seed"});
  const auto kind = get_or<std::string>(obj, "kind", "range");
  DatasetSource& d = cfg.dataset;
  if (kind == "range") {
    d.kind = DatasetSource::Kind::Range;
    d.n = get_or<std::size_t>(obj, "n", 0);
    if (obj.contains("shuffle_seed")) d.shuffle_seed = get_or<std::uint64_t>(obj, "shuffle_seed", 0);
  } else if (kind == "csv") {
    d.kind = DatasetSource::Kind::Csv;
    d.path = get_or<std::string>(obj, "path", "");
    if (d.path.empty()) throw ConfigError("csv dataset needs a path");
    if (!std::filesystem::exists(d.path)) throw ConfigError("dataset not found: " + d.path.string());
    d.csv.radius_km = get_or<double>(obj, "radius_km", 1.0);
    d.csv.jitter = get_or<bool>(obj, "jitter", false);
    d.csv.jitter_seed = get_or<std::uint64_t>(obj, "jitter_seed", 0);
  } else {
    throw ConfigError("unknown dataset kind '" + kind + "'");
  }
}

void parse_contamination(const json& obj, ExperimentConfig& cfg) {
  check_keys(obj, "contamination", {"epsilon", "mode", "magnitude", "seed"});
  ContaminationSpec spec;
  spec.epsilon = get_or<double>(obj, "epsilon", 0.1);
  const auto mode = get_or<std::string>(obj, "mode", "scale");
  if (mode == "scale") {
    spec.mode = ContaminationSpec::Mode::Scale;
  } else if (mode == "shift") {
    spec.mode = ContaminationSpec::Mode::Shift;
  } else {
    throw ConfigError("contamination mode must be scale or shift");
  }
  spec.magnitude = get_or<double>(obj, "magnitude", 10.0);
  spec.seed = get_or<std::uint64_t>(obj, "seed", 0);
  if (!(spec.epsilon > 0.0 && spec.epsilon < 0.5)) throw ConfigError("contamination epsilon must lie in (0, 1/2)");
  cfg.contamination = spec;
}

void parse_protocol(const json& obj, ExperimentConfig& cfg) {
  ProtocolChoice& p = cfg.protocol;
  if (obj.is_string()) {
    p.name = obj.get<std::string>();
  } else {
    check_keys(obj, "protocol", {"name", "ranker", "tau", "seed_node", "burn_in"});
    p.name = get_or<std::string>(obj, "name", "");
    p.ranker = get_or<std::string>(obj, "ranker", "gorank");
    p.tau = get_or<double>(obj, "tau", 1.0);
    p.seed_node = get_or<NodeId>(obj, "seed_node", 0);
    p.burn_in = get_or<std::uint64_t>(obj, "burn_in", 0);
  }
  if (!contains(kProtocols, p.name)) throw ConfigError("unknown protocol '" + p.name + "'");
  if (!contains(kRankers, p.ranker)) throw ConfigError("unknown ranker '" + p.ranker + "'");
  if (!(p.tau > 0.0)) throw ConfigError("tau must be positive");
}

void parse_record(const json& obj, ExperimentConfig& cfg) {
  check_keys(obj, "record", {"metrics", "points", "times", "per_node"});
  RecordPolicy& r = cfg.record;
  r.metrics = get_or<std::vector<std::string>>(obj, "metrics", {});
  r.points = get_or<std::size_t>(obj, "points", 200);
  r.times = get_or<std::vector<std::uint64_t>>(obj, "times", {});
  r.per_node = get_or<bool>(obj, "per_node", true);
}

void parse_breakdown(const json& obj, ExperimentConfig& cfg) {
  check_keys(obj, "breakdown", {"counts", "magnitudes", "tau", "delta"});
  BreakdownSweep& b = cfg.breakdown;
  b.counts = get_or<std::vector<std::size_t>>(obj, "counts", {});
  b.magnitudes = get_or<std::vector<double>>(obj, "magnitudes", b.magnitudes);
  b.tau = get_or<double>(obj, "tau", 1.0);
  b.delta = get_or<double>(obj, "delta", 0.1);
  if (b.magnitudes.empty()) throw ConfigError("breakdown needs at least one magnitude");
  if (!(b.tau > 0.0)) throw ConfigError("breakdown tau must be positive");
  if (!(b.delta > 0.0 && b.delta < 1.0)) throw ConfigError("breakdown delta must lie in (0, 1)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// --- metrics ---------------------------------------------------------------

struct MetricContext {
  std::vector<double> ranks;
  std::optional<TrimSpec> trim;
  double trimmed_mean = 0.0;
  double data_mean = 0.0;
};

std::span<const double> ranks_of(const Protocol& p) {
  if (const auto* r = dynamic_cast<const Ranker*>(&p)) return r->ranks();
  if (const auto* g = dynamic_cast<const GoTrim*>(&p)) return g->ranker().ranks();
  throw SetupError("metric rank_error needs a rank-producing protocol");
}

const GoTrim& as_gotrim(const Protocol& p, const std::string& metric) {
  if (const auto* g = dynamic_cast<const GoTrim*>(&p)) return *g;
  throw SetupError("metric " + metric + " needs the gotrim protocol");
}

double average_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// A per-node evaluator; the ALL row is its average over nodes unless an
// explicit aggregate is given.
struct MetricDef {
  std::function<std::vector<double>(const Protocol&)> per_node;
  std::function<double(const Protocol&)> aggregate;
  bool has_nodes = true;
};

MetricDef metric_def(const std::string& name, std::shared_ptr<const MetricContext> ctx) {
  MetricDef d;
  if (name == "rank_error") {
    d.per_node = [ctx](const Protocol& p) { return rank_error(ranks_of(p), ctx->ranks).per_node; };
  } else if (name == "estimate") {
    d.per_node = [](const Protocol& p) {
      const auto e = p.estimates();
      return std::vector<double>(e.begin(), e.end());
    };
  } else if (name == "trim_error") {
    if (!ctx->trim) throw ConfigError("metric trim_error needs alpha");
    d.per_node = [ctx](const Protocol& p) {
      std::vector<double> out;
      for (double z : p.estimates()) out.push_back(std::abs(z - ctx->trimmed_mean));
      return out;
    };
  } else if (name == "weight") {
    d.per_node = [](const Protocol& p) {
      const auto w = as_gotrim(p, "weight").weights();
      return std::vector<double>(w.begin(), w.end());
    };
  } else if (name == "weight_bias") {
    if (!ctx->trim) throw ConfigError("metric weight_bias needs alpha");
    d.per_node = [ctx](const Protocol& p) {
      const auto w = as_gotrim(p, "weight_bias").weights();
      std::vector<double> out(w.size());
      for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] - weight(ctx->ranks[k], *ctx->trim);
      return out;
    };
  } else if (name == "mean_error") {
    d.per_node = [ctx](const Protocol& p) {
      std::vector<double> out;
      for (double x : p.estimates()) out.push_back(std::abs(x - ctx->data_mean));
      return out;
    };
  } else if (name == "sq_deviation") {
    d.has_nodes = false;
    d.aggregate = [ctx](const Protocol& p) {
      double s = 0.0;
      for (double x : p.estimates()) s += (x - ctx->data_mean) * (x - ctx->data_mean);
      return s;
    };
  } else if (name == "size_estimate") {
    d.per_node = [](const Protocol& p) {
      const auto* s = dynamic_cast<const SizeEstimation*>(&p);
      if (s == nullptr) throw SetupError("metric size_estimate needs the size protocol");
      std::vector<double> out(p.node_count(), std::numeric_limits<double>::quiet_NaN());
      for (NodeId k = 0; k < out.size(); ++k) {
        if (const auto v = s->size_estimate(k)) out[k] = *v;
      }
      return out;
    };
  } else {
    throw ConfigError("unknown metric '" + name + "'");
  }
  return d;
}

std::vector<std::string> default_metrics(const ExperimentConfig& cfg) {
  const std::string& p = cfg.protocol.name;
  if (contains(kRankers, p)) return {"rank_error"};
  if (p == "gotrim") return {"trim_error", "rank_error"};
  if (p == "size") return {"size_estimate"};
  if (cfg.alpha) return {"trim_error", "mean_error"};
  return {"mean_error"};
}

std::vector<Metric> build_metrics(const std::vector<std::string>& names, bool per_node,
                                  std::shared_ptr<const MetricContext> ctx) {
  std::vector<Metric> out;
  for (const auto& name : names) {
    MetricDef d = metric_def(name, ctx);
    if (d.aggregate) {
      out.push_back({name, false, [f = d.aggregate](const Protocol& p) { return std::vector<double>{f(p)}; }});
    } else {
      out.push_back({name, false, [f = d.per_node](const Protocol& p) { return std::vector<double>{average_of(f(p))}; }});
    }
    if (per_node && d.has_nodes) out.push_back({name, true, d.per_node});
  }
  return out;
}

ProtocolOptions protocol_options(const ExperimentConfig& cfg, std::size_t n) {
  ProtocolOptions opt;
  opt.ranker = cfg.protocol.ranker;
  if (cfg.alpha) opt.trim = TrimSpec(*cfg.alpha, n);
  opt.tau = cfg.protocol.tau;
  opt.seed_node = cfg.protocol.seed_node;
  opt.burn_in = cfg.protocol.burn_in;
  return opt;
}

std::string protocol_label(const ExperimentConfig& cfg) {
  if (cfg.protocol.name == "gotrim") return "gotrim+" + cfg.protocol.ranker;
  return cfg.protocol.name;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!cfg.topology && !cfg.proximity_topology) throw ConfigError("config needs a topology");
  if (cfg.protocol.name.empty()) throw ConfigError("config needs a protocol");
  if (cfg.proximity_topology && cfg.dataset.kind != DatasetSource::Kind::Csv) {
    throw ConfigError("proximity topology needs a csv dataset with coordinates");
  }
  if (cfg.protocol.name == "gotrim" && !cfg.alpha) throw ConfigError("gotrim requires alpha");
  if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
  if (!(cfg.edge_survival > 0.0 && cfg.edge_survival <= 1.0)) throw ConfigError("edge_survival must lie in (0, 1]");
  if (cfg.iterations == 0) throw ConfigError("iterations must be positive");
  if (cfg.trials == 0) throw ConfigError("trials must be positive");
  if (cfg.workers == 0) throw ConfigError("workers must be positive");
}

TrialRecorder make_recorder(const ExperimentConfig& cfg, std::vector<Metric> metrics) {
  std::vector<std::uint64_t> times = cfg.record.times;
  if (times.empty()) {
    times = TrialRecorder::default_times(cfg.iterations, cfg.record.points);
  } else {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.back() > cfg.iterations) throw ConfigError("record time beyond iterations");
  }
  return TrialRecorder(std::move(times), std::move(metrics));
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"id", "topology", "edge_survival", "dataset", "contamination", "alpha", "protocol", "iterations",
              "trials", "seed", "workers", "record", "output", "breakdown"});
  ExperimentConfig cfg;
  cfg.id = get_or<std::string>(doc, "id", cfg.id);
  if (!doc.contains("topology")) throw ConfigError("config needs a topology");
  if (!doc.contains("protocol")) throw ConfigError("config needs a protocol");
  parse_topology(doc["topology"], cfg);
  parse_protocol(doc["protocol"], cfg);
  cfg.edge_survival = get_or<double>(doc, "edge_survival", 1.0);
  if (doc.contains("dataset")) parse_dataset(doc["dataset"], cfg);
  if (doc.contains("contamination") && !doc["contamination"].is_null()) parse_contamination(doc["contamination"], cfg);
  if (doc.contains("alpha") && !doc["alpha"].is_null()) cfg.alpha = get_or<double>(doc, "alpha", 0.0);
  cfg.iterations = get_or<std::uint64_t>(doc, "iterations", cfg.iterations);
  cfg.trials = get_or<std::size_t>(doc, "trials", cfg.trials);
  cfg.base_seed = get_or<std::uint64_t>(doc, "seed", cfg.base_seed);
  cfg.workers = get_or<std::size_t>(doc, "workers", cfg.workers);
  if (doc.contains("record")) parse_record(doc["record"], cfg);
  cfg.output = get_or<std::string>(doc, "output", "");
  if (doc.contains("breakdown")) parse_breakdown(doc["breakdown"], cfg);
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Prepared prepare(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<std::string> warnings;
  std::optional<Graph> graph;
  Dataset clean;
  if (cfg.dataset.kind == DatasetSource::Kind::Csv) {
    CsvData csv = load_csv(cfg.dataset.path, cfg.dataset.csv);
    warnings = csv.warnings;
    clean = std::move(csv.dataset);
    if (cfg.proximity_topology) {
      if (!csv.graph) throw ConfigError("proximity topology needs lat/lon columns");
      graph = std::move(*csv.graph);
    }
  }
  if (!graph) graph = build_graph(*cfg.topology);
  if (cfg.dataset.kind == DatasetSource::Kind::Range) {
    const std::size_t n = cfg.dataset.n == 0 ? graph->node_count() : cfg.dataset.n;
    clean = synthetic_range(n);
    if (cfg.dataset.shuffle_seed) {
      std::mt19937_64 rng(*cfg.dataset.shuffle_seed);
      std::shuffle(clean.values.begin(), clean.values.end(), rng);
    }
  }
  if (clean.size() != graph->node_count()) {
    throw ConfigError("dataset has " + std::to_string(clean.size()) + " values but the graph has " +
                      std::to_string(graph->node_count()) + " nodes");
  }
  if (cfg.edge_survival < 1.0) graph = with_edge_failure(*graph, cfg.edge_survival);
  Dataset data = cfg.contamination ? contaminate(clean, *cfg.contamination, &warnings) : clean;
  if (has_ties(data.values)) {
    // Ranks and the trimmed mean assume distinct values; scaling integer data
    // can collide with untouched values.
    jitter(data, cfg.base_seed ^ 0x6a09e667f3bcc909ULL);
    warnings.push_back("tied observations separated by a relative jitter of 1e-9");
  }
  const Validation v = validate(*graph);
  warnings.insert(warnings.end(), v.warnings.begin(), v.warnings.end());
  return Prepared{std::move(*graph), std::move(clean), std::move(data), std::move(warnings)};
}

void append_rows(RunResult& result, const std::string& experiment, const std::string& protocol,
                 const AggregateTrajectory& agg) {
  for (std::size_t m = 0; m < agg.metric_names.size(); ++m) {
    for (std::size_t ti = 0; ti < agg.times.size(); ++ti) {
      const auto& mean = agg.mean[m][ti];
      const auto& sd = agg.std[m][ti];
      for (std::size_t k = 0; k < mean.size(); ++k) {
        OutputRow row{experiment, protocol, agg.times[ti], agg.metric_names[m], std::nullopt, mean[k], sd[k], agg.trials};
        if (agg.per_node[m]) row.node = static_cast<NodeId>(k);
        result.rows.push_back(std::move(row));
      }
    }
  }
}

void write_csv(std::ostream& out, const RunResult& result) {
  for (const auto& [key, value] : result.metadata) out << "# " << key << '=' << value << '\n';
  out << "experiment,protocol,t,metric,node,mean,std,trials\n";
  for (const auto& r : result.rows) {
    out << r.experiment << ',' << r.protocol << ',' << r.t << ',' << r.metric << ',';
    if (r.node) {
      out << *r.node;
    } else {
      out << "ALL";
    }
    out << ',' << fmt(r.mean) << ',' << fmt(r.std) << ',' << r.trials << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_csv(out, result);
}

SpectralReport cmd_spectral(const ExperimentConfig& cfg) {
  const Prepared prep = prepare(cfg);
  SpectralReport report;
  report.topology = cfg.proximity_topology ? "proximity" : topology_name(*cfg.topology);
  report.validation = validate(prep.graph);
  if (!report.validation.connected) throw ConfigError("graph is not connected; spectral constants are zero");
  report.info = spectral_info(prep.graph);
  return report;
}

void write_spectral(std::ostream& out, const SpectralReport& r) {
  for (const auto& w : r.validation.warnings) out << "# warning=" << w << '\n';
  out << "topology,n,edges,lambda2,c,c2,effective_c,connected,bipartite\n";
  out << r.topology << ',' << r.info.node_count << ',' << r.info.edge_count << ',' << fmt(r.info.lambda2) << ','
      << fmt(r.info.c) << ',' << fmt(r.info.c2) << ',' << fmt(r.info.effective_c) << ','
      << (r.info.connected ? "true" : "false") << ',' << (r.info.bipartite ? "true" : "false") << '\n';
}

RunResult cmd_run(const ExperimentConfig& cfg) {
  const Prepared prep = prepare(cfg);
  const std::size_t n = prep.data.size();
  auto ctx = std::make_shared<MetricContext>();
  ctx->ranks = true_ranks(prep.data.values);
  ctx->data_mean = mean(prep.data.values);
  if (cfg.alpha) {
    ctx->trim = TrimSpec(*cfg.alpha, n);
    ctx->trimmed_mean = trimmed_mean(prep.data.values, *ctx->trim);
  }
  const auto names = cfg.record.metrics.empty() ? default_metrics(cfg) : cfg.record.metrics;
  const TrialRecorder recorder = make_recorder(cfg, build_metrics(names, cfg.record.per_node, ctx));

  const ProtocolOptions options = protocol_options(cfg, n);
  EnsembleConfig ens;
  ens.make_protocol = [&](std::size_t) { return make_protocol(cfg.protocol.name, prep.data.values, options); };
  ens.horizon = cfg.iterations;
  ens.trials = cfg.trials;
  ens.base_seed = cfg.base_seed;
  ens.workers = cfg.workers;
  const AggregateTrajectory agg = run_ensemble(ens, prep.graph, recorder);

  RunResult result;
  auto& md = result.metadata;
  md.emplace_back("experiment", cfg.id);
  md.emplace_back("protocol", protocol_label(cfg));
  md.emplace_back("topology", cfg.proximity_topology ? "proximity" : topology_name(*cfg.topology));
  md.emplace_back("n", std::to_string(n));
  md.emplace_back("edges", std::to_string(prep.graph.edge_count()));
  md.emplace_back("iterations", std::to_string(cfg.iterations));
  md.emplace_back("seed", std::to_string(cfg.base_seed));
  md.emplace_back("data_mean", fmt(ctx->data_mean));
  if (cfg.alpha) {
    md.emplace_back("alpha", fmt(*cfg.alpha));
    md.emplace_back("trimmed_mean", fmt(ctx->trimmed_mean));
    md.emplace_back("corrupted_mean", fmt(ctx->data_mean));
    md.emplace_back("corrupted_mean_error", fmt(std::abs(ctx->data_mean - ctx->trimmed_mean)));
    md.emplace_back("zero_line", "0");
  }
  for (const auto& w : prep.warnings) md.emplace_back("warning", w);
  append_rows(result, cfg.id, protocol_label(cfg), agg);
  return result;
}

BreakdownResult cmd_breakdown(const ExperimentConfig& cfg) {
  if (cfg.protocol.name != "gotrim") throw ConfigError("breakdown runs the gotrim protocol");
  if (cfg.contamination) throw ConfigError("breakdown draws its own corruption; drop the contamination block");
  const Prepared prep = prepare(cfg);
  const std::vector<double>& clean = prep.clean.values;
  if (has_ties(clean)) throw ConfigError("breakdown needs tie-free data");
  const std::size_t n = clean.size();
  const TrimSpec trim(*cfg.alpha, n);
  const std::size_t m = trim.m();

  BreakdownResult out;
  out.experiment = cfg.id;
  out.protocol = protocol_label(cfg);
  const auto [lo, hi] = std::minmax_element(clean.begin(), clean.end());
  out.clean_range = *hi - *lo;
  out.clean_trimmed_mean = trimmed_mean(clean, trim);

  std::vector<std::size_t> counts = cfg.breakdown.counts;
  if (counts.empty()) {
    if (m >= 1) counts.push_back(m - 1);
    counts.push_back(m);
    counts.push_back(m + 1);
  }
  const double c = spectral_info(prep.graph).effective_c;

  std::size_t cell = 0;
  for (std::size_t p : counts) {
    if (p >= n) throw ConfigError("corruption count must be below n");
    for (double magnitude : cfg.breakdown.magnitudes) {
      BreakdownRow row;
      row.count = p;
      row.magnitude = magnitude;
      row.horizon = cfg.iterations;
      row.trials = cfg.trials;
      double sum = 0.0;
      double sq = 0.0;
      double shift = 0.0;
      std::vector<double> last_data;
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = trial_seed(cfg.base_seed, cell * cfg.trials + trial);
        std::vector<double> data = clean;
        std::vector<std::size_t> index(n);
        for (std::size_t k = 0; k < n; ++k) index[k] = k;
        std::mt19937_64 rng(seed ^ 0xbb67ae8584caa73bULL);
        for (std::size_t i = 0; i < p; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, n - 1);
          std::swap(index[i], index[pick(rng)]);
          data[index[i]] = magnitude + static_cast<double>(i);
        }
        if (has_ties(data)) throw ConfigError("corrupted values collide with clean data; raise the magnitude");
        GoTrim proto(data, trim, make_ranker(cfg.protocol.ranker, data));
        const TrialRecorder recorder({cfg.iterations}, {});
        run_trial(proto, prep.graph, cfg.iterations, recorder, seed);
        double excursion = 0.0;
        for (double z : proto.estimates()) excursion = std::max(excursion, std::abs(z - out.clean_trimmed_mean));
        sum += excursion;
        sq += excursion * excursion;
        row.excursion_max = std::max(row.excursion_max, excursion);
        shift = std::max(shift, std::abs(trimmed_mean(data, trim) - out.clean_trimmed_mean));
        last_data = std::move(data);
      }
      const double t = static_cast<double>(cfg.trials);
      row.excursion_mean = sum / t;
      row.excursion_std = cfg.trials > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / t) / (t - 1.0))) : 0.0;
      row.oracle_shift = shift;
      const BoundParams params = make_bound_params(c, last_data, trim);
      if (const auto b = breakdown_bounds(params, last_data, cfg.breakdown.tau, cfg.breakdown.delta,
                                               cfg.iterations)) {
        row.bound_lower = b->lower;
      }
      row.bound_upper = static_cast<double>(m) / static_cast<double>(n);
      out.rows.push_back(row);
      ++cell;
    }
  }
  return out;
}

void write_breakdown_csv(std::ostream& out, const BreakdownResult& r) {
  out << "# clean_range=" << fmt(r.clean_range) << '\n';
  out << "# clean_trimmed_mean=" << fmt(r.clean_trimmed_mean) << '\n';
  out << "experiment,protocol,p,M,T,excursion_mean,excursion_std,excursion_max,oracle_shift,"
         "bound_lower,bound_upper,trials\n";
  for (const auto& row : r.rows) {
    out << r.experiment << ',' << r.protocol << ',' << row.count << ',' << fmt(row.magnitude) << ',' << row.horizon
        << ',' << fmt(row.excursion_mean) << ',' << fmt(row.excursion_std) << ',' << fmt(row.excursion_max) << ','
        << fmt(row.oracle_shift) << ',' << (row.bound_lower ? fmt(*row.bound_lower) : "NA") << ','
        << fmt(row.bound_upper) << ',' << row.trials << '\n';
  }
}

// --- presets ---------------------------------------------------------------

namespace {

TopologySpec ws_spec(std::size_t n, std::uint64_t seed) { return {topology::WattsStrogatz{4, 0.2, seed}, n}; }
TopologySpec grid_spec(std::size_t n) { return {grid_dims(n), n}; }
TopologySpec complete_spec(std::size_t n) { return {topology::Complete{}, n}; }

ExperimentConfig preset_base(const PresetOptions& o, const std::string& id, TopologySpec topo,
                             const std::string& protocol) {
  ExperimentConfig cfg;
  cfg.id = id;
  cfg.topology = std::move(topo);
  cfg.protocol.name = protocol;
  cfg.iterations = o.iterations.value_or(20000);
  cfg.trials = o.trials.value_or(100);
  cfg.base_seed = o.base_seed;
  cfg.workers = o.workers;
  return cfg;
}

void contaminated(ExperimentConfig& cfg) {
  cfg.alpha = 0.2;
  cfg.contamination = ContaminationSpec{0.1, ContaminationSpec::Mode::Scale, 10.0, cfg.base_seed};
}

void merge(RunResult& into, RunResult part, bool keep_metadata) {
  if (keep_metadata) {
    const std::string prefix = part.rows.empty() ? "" : part.rows.front().experiment + ".";
    for (auto& [k, v] : part.metadata) into.metadata.emplace_back(prefix + k, v);
  }
  for (auto& r : part.rows) into.rows.push_back(std::move(r));
}

RunResult preset_fig2a(const PresetOptions& o) {
  ExperimentConfig cfg = preset_base(o, "fig2a", ws_spec(o.n, o.base_seed), "gorank");
  // Values in node order would line up with the ring lattice and mask the
  // rank effect behind value locality.
  cfg.dataset.shuffle_seed = o.base_seed;
  cfg.trials = o.trials.value_or(1000);
  cfg.record.metrics = {"rank_error"};
  RunResult result = cmd_run(cfg);
  // Final per-node mean error against phi of the normalized true rank.
  std::vector<double> err(o.n);
  for (const auto& r : result.rows) {
    if (r.metric == "rank_error" && r.node && r.t == cfg.iterations) err[*r.node] = r.mean;
  }
  const auto ranks = true_ranks(prepare(cfg).clean.values);
  std::vector<double> shape(o.n);
  for (std::size_t k = 0; k < o.n; ++k) {
    shape[k] = phi((ranks[k] - 1.0) / static_cast<double>(o.n));
    result.rows.push_back({cfg.id, "gorank", cfg.iterations, "phi", static_cast<NodeId>(k), shape[k], 0.0, cfg.trials});
  }
  result.metadata.emplace_back("spearman_error_phi", fmt(spearman(err, shape)));
  return result;
}

RunResult preset_fig2b(const PresetOptions& o) {
  RunResult result;
  const std::vector<std::pair<std::string, TopologySpec>> topos = {
      {"fig2b-complete", complete_spec(o.n)}, {"fig2b-watts-strogatz", ws_spec(o.n, o.base_seed)},
      {"fig2b-grid", grid_spec(o.n)}};
  for (const auto& [id, topo] : topos) {
    ExperimentConfig cfg = preset_base(o, id, topo, "gorank");
    cfg.record.per_node = false;
    merge(result, cmd_run(cfg), true);
  }
  return result;
}

RunResult preset_fig2c(const PresetOptions& o) {
  RunResult result;
  for (const std::string p : {"gorank", "baseline", "baselinepp"}) {
    ExperimentConfig cfg = preset_base(o, "fig2c-" + p, grid_spec(o.n), p);
    cfg.record.per_node = false;
    merge(result, cmd_run(cfg), true);
  }
  return result;
}

RunResult preset_fig3a(const PresetOptions& o) {
  ExperimentConfig cfg = preset_base(o, "fig3a", ws_spec(o.n, o.base_seed), "gotrim");
  contaminated(cfg);
  cfg.record.metrics = {"weight_bias"};
  RunResult result = cmd_run(cfg);
  const Prepared prep = prepare(cfg);
  const TrimSpec trim(*cfg.alpha, o.n);
  const BoundParams params = make_bound_params(spectral_info(prep.graph).effective_c, prep.data.values, trim);
  const auto bound = weight_bias_bound(params, cfg.iterations);
  for (std::size_t k = 0; k < o.n; ++k) {
    const auto node = static_cast<NodeId>(k);
    const double mask = params.sigma[k] * params.sigma[k] / (params.gamma[k] * params.gamma[k]);
    result.rows.push_back({cfg.id, "gotrim+gorank", cfg.iterations, "k_mask", node, mask, 0.0, cfg.trials});
    result.rows.push_back({cfg.id, "gotrim+gorank", cfg.iterations, "weight_bound", node, bound[k], 0.0, cfg.trials});
  }
  return result;
}

RunResult preset_fig3b(const PresetOptions& o) {
  RunResult result;
  for (const std::string ranker : {"gorank", "baselinepp"}) {
    ExperimentConfig cfg = preset_base(o, "fig3b-" + ranker, grid_spec(o.n), "gotrim");
    contaminated(cfg);
    cfg.protocol.ranker = ranker;
    cfg.record.metrics = {"trim_error"};
    cfg.record.per_node = false;
    merge(result, cmd_run(cfg), true);
  }
  return result;
}

RunResult preset_clipped(const PresetOptions& o) {
  RunResult result;
  for (const std::string p : {"gotrim", "clipped", "average"}) {
    ExperimentConfig cfg = preset_base(o, "clipped-vs-gotrim-" + p, ws_spec(o.n, o.base_seed), p);
    contaminated(cfg);
    cfg.record.metrics = {"trim_error"};
    cfg.record.per_node = false;
    merge(result, cmd_run(cfg), true);
  }
  return result;
}

using PresetFn = RunResult (*)(const PresetOptions&);

const std::map<std::string, PresetFn>& preset_table() {
  static const std::map<std::string, PresetFn> table = {
      {"fig2a", preset_fig2a}, {"fig2b", preset_fig2b}, {"fig2c", preset_fig2c},
      {"fig3a", preset_fig3a}, {"fig3b", preset_fig3b}, {"clipped-vs-gotrim", preset_clipped}};
  return table;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "clipped-vs-gotrim"};
  return names;
}

RunResult run_preset(const std::string& name, const PresetOptions& options) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown preset '" + name + "'");
  if (options.n < 10) throw ConfigError("presets need n >= 10");
  return it->second(options);
}

}  // namespace rgossip
