#include "robust_gossip/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "robust_gossip/errors.hpp"

namespace rgossip {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim_ws(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& file, std::size_t line) {
  const std::string t = trim_ws(text);
  if (t.empty()) throw ParseError(file, line, "empty numeric field");
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError(file, line, "not a number: '" + t + "'");
  }
  if (used != t.size()) throw ParseError(file, line, "not a number: '" + t + "'");
  return value;
}

}  // namespace

Dataset synthetic_range(std::size_t n) {
  std::vector<double> values(n);
  std::iota(values.begin(), values.end(), 1.0);
  return Dataset(std::move(values));
}

TrimSpec::TrimSpec(double alpha, std::size_t n) : alpha_(alpha), n_(n) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw ParameterError("trimming level must lie in (0, 1/2)");
  if (n == 0) throw ParameterError("trimming needs a non-empty sample");
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  m_ = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
  if (n_ <= 2 * m_) throw ParameterError("trimming removes every observation");
}

std::vector<double> true_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i+1 .. j share the average p + (l + 1) / 2 with p = i, l = j - i.
    const double mid = static_cast<double>(i) + static_cast<double>(j - i + 1) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ParameterError("mean of empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double trimmed_mean(std::span<const double> values, const TrimSpec& trim) {
  if (values.size() != trim.n()) throw ParameterError("trim spec built for a different sample size");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ParameterError("trimmed mean oracle requires distinct values; jitter the data first");
  }
  const std::size_t m = trim.m();
  const double sum = std::accumulate(sorted.begin() + static_cast<std::ptrdiff_t>(m),
                                     sorted.end() - static_cast<std::ptrdiff_t>(m), 0.0);
  return sum / static_cast<double>(trim.n() - 2 * m);
}

double weight(double rank, const TrimSpec& trim) { return trim.contains(rank) ? trim.normalizer() : 0.0; }

Dataset contaminate(const Dataset& data, const ContaminationSpec& spec, std::vector<std::string>* warnings) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 0.5)) throw ParameterError("contamination fraction must lie in (0, 1/2)");
  const std::size_t n = data.size();
  const auto count = static_cast<std::size_t>(std::floor(spec.epsilon * static_cast<double>(n) + 1e-9));
  Dataset out = data;
  if (count == 0) {
    if (warnings != nullptr) warnings->push_back("contamination selects floor(eps n) = 0 nodes; data unchanged");
    return out;
  }
  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), 0);
  std::mt19937_64 rng(spec.seed);
  // Partial Fisher-Yates: the first `count` entries are a uniform sample without replacement.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(index[i], index[pick(rng)]);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = index[i];
    out.values[k] = spec.mode == ContaminationSpec::Mode::Scale ? spec.magnitude * out.values[k]
                                                                : out.values[k] + spec.magnitude;
    out.corrupted[k] = true;
  }
  return out;
}

void jitter(Dataset& data, std::uint64_t seed, double relative) {
  if (data.size() < 2) return;
  const auto [lo, hi] = std::minmax_element(data.values.begin(), data.values.end());
  const double range = *hi - *lo;
  const double scale = relative * (range > 0.0 ? range : std::max(1.0, std::abs(*lo)));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-scale, scale);
  const std::vector<double> original = data.values;
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (std::size_t k = 0; k < data.size(); ++k) data.values[k] = original[k] + noise(rng);
    if (!has_ties(data.values)) return;
  }
  throw GenerationError("jitter could not separate tied values");
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double dlat = (lat2 - lat1) * kDeg;
  const double dlon = (lon2 - lon1) * kDeg;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

CsvData load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) throw ParseError(file, 0, "cannot open file");

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(file, 1, "missing header");
  auto header = split_csv(line);
  for (auto& h : header) h = trim_ws(h);
  const bool with_coords = header.size() == 4 && header[2] == "lat" && header[3] == "lon";
  if (header.size() < 2 || header[0] != "node_id" || header[1] != "value" || (header.size() != 2 && !with_coords)) {
    throw ParseError(file, 1, "header must be node_id,value[,lat,lon]");
  }

  std::vector<double> values;
  std::vector<double> lat;
  std::vector<double> lon;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_ws(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError(file, line_no, "expected " + std::to_string(header.size()) + " fields");
    }
    const double id = parse_number(fields[0], file, line_no);
    if (id != static_cast<double>(values.size())) {
      throw ParseError(file, line_no, "node ids must be 0-based and contiguous");
    }
    values.push_back(parse_number(fields[1], file, line_no));
    if (with_coords) {
      lat.push_back(parse_number(fields[2], file, line_no));
      lon.push_back(parse_number(fields[3], file, line_no));
    }
  }
  if (values.empty()) throw ParseError(file, line_no, "no data rows");

  CsvData out;
  out.dataset = Dataset(std::move(values));
  out.node_ids.resize(out.dataset.size());
  std::iota(out.node_ids.begin(), out.node_ids.end(), std::size_t{0});
  if (options.jitter) jitter(out.dataset, options.jitter_seed);

  if (with_coords) {
    std::vector<Edge> edges;
    const std::size_t n = out.dataset.size();
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (haversine_km(lat[u], lon[u], lat[v], lon[v]) <= options.radius_km) edges.push_back({u, v});
      }
    }
    Graph g(n, std::move(edges));
    if (!is_connected(g)) {
      const auto keep = largest_component(g);
      out.warnings.push_back("proximity graph is disconnected; keeping the largest component (" +
                             std::to_string(keep.size()) + " of " + std::to_string(n) + " nodes)");
      Dataset kept;
      for (NodeId k : keep) {
        kept.values.push_back(out.dataset.values[k]);
        kept.corrupted.push_back(false);
      }
      out.dataset = std::move(kept);
      out.node_ids.assign(keep.begin(), keep.end());
      g = induced_subgraph(g, keep);
    }
    out.graph = std::move(g);
  }
  return out;
}

}  // namespace rgossip
