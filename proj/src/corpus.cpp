#include "endgame/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "endgame/clustering.hpp"
#include "endgame/random.hpp"

namespace endgame::parcel {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::istream& expect_word(std::istream& is, const std::string& word) {
  std::string got;
  if (!(is >> got) || got != word) {
    throw std::runtime_error("corpus file: expected '" + word + "', got '" + got + "'");
  }
  return is;
}

}  // namespace

std::string GeneratorSpec::describe() const {
  std::ostringstream os;
  os << std::setprecision(17) << "spacing_km=" << spacing_km << ";spread_km=" << spread_km
     << ";jitter_km=" << jitter_km << ";depot_gap_km=" << depot_gap_km
     << ";depot_x_frac=" << depot_x_frac
     << ";weight_sigma=" << weight_sigma << ";unload_mean_h=" << unload_mean_h
     << ";unload_sigma=" << unload_sigma << ";cluster_unload_sigma=" << cluster_unload_sigma
     << ";balance_epsilon=" << balance_epsilon;
  return os.str();
}

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  GeneratorSpec spec;
  const std::map<std::string, double*> fields{
      {"spacing_km", &spec.spacing_km},
      {"spread_km", &spec.spread_km},
      {"jitter_km", &spec.jitter_km},
      {"depot_gap_km", &spec.depot_gap_km},
      {"depot_x_frac", &spec.depot_x_frac},
      {"weight_sigma", &spec.weight_sigma},
      {"unload_mean_h", &spec.unload_mean_h},
      {"unload_sigma", &spec.unload_sigma},
      {"cluster_unload_sigma", &spec.cluster_unload_sigma},
      {"balance_epsilon", &spec.balance_epsilon}};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("generator spec: bad item '" + item + "'");
    const auto it = fields.find(item.substr(0, eq));
    if (it == fields.end()) {
      throw std::invalid_argument("generator spec: unknown key '" + item.substr(0, eq) + "'");
    }
    *it->second = std::stod(item.substr(eq + 1));
  }
  return spec;
}

std::vector<geo::Point> Corpus::positions() const {
  std::vector<geo::Point> out;
  out.reserve(packages.size());
  for (const auto& p : packages) out.push_back(p.position);
  return out;
}

Corpus generate_pool(std::uint64_t seed, std::size_t zones, std::size_t pool_size,
                     const GeneratorSpec& spec) {
  if (zones < 1) throw std::invalid_argument("generate_pool needs at least one zone");
  Corpus corpus;
  corpus.zones = zones;
  corpus.seed = seed;
  corpus.generator = spec;

  const RandomStream root(seed);
  RandomStream layout = root.split("layout");
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(1.5 * static_cast<double>(zones))));
  const std::size_t rows = (zones + cols - 1) / cols;

  std::vector<geo::Point> cluster_centers;
  std::vector<double> weights;
  std::vector<double> unload_scale;
  for (std::size_t c = 0; c < zones; ++c) {
    const double x = static_cast<double>(c % cols) * spec.spacing_km + spec.jitter_km * layout.normal();
    const double y = static_cast<double>(c / cols) * spec.spacing_km + spec.jitter_km * layout.normal();
    cluster_centers.emplace_back(x, y);
    weights.push_back(std::exp(spec.weight_sigma * layout.normal()));
    unload_scale.push_back(std::exp(spec.cluster_unload_sigma * layout.normal()));
  }
  double weight_total = 0.0, scale_mean = 0.0;
  for (std::size_t c = 0; c < zones; ++c) weight_total += weights[c];
  for (std::size_t c = 0; c < zones; ++c) {
    weights[c] /= weight_total;
    scale_mean += weights[c] * unload_scale[c];
  }
  for (double& s : unload_scale) s /= scale_mean;
  std::vector<double> cumulative(zones);
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  cumulative.back() = 1.0;

  const double mid_y = 0.5 * static_cast<double>(rows - 1) * spec.spacing_km;
  const double width = static_cast<double>(cols - 1) * spec.spacing_km;
  corpus.depot = geo::Point(spec.depot_x_frac * width - spec.depot_gap_km, mid_y);
  corpus.centers = cluster_centers;

  const RandomStream stops = root.split("stops");
  const double shape = spec.unload_sigma;
  corpus.packages.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) {
    RandomStream rng = stops.at(i);
    const double u = rng.uniform();
    const auto c = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const std::size_t cluster = std::min(c, zones - 1);
    Package p;
    p.position = cluster_centers[cluster] +
                 spec.spread_km * geo::Point(rng.normal(), rng.normal());
    const double mean = spec.unload_mean_h * unload_scale[cluster];
    p.unload = std::exp(std::log(mean) - 0.5 * shape * shape + shape * rng.normal());
    p.default_zone = cluster;
    corpus.packages.push_back(p);
  }
  return corpus;
}

void rezone(Corpus& corpus, double epsilon, std::uint64_t seed) {
  const std::vector<geo::Point> points = corpus.positions();
  RandomStream rng = RandomStream(seed).split("kmeans");
  const cluster::Zoning zoning = cluster::cluster_default(points, corpus.zones, epsilon, rng);
  corpus.centers = zoning.centers;
  for (std::size_t i = 0; i < corpus.packages.size(); ++i) {
    corpus.packages[i].default_zone = zoning.assignment.zone_of[i];
  }
}

Corpus build_corpus(std::uint64_t seed, std::size_t zones, std::size_t pool_size,
                    const GeneratorSpec& spec) {
  Corpus corpus = generate_pool(seed, zones, pool_size, spec);
  rezone(corpus, spec.balance_epsilon, seed);
  return corpus;
}

PoolStats pool_stats(const Corpus& corpus) {
  PoolStats stats;
  stats.zone_counts.assign(corpus.zones, 0);
  const auto n = static_cast<double>(corpus.packages.size());
  double sum = 0.0, sq = 0.0;
  for (const auto& p : corpus.packages) {
    sum += p.unload;
    sq += p.unload * p.unload;
    ++stats.zone_counts[p.default_zone];
  }
  stats.mean_unload = sum / n;
  stats.sd_unload = n > 1 ? std::sqrt(std::max(0.0, (sq - n * stats.mean_unload * stats.mean_unload) / (n - 1))) : 0.0;
  return stats;
}

void write_corpus(std::ostream& os, const Corpus& corpus) {
  os << "# " << kCorpusFormatTag << "\n";
  os << "N " << corpus.zones << "\n";
  os << "depot " << fmt(corpus.depot.x()) << " " << fmt(corpus.depot.y()) << "\n";
  os << "seed " << corpus.seed << "\n";
  os << "generator " << corpus.generator.describe() << "\n";
  for (std::size_t z = 0; z < corpus.centers.size(); ++z) {
    os << "center " << z << " " << fmt(corpus.centers[z].x()) << " " << fmt(corpus.centers[z].y())
       << "\n";
  }
  os << "packages " << corpus.packages.size() << "\n";
  os << "# x_km y_km unload_hours default_zone\n";
  for (const auto& p : corpus.packages) {
    os << fmt(p.position.x()) << " " << fmt(p.position.y()) << " " << fmt(p.unload) << " "
       << p.default_zone << "\n";
  }
}

Corpus read_corpus(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != std::string("# ") + kCorpusFormatTag) {
    throw std::runtime_error("corpus file: missing or unsupported format tag (expected '# " +
                             std::string(kCorpusFormatTag) + "')");
  }
  Corpus corpus;
  expect_word(is, "N") >> corpus.zones;
  double x = 0, y = 0;
  expect_word(is, "depot") >> x >> y;
  corpus.depot = geo::Point(x, y);
  expect_word(is, "seed") >> corpus.seed;
  expect_word(is, "generator");
  std::string spec;
  is >> spec;
  corpus.generator = GeneratorSpec::parse(spec);
  corpus.centers.resize(corpus.zones);
  for (std::size_t z = 0; z < corpus.zones; ++z) {
    std::size_t id = 0;
    expect_word(is, "center") >> id >> x >> y;
    if (id >= corpus.zones) throw std::runtime_error("corpus file: center id out of range");
    corpus.centers[id] = geo::Point(x, y);
  }
  std::size_t count = 0;
  expect_word(is, "packages") >> count;
  std::getline(is, line);  // rest of the count line
  std::getline(is, line);  // column comment
  corpus.packages.resize(count);
  for (auto& p : corpus.packages) {
    if (!(is >> x >> y >> p.unload >> p.default_zone)) {
      throw std::runtime_error("corpus file: truncated package rows");
    }
    if (p.default_zone >= corpus.zones) throw std::runtime_error("corpus file: zone out of range");
    if (!(p.unload > 0.0)) throw std::runtime_error("corpus file: unloading time must be positive");
    p.position = geo::Point(x, y);
  }
  if (!is) throw std::runtime_error("corpus file: read error");
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write corpus file " + path);
  write_corpus(os, corpus);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open corpus file " + path);
  return read_corpus(is);
}

}  // namespace endgame::parcel
