#pragma once

// Synthetic package pool standing in for historical delivery data.
//
// A city is a jittered grid of N Gaussian stop clusters around a depot
// (central by default). Clusters differ in popularity and in typical
// unloading time; per-stop unloading times are log-normal. After generation the pool is
// zoned with cluster_default, which fixes zone centers and default zones.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "endgame/geometry.hpp"

namespace endgame::parcel {

struct Package {
  geo::Point position;  // km
  double unload = 0.0;  // hours
  std::size_t default_zone = 0;
};

struct GeneratorSpec {
  double spacing_km = 5.6;
  double spread_km = 2.0;
  double jitter_km = 0.6;
  double depot_gap_km = 0.0;
  /// Depot x as a fraction of the grid width, then shifted west by depot_gap_km.
  double depot_x_frac = 0.5;
  double weight_sigma = 0.1;
  /// Mean unloading hours per stop; 24 trucks * 3.42 h / 2000 stops.
  double unload_mean_h = 24.0 * 3.42 / 2000.0;
  double unload_sigma = 0.7;
  double cluster_unload_sigma = 0.1;
  double balance_epsilon = 200.0;

  /// "key=value;key=value" form stored in corpus headers.
  std::string describe() const;
  static GeneratorSpec parse(const std::string& text);
};

struct Corpus {
  std::size_t zones = 0;
  geo::Point depot = geo::Point::Zero();
  std::uint64_t seed = 0;
  GeneratorSpec generator;
  std::vector<geo::Point> centers;
  std::vector<Package> packages;

  std::vector<geo::Point> positions() const;
};

struct PoolStats {
  double mean_unload = 0.0;
  double sd_unload = 0.0;
  std::vector<std::size_t> zone_counts;
};

/// Generates and zones a pool of `pool_size` stops; deterministic per seed.
Corpus build_corpus(std::uint64_t seed, std::size_t zones, std::size_t pool_size,
                    const GeneratorSpec& spec = {});

/// Stop locations only (no zoning); exposed for tests of degenerate layouts.
Corpus generate_pool(std::uint64_t seed, std::size_t zones, std::size_t pool_size,
                     const GeneratorSpec& spec);

/// Re-zones `corpus` in place (k-means + balanced flow).
void rezone(Corpus& corpus, double epsilon, std::uint64_t seed);

PoolStats pool_stats(const Corpus& corpus);

inline constexpr const char* kCorpusFormatTag = "endgame-corpus v1";

void write_corpus(std::ostream& os, const Corpus& corpus);
Corpus read_corpus(std::istream& is);
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

}  // namespace endgame::parcel
