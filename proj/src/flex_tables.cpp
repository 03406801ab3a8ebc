#include "endgame/flex_tables.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "endgame/parallel.hpp"
#include "endgame/parcel_delivery.hpp"
#include "endgame/random.hpp"
#include "endgame/tsp.hpp"

namespace endgame::parcel {

namespace {

struct Sums {
  Eigen::MatrixXd inc;
  Eigen::MatrixXd ser;
  Eigen::MatrixXi count;
};

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m, const Eigen::MatrixXi& count) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      if (count(i, j) > 0) {
        os << m(i, j);
      } else {
        os << "nan";
      }
    }
    os << '\n';
  }
}

double read_value(std::istream& is) {
  std::string word;
  if (!(is >> word)) throw std::runtime_error("flex tables file: truncated matrix");
  if (word == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(word);
}

void expect(std::istream& is, const std::string& word) {
  std::string got;
  if (!(is >> got) || got != word) {
    throw std::runtime_error("flex tables file: expected '" + word + "', got '" + got + "'");
  }
}

}  // namespace

FlexTables estimate_flex_tables(const Corpus& corpus, const ParcelParams& params,
                                std::size_t replications, std::uint64_t seed, std::size_t parallel) {
  if (replications == 0) throw ContractError("estimate_flex_tables: replications must be >= 1");
  const auto n = static_cast<Eigen::Index>(corpus.zones);
  std::vector<Sums> per_rep(replications);

  parallel_for(replications, parallel, [&](std::size_t rep) {
    Sums s{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXi::Zero(n, n)};
    const DayRecord day =
        run_day(NoFlex{}, corpus, params, nullptr, derive_seed(seed, "flex-tables", rep));
    for (std::size_t i = 0; i < day.trucks.size(); ++i) {
      const TruckState& truck = day.trucks[i];
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t k = 0; k < truck.tour.size(); ++k) {
        const std::size_t stop = truck.tour[k];
        const Package& pkg = corpus.packages[truck.pool_ids[stop]];
        s.inc(ii, ii) += tsp::removal_gain(truck.stops, corpus.depot, truck.tour, k) / params.speed_kmh;
        s.ser(ii, ii) += pkg.unload;
        ++s.count(ii, ii);
        for (std::size_t j : flex_set_of(pkg.position, i, corpus.centers, params.flex_km)) {
          if (j == i) continue;
          const TruckState& other = day.trucks[j];
          const auto jj = static_cast<Eigen::Index>(j);
          s.inc(ii, jj) +=
              tsp::insertion_cost(other.stops, corpus.depot, other.tour, pkg.position) / params.speed_kmh;
          s.ser(ii, jj) += pkg.unload;
          ++s.count(ii, jj);
        }
      }
    }
    per_rep[rep] = std::move(s);
  });

  FlexTables tables;
  tables.replications = replications;
  tables.inc = Eigen::MatrixXd::Zero(n, n);
  tables.ser = Eigen::MatrixXd::Zero(n, n);
  tables.observations = Eigen::MatrixXi::Zero(n, n);
  for (const Sums& s : per_rep) {
    tables.inc += s.inc;
    tables.ser += s.ser;
    tables.observations += s.count;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const int c = tables.observations(i, j);
      tables.inc(i, j) = c > 0 ? tables.inc(i, j) / c : nan;
      tables.ser(i, j) = c > 0 ? tables.ser(i, j) / c : nan;
    }
  }
  const PoolStats stats = pool_stats(corpus);
  tables.arrival_prob.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    tables.arrival_prob(j) = static_cast<double>(stats.zone_counts[static_cast<std::size_t>(j)]) /
                             static_cast<double>(corpus.packages.size());
  }
  return tables;
}

void write_flex_tables(std::ostream& os, const FlexTables& tables) {
  os << "# " << kFlexTablesFormatTag << "\n";
  os << std::setprecision(17);
  os << "N " << tables.zones() << "\n";
  os << "replications " << tables.replications << "\n";
  os << "inc\n";
  write_matrix(os, tables.inc, tables.observations);
  os << "ser\n";
  write_matrix(os, tables.ser, tables.observations);
  os << "observations\n" << tables.observations << "\n";
  os << "arrival_prob\n" << tables.arrival_prob.transpose() << "\n";
}

FlexTables read_flex_tables(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != std::string("# ") + kFlexTablesFormatTag) {
    throw std::runtime_error("flex tables file: missing or unsupported format tag (expected '# " +
                             std::string(kFlexTablesFormatTag) + "')");
  }
  FlexTables tables;
  Eigen::Index n = 0;
  expect(is, "N");
  is >> n;
  expect(is, "replications");
  is >> tables.replications;
  if (!is || n <= 0) throw std::runtime_error("flex tables file: bad header");
  tables.inc.resize(n, n);
  tables.ser.resize(n, n);
  tables.observations.resize(n, n);
  tables.arrival_prob.resize(n);
  expect(is, "inc");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) tables.inc(i, j) = read_value(is);
  expect(is, "ser");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) tables.ser(i, j) = read_value(is);
  expect(is, "observations");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) is >> tables.observations(i, j);
  expect(is, "arrival_prob");
  for (Eigen::Index j = 0; j < n; ++j) tables.arrival_prob(j) = read_value(is);
  if (!is) throw std::runtime_error("flex tables file: read error");
  return tables;
}

void save_flex_tables(const std::string& path, const FlexTables& tables) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write flex tables file " + path);
  write_flex_tables(os, tables);
}

FlexTables load_flex_tables(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open flex tables file " + path);
  return read_flex_tables(is);
}

}  // namespace endgame::parcel
