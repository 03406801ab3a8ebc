#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "endgame/corpus.hpp"

namespace endgame::parcel {

struct ParcelParams;

/// Mean incremental travel (INC) and unloading (SER) hours when a package
/// whose default truck is i ends up on truck j, from no-flex replications.
/// Missing pairs hold NaN; `arrival_prob` is each zone's share of the pool.
struct FlexTables {
  Eigen::MatrixXd inc;
  Eigen::MatrixXd ser;
  Eigen::MatrixXi observations;
  Eigen::VectorXd arrival_prob;
  std::size_t replications = 0;

  std::size_t zones() const { return static_cast<std::size_t>(inc.rows()); }
  bool has(std::size_t from, std::size_t to) const {
    return observations(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) > 0;
  }
};

/// Runs `replications` no-flex days. Diagonal entries use the gain of removing
/// each stop from its own final route; off-diagonal (i, j) entries use the
/// cheapest insertion into truck j's final route for stops whose flex set
/// contains j.
FlexTables estimate_flex_tables(const Corpus& corpus, const ParcelParams& params,
                                std::size_t replications, std::uint64_t seed,
                                std::size_t parallel = 1);

inline constexpr const char* kFlexTablesFormatTag = "endgame-flex-tables v1";

void write_flex_tables(std::ostream& os, const FlexTables& tables);
FlexTables read_flex_tables(std::istream& is);
void save_flex_tables(const std::string& path, const FlexTables& tables);
FlexTables load_flex_tables(const std::string& path);

}  // namespace endgame::parcel
