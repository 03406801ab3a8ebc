#pragma once

// Experiment orchestration: a validated config expands into a grid of cells
// (cartesian product of the sweep axes, last axis fastest) times policies
// times replications. Replication seeds hash the root seed with the cell's
// model coordinates; policies are not part of the coordinates, so every
// policy in a cell sees the same arrivals.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "endgame/corpus.hpp"
#include "endgame/flex_tables.hpp"
#include "endgame/table.hpp"

namespace endgame::harness {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Model { Bins, Opaque, Parcel };
Model parse_model(const std::string& name);
const char* model_name(Model model);

struct Axis {
  std::string name;
  std::vector<double> values;
};

struct ExperimentConfig {
  Model model = Model::Bins;
  std::vector<std::string> policies;  // empty: the model's standard set
  std::map<std::string, double> params;
  std::string preset = "numerics";
  std::optional<std::size_t> replications;  // default per model
  std::uint64_t seed = 1;
  std::string out_dir;
  std::vector<Axis> sweep;
  std::size_t parallel = 1;
  std::string regime;  // opaque only
  std::string corpus_path;  // parcel only
  std::string tables_path;  // parcel only

  /// Parses the JSON text form (see README); throws ConfigError.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  /// Checks names and ranges; throws ConfigError with a field path.
  void validate() const;
  std::size_t replication_count() const;
};

/// Parameters each model accepts in `params` and `sweep`.
std::vector<std::string> model_parameters(Model model);
std::vector<std::string> standard_policies(Model model);
std::size_t default_replications(Model model);

/// "a,b,c", "lo:hi:logK" (K log-spaced points, rounded to integers when both
/// ends are integers) or "lo:hi:K" (K evenly spaced points). Rounding can
/// merge neighbours, so fewer than K values may come back.
std::vector<double> parse_grid(const std::string& text);

struct ExperimentResult {
  Table raw;
  Table summary;
  Table errors;
  Table routes;  // parcel per-route rows; empty otherwise
  bool ok() const { return errors.rows.empty(); }
};

/// In-memory inputs for parcel runs; when null the config's paths are used,
/// or a default corpus/tables set is built from the root seed.
struct ParcelInputs {
  const parcel::Corpus* corpus = nullptr;
  const parcel::FlexTables* tables = nullptr;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const ParcelInputs& inputs = {});

/// Writes raw.csv, summary.csv (and routes.csv, errors.csv when non-empty).
void write_result(const ExperimentResult& result, const std::string& out_dir);

/// Aggregates `raw` by the columns in `cell_columns`, one row per metric.
Table summarize_table(const Table& raw, const std::vector<std::string>& cell_columns,
                      const std::vector<std::string>& metrics);

/// Root seed from --seed, else ENDGAME_SEED, else `fallback`.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback);

}  // namespace endgame::harness
