#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "endgame/corpus.hpp"
#include "endgame/harness.hpp"

using namespace endgame::harness;

namespace {

ExperimentConfig bins_small() {
  ExperimentConfig c;
  c.model = Model::Bins;
  c.policies = {"no_flex", "dynamic"};
  c.params = {{"N", 5}, {"q", 0.1}};
  c.sweep = {{"T", {1000, 10000}}};
  c.replications = 20;
  c.seed = 4;
  return c;
}

std::size_t rows_for_metric(const endgame::Table& t, const std::string& metric) {
  const auto m = t.column("metric");
  std::size_t n = 0;
  for (const auto& r : t.rows) n += r[m] == metric;
  return n;
}

}  // namespace

TEST(Harness, DeterministicRawCsv) {
  ExperimentConfig c = bins_small();
  c.replications = 1;
  EXPECT_EQ(run_experiment(c).raw.to_csv(), run_experiment(c).raw.to_csv());
}

TEST(Harness, CellCardinality) {
  const auto r = run_experiment(bins_small());
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.raw.rows.size(), 2u * 2u * 20u);
  EXPECT_EQ(rows_for_metric(r.summary, "final_gap"), 4u);
  EXPECT_EQ(r.raw.columns.front(), "schema_version");
  EXPECT_EQ(r.summary.columns.front(), "schema_version");
}

TEST(Harness, NoFlexReportsZeroFlexes) {
  const auto r = run_experiment(bins_small());
  const auto p = r.summary.column("policy"), m = r.summary.column("metric"), mean = r.summary.column("mean");
  int seen = 0;
  for (const auto& row : r.summary.rows) {
    if (row[p] == "no_flex" && row[m] == "flex_count") {
      EXPECT_EQ(row[mean], "0");
      ++seen;
    }
  }
  EXPECT_EQ(seen, 2);
}

TEST(Harness, ParallelEqualsSerial) {
  ExperimentConfig c = bins_small();
  const auto serial = run_experiment(c).raw.to_csv();
  c.parallel = 4;
  EXPECT_EQ(run_experiment(c).raw.to_csv(), serial);
}

TEST(Harness, PoliciesShareArrivals) {
  // Same seed column for every policy in a cell.
  const auto r = run_experiment(bins_small());
  const auto seed = r.raw.column("seed");
  EXPECT_EQ(r.raw.rows[0][seed], r.raw.rows[20][seed]);
}

TEST(Harness, OpaqueAndParcelRun) {
  ExperimentConfig o;
  o.model = Model::Opaque;
  o.params = {{"N", 3}, {"cycles", 3}};
  o.sweep = {{"S", {20, 40}}};
  o.replications = 2;
  o.regime = "delta_const";
  const auto ro = run_experiment(o);
  EXPECT_TRUE(ro.ok());
  EXPECT_EQ(ro.raw.rows.size(), 5u * 2u * 2u);

  const endgame::parcel::Corpus corpus = endgame::parcel::build_corpus(3, 3, 600);
  ExperimentConfig p;
  p.model = Model::Parcel;
  p.policies = {"no_flex", "patient_dynamic"};
  p.params = {{"T", 120}, {"table_reps", 2}};
  p.sweep = {{"h_max", {2, 3}}};
  p.replications = 2;
  const auto rp = run_experiment(p, {&corpus, nullptr});
  EXPECT_TRUE(rp.ok());
  EXPECT_EQ(rp.raw.rows.size(), 2u * 2u * 2u);
  EXPECT_EQ(rp.routes.rows.size(), 2u * 2u * 2u * 3u);
  // Cost-only sweeps replay the same days.
  const auto travel = rp.raw.column("travel_cost");
  EXPECT_EQ(rp.raw.rows[0][travel], rp.raw.rows[4][travel]);
}

TEST(Harness, FailedCellsAreReported) {
  ExperimentConfig c = bins_small();
  c.params["r"] = 9;  // larger than N
  const auto r = run_experiment(c);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(r.raw.rows.empty());
}

TEST(Grid, Forms) {
  EXPECT_EQ(parse_grid("1,2.5,4"), (std::vector<double>{1, 2.5, 4}));
  EXPECT_EQ(parse_grid("50:800:log5"), (std::vector<double>{50, 100, 200, 400, 800}));
  EXPECT_EQ(parse_grid("0:1:3"), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(parse_grid("50:800:log8").size(), 8u);
  EXPECT_THROW(parse_grid("0:10:log3"), std::invalid_argument);
  EXPECT_THROW(parse_grid("1,x"), std::invalid_argument);
}

TEST(Config, JsonParsingAndErrors) {
  const auto c = ExperimentConfig::from_json_text(
      R"({"model":"opaque","regime":"delta_sqrt","sweep":{"S":"50:800:log5"},"replications":3,"seed":9})");
  EXPECT_EQ(c.model, Model::Opaque);
  EXPECT_EQ(c.sweep.at(0).values.size(), 5u);
  EXPECT_EQ(c.replication_count(), 3u);

  const auto path_of = [](const std::string& text) {
    try {
      ExperimentConfig::from_json_text(text);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("no error");
  };
  EXPECT_EQ(path_of(R"({"model":"bins","params":{"S":3}})"), "config.params.S");
  EXPECT_EQ(path_of(R"({"model":"bins","colour":1})"), "config.colour");
  EXPECT_EQ(path_of(R"({"model":"bins","policies":["psychic"]})"), "config.policies[0]");
  EXPECT_EQ(path_of(R"({"model":"bins","params":{"T":2.5}})"), "config.params.T");
  EXPECT_EQ(path_of(R"({"model":"bins","regime":"delta_zero"})"), "config.regime");
  EXPECT_EQ(path_of(R"({"policies":[]})"), "config.model");
  EXPECT_EQ(path_of("{"), "config");
}

TEST(Config, SeedPrecedence) {
  ::unsetenv("ENDGAME_SEED");
  EXPECT_EQ(resolve_seed(std::nullopt, 5), 5u);
  ::setenv("ENDGAME_SEED", "77", 1);
  EXPECT_EQ(resolve_seed(std::nullopt, 5), 77u);
  EXPECT_EQ(resolve_seed(3, 5), 3u);
  ::setenv("ENDGAME_SEED", "abc", 1);
  EXPECT_THROW(resolve_seed(std::nullopt, 5), ConfigError);
  ::unsetenv("ENDGAME_SEED");
}

TEST(Harness, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "endgame_harness_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = bins_small();
  c.out_dir = dir.string();
  run_experiment(c);
  EXPECT_TRUE(std::filesystem::exists(dir / "raw.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "errors.csv"));
  std::filesystem::remove_all(dir);
}
