#include "endgame/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "endgame/clustering.hpp"
#include "endgame/corpus.hpp"
#include "endgame/flex_tables.hpp"
#include "endgame/harness.hpp"
#include "endgame/parcel_delivery.hpp"
#include "endgame/plot.hpp"
#include "endgame/random.hpp"

namespace endgame {

namespace {

using harness::ExperimentConfig;
using harness::Model;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> preset;
  std::optional<std::size_t> parallel;
  std::optional<std::size_t> reps;
};

void add_common(CLI::App* app, Common& c, bool sweep) {
  if (sweep) app->add_option("--config", c.config, "JSON experiment config; flags override it")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "root seed (falls back to ENDGAME_SEED, then the config)");
  app->add_option("--out", c.out, sweep ? "directory for raw/summary CSVs" : "output path");
  app->add_option("--preset", c.preset, "constant preset")->check(CLI::IsMember({"theory", "numerics"}));
  app->add_option("--parallel", c.parallel, "worker threads")->check(CLI::PositiveNumber);
}

// Scalar model parameters exposed as flags: flag name -> (param key, value).
struct ParamFlags {
  std::map<std::string, std::optional<double>> values;
  std::map<std::string, std::string> keys;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    keys[flag] = key;
    app->add_option("--" + flag, values[flag], help);
  }
  void apply(ExperimentConfig& config) const {
    for (const auto& [flag, v] : values) {
      if (v) config.params[keys.at(flag)] = *v;
    }
  }
};

// Grid flags: every one given becomes a sweep axis (replacing a config axis).
struct GridFlags {
  std::map<std::string, std::optional<std::string>> values;
  std::map<std::string, std::string> keys;
  std::vector<std::string> order;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    keys[flag] = key;
    order.push_back(flag);
    app->add_option("--" + flag, values[flag], help + " (a,b,c | lo:hi:K | lo:hi:logK)");
  }
  void apply(ExperimentConfig& config) const {
    for (const auto& flag : order) {
      const auto& v = values.at(flag);
      if (!v) continue;
      const std::string& key = keys.at(flag);
      harness::Axis axis{key, harness::parse_grid(*v)};
      auto it = std::find_if(config.sweep.begin(), config.sweep.end(),
                             [&](const harness::Axis& a) { return a.name == key; });
      if (it != config.sweep.end()) {
        *it = std::move(axis);
      } else {
        config.sweep.push_back(std::move(axis));
      }
      config.params.erase(key);
    }
  }
};

ExperimentConfig make_config(Model model, const Common& c) {
  ExperimentConfig config;
  config.model = model;
  if (!c.config.empty()) {
    config = ExperimentConfig::from_file(c.config);
    if (config.model != model) {
      throw harness::ConfigError("config.model", std::string("file is for model ") +
                                                     harness::model_name(config.model) + ", command is " +
                                                     harness::model_name(model));
    }
  }
  config.seed = harness::resolve_seed(c.seed, config.seed);
  if (!c.out.empty()) config.out_dir = c.out;
  if (c.preset) config.preset = *c.preset;
  if (c.parallel) config.parallel = *c.parallel;
  if (c.reps) config.replications = *c.reps;
  return config;
}

int finish(const harness::ExperimentResult& result, const Table& show, std::ostream& out,
           std::ostream& err) {
  show.write_csv(out);
  if (!result.ok()) {
    err << "some cells failed:\n";
    result.errors.write_csv(err);
    return 1;
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulations of end-of-horizon flexibility: balls into bins, opaque selling, parcel delivery",
               "endgame"};
  app.require_subcommand(1);

  // bins ------------------------------------------------------------------
  CLI::App* bins = app.add_subcommand("bins", "balls-into-bins gap experiments");
  bins->require_subcommand(1);
  CLI::App* bins_run = bins->add_subcommand("run", "one replication, one RunRecord row on stdout");
  CLI::App* bins_sweep = bins->add_subcommand("sweep", "policy x grid x replications");
  Common bins_run_c, bins_sweep_c;
  add_common(bins_run, bins_run_c, false);
  add_common(bins_sweep, bins_sweep_c, true);
  std::string bins_policy = "dynamic";
  std::size_t bins_record = 0;
  bins_run->add_option("--policy", bins_policy, "no_flex|always_flex|static|dynamic|dynamic_latched|flex_sqrt_t");
  bins_run->add_option("--replication", bins_record, "replication index to run (0-based)");
  ParamFlags bins_run_p, bins_sweep_p;
  for (auto [p, app_ptr] : {std::pair{&bins_run_p, bins_run}, std::pair{&bins_sweep_p, bins_sweep}}) {
    p->add(app_ptr, "a-s", "a_s", "static constant override");
    p->add(app_ptr, "a-d", "a_d", "dynamic constant override");
  }
  for (auto [flag, key, help] : {std::tuple{"T", "T", "horizon"}, std::tuple{"N", "N", "bins"},
                                 std::tuple{"q", "q", "flex probability"}, std::tuple{"r", "r", "flex set size"}}) {
    bins_run_p.add(bins_run, flag, key, help);
  }
  GridFlags bins_grid;
  for (auto [flag, help] : {std::pair{"T", "horizons"}, std::pair{"N", "bin counts"},
                            std::pair{"q", "flex probabilities"}, std::pair{"r", "flex set sizes"}}) {
    bins_grid.add(bins_sweep, flag, flag, help);
  }
  std::vector<std::string> bins_policies;
  bins_sweep->add_option("--policies", bins_policies, "policy names")->delimiter(',');
  bins_sweep->add_option("--reps", bins_sweep_c.reps, "replications per cell (default 1000)");

  // opaque ----------------------------------------------------------------
  CLI::App* opaque = app.add_subcommand("opaque", "opaque selling with joint replenishment");
  opaque->require_subcommand(1);
  CLI::App* opaque_run = opaque->add_subcommand("run", "cost estimate for one policy and one S");
  CLI::App* opaque_sweep = opaque->add_subcommand("sweep", "loss and cycle statistics over an S grid");
  Common opaque_run_c, opaque_sweep_c;
  add_common(opaque_run, opaque_run_c, false);
  add_common(opaque_sweep, opaque_sweep_c, true);
  std::string opaque_policy = "dynamic";
  opaque_run->add_option("--policy", opaque_policy, "no_flex|always_flex|static|dynamic|flex_sqrt_t");
  ParamFlags opaque_run_p, opaque_sweep_p;
  for (auto [flag, key, help] :
       {std::tuple{"N", "N", "products"}, std::tuple{"S", "S", "initial stock"},
        std::tuple{"q", "q", "opaque-eligible share"}, std::tuple{"r", "r", "offer size"},
        std::tuple{"K", "K", "ordering cost"}, std::tuple{"holding", "h", "holding cost"},
        std::tuple{"delta", "delta", "discount"}, std::tuple{"cycles", "cycles", "cycles per instance"}}) {
    opaque_run_p.add(opaque_run, flag, key, help);
  }
  for (auto [flag, key, help] : {std::tuple{"N", "N", "products"}, std::tuple{"q", "q", "opaque-eligible share"},
                                 std::tuple{"cycles", "cycles", "cycles per instance (default 10)"},
                                 std::tuple{"K", "K", "ordering cost"}, std::tuple{"holding", "h", "holding cost"},
                                 std::tuple{"delta", "delta", "discount"}}) {
    opaque_sweep_p.add(opaque_sweep, flag, key, help);
  }
  opaque_run->add_option("--instances", opaque_run_c.reps, "instances (default 10)");
  std::string opaque_run_regime, opaque_sweep_regime;
  opaque_run->add_option("--regime", opaque_run_regime, "delta_zero|delta_inv_sqrt|delta_const|delta_sqrt");
  opaque_sweep->add_option("--regime", opaque_sweep_regime, "delta_zero|delta_inv_sqrt|delta_const|delta_sqrt");
  GridFlags opaque_grid;
  opaque_grid.add(opaque_sweep, "S", "S", "stock levels");
  std::vector<std::string> opaque_policies;
  opaque_sweep->add_option("--policies", opaque_policies, "policy names")->delimiter(',');
  opaque_sweep->add_option("--instances", opaque_sweep_c.reps, "instances per cell (default 10)");

  // parcel ----------------------------------------------------------------
  CLI::App* parcel = app.add_subcommand("parcel", "package-to-truck assignment with routing");
  parcel->require_subcommand(1);
  CLI::App* gen = parcel->add_subcommand("gen-corpus", "generate and zone a synthetic package pool");
  CLI::App* cluster = parcel->add_subcommand("cluster", "re-zone a corpus (k-means + balanced flow)");
  CLI::App* tables_cmd = parcel->add_subcommand("estimate-tables", "INC/SER tables from no-flex days");
  CLI::App* parcel_run = parcel->add_subcommand("run", "one day, per-truck rows on stdout");
  CLI::App* parcel_sweep = parcel->add_subcommand("sweep", "policies x grid x replications");
  Common gen_c, cluster_c, tables_c, parcel_run_c, parcel_sweep_c;
  add_common(gen, gen_c, false);
  add_common(cluster, cluster_c, false);
  add_common(tables_cmd, tables_c, false);
  add_common(parcel_run, parcel_run_c, false);
  add_common(parcel_sweep, parcel_sweep_c, true);
  std::size_t zones = 24, pool = 20000;
  std::string generator;
  std::optional<double> gen_epsilon;
  gen->add_option("--zones", zones, "zones / trucks N");
  gen->add_option("--pool", pool, "pool size L");
  gen->add_option("--generator", generator, "generator overrides, key=value;key=value");
  gen->add_option("--epsilon", gen_epsilon, "balance window (default 200)");
  std::string corpus_in, tables_in;
  double epsilon = 200.0;
  cluster->add_option("--corpus", corpus_in, "input corpus")->required()->check(CLI::ExistingFile);
  cluster->add_option("--epsilon", epsilon, "balance window");
  tables_cmd->add_option("--corpus", corpus_in, "corpus file")->required()->check(CLI::ExistingFile);
  std::size_t table_reps = 50;
  tables_cmd->add_option("--reps", table_reps, "no-flex replications");
  std::string parcel_policy = "no_flex";
  parcel_run->add_option("--corpus", corpus_in, "corpus file")->required()->check(CLI::ExistingFile);
  parcel_run->add_option("--tables", tables_in, "flex tables (patient_dynamic, cost_min)");
  parcel_run->add_option("--policy", parcel_policy,
                         "no_flex|unloading_only|routing_dynamic|patient_dynamic|cost_min");
  std::string sweep_corpus, sweep_tables;
  parcel_sweep->add_option("--corpus", sweep_corpus, "corpus file")->check(CLI::ExistingFile);
  parcel_sweep->add_option("--tables", sweep_tables, "flex tables file")->check(CLI::ExistingFile);
  std::vector<std::string> parcel_policies;
  parcel_sweep->add_option("--policies", parcel_policies, "policy names")->delimiter(',');
  parcel_sweep->add_option("--reps", parcel_sweep_c.reps, "replications per cell (default 50)");
  ParamFlags tables_p, parcel_run_p, parcel_sweep_p;
  for (auto [p, a] : {std::pair{&tables_p, tables_cmd}, std::pair{&parcel_run_p, parcel_run},
                      std::pair{&parcel_sweep_p, parcel_sweep}}) {
    p->add(a, "T", "T", "packages per day");
    p->add(a, "speed", "speed", "km per hour");
    p->add(a, "flex-km", "flex_km", "flex-set slack in km");
    p->add(a, "M1", "M1", "re-solve cadence");
    if (a != tables_cmd) {
      p->add(a, "M2", "M2", "projection divisor");
      p->add(a, "radius-km", "radius_km", "unloading-only flex radius");
      p->add(a, "a-d", "a_d", "dynamic constant for unloading_only / routing_dynamic");
    }
  }
  for (auto [flag, key, help] : {std::tuple{"c-r", "c_r", "travel $/h"}, std::tuple{"c-o", "c_o", "overtime $/h"},
                                 std::tuple{"h-max", "h_max", "overtime threshold h"}}) {
    parcel_run_p.add(parcel_run, flag, key, help);
  }
  GridFlags parcel_grid;
  for (auto [flag, key, help] : {std::tuple{"h-max", "h_max", "overtime thresholds"},
                                 std::tuple{"c-r", "c_r", "travel costs"}, std::tuple{"c-o", "c_o", "overtime costs"}}) {
    parcel_grid.add(parcel_sweep, flag, key, help);
  }

  // report ----------------------------------------------------------------
  CLI::App* report = app.add_subcommand("report", "plot data + gnuplot script from a results directory");
  std::string report_in, report_out, figure;
  report->add_option("--in", report_in, "results directory (summary.csv / routes.csv)")->required();
  report->add_option("--figure", figure, "figure name")->required();
  report->add_option("--out", report_out, "output directory (default: <in>/plots)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    err << "\n" << app.help();
    return 2;
  }

  try {
    if (*bins_run) {
      ExperimentConfig config = make_config(Model::Bins, bins_run_c);
      bins_run_p.apply(config);
      config.policies = {bins_policy};
      config.replications = bins_record + 1;
      auto result = harness::run_experiment(config);
      Table one = result.raw;
      if (!one.rows.empty()) one.rows.erase(one.rows.begin(), one.rows.end() - 1);
      return finish(result, one, out, err);
    }
    if (*bins_sweep) {
      ExperimentConfig config = make_config(Model::Bins, bins_sweep_c);
      bins_sweep_p.apply(config);
      bins_grid.apply(config);
      if (!bins_policies.empty()) config.policies = bins_policies;
      auto result = harness::run_experiment(config);
      return finish(result, result.summary, out, err);
    }
    if (*opaque_run) {
      ExperimentConfig config = make_config(Model::Opaque, opaque_run_c);
      opaque_run_p.apply(config);
      config.regime = opaque_run_regime;
      config.policies = {opaque_policy};
      auto result = harness::run_experiment(config);
      return finish(result, result.summary, out, err);
    }
    if (*opaque_sweep) {
      ExperimentConfig config = make_config(Model::Opaque, opaque_sweep_c);
      opaque_sweep_p.apply(config);
      opaque_grid.apply(config);
      if (!opaque_sweep_regime.empty()) config.regime = opaque_sweep_regime;
      if (!opaque_policies.empty()) config.policies = opaque_policies;
      auto result = harness::run_experiment(config);
      return finish(result, result.summary, out, err);
    }
    if (*gen) {
      parcel::GeneratorSpec spec = generator.empty() ? parcel::GeneratorSpec{} : parcel::GeneratorSpec::parse(generator);
      if (gen_epsilon) spec.balance_epsilon = *gen_epsilon;
      const std::uint64_t seed = harness::resolve_seed(gen_c.seed, 1);
      const parcel::Corpus corpus = parcel::build_corpus(seed, zones, pool, spec);
      const parcel::PoolStats stats = parcel::pool_stats(corpus);
      if (gen_c.out.empty()) {
        parcel::write_corpus(out, corpus);
      } else {
        parcel::save_corpus(gen_c.out, corpus);
        out << "wrote " << gen_c.out << ": " << corpus.packages.size() << " packages, " << corpus.zones
            << " zones, mean unload " << stats.mean_unload << " h\n";
      }
      return 0;
    }
    if (*cluster) {
      parcel::Corpus corpus = parcel::load_corpus(corpus_in);
      parcel::rezone(corpus, epsilon, harness::resolve_seed(cluster_c.seed, corpus.seed));
      corpus.generator.balance_epsilon = epsilon;
      const parcel::PoolStats stats = parcel::pool_stats(corpus);
      Table counts;
      counts.columns = {"schema_version", "zone", "center_x", "center_y", "packages"};
      for (std::size_t z = 0; z < corpus.zones; ++z) {
        counts.add_row({std::to_string(kSchemaVersion), std::to_string(z), format_number(corpus.centers[z].x()),
                        format_number(corpus.centers[z].y()), std::to_string(stats.zone_counts[z])});
      }
      counts.write_csv(out);
      if (!cluster_c.out.empty()) parcel::save_corpus(cluster_c.out, corpus);
      return 0;
    }
    if (*tables_cmd) {
      const parcel::Corpus corpus = parcel::load_corpus(corpus_in);
      ExperimentConfig config = make_config(Model::Parcel, tables_c);
      tables_p.apply(config);
      parcel::ParcelParams params;
      params.trucks = corpus.zones;
      params.packages_per_day = static_cast<std::int64_t>(config.params.count("T") ? config.params["T"] : 2000);
      if (config.params.count("speed")) params.speed_kmh = config.params["speed"];
      if (config.params.count("flex_km")) params.flex_km = config.params["flex_km"];
      if (config.params.count("M1")) params.resolve_every = static_cast<std::int64_t>(config.params["M1"]);
      const auto tables = parcel::estimate_flex_tables(corpus, params, table_reps,
                                                       derive_seed(config.seed, "flex-tables", 0), config.parallel);
      if (tables_c.out.empty()) {
        parcel::write_flex_tables(out, tables);
      } else {
        parcel::save_flex_tables(tables_c.out, tables);
        out << "wrote " << tables_c.out << " from " << table_reps << " no-flex days\n";
      }
      return 0;
    }
    if (*parcel_run) {
      const parcel::DayPolicy policy = parcel::parse_day_policy(parcel_policy);
      if (parcel::needs_tables(policy) && tables_in.empty()) {
        err << "policy " << parcel_policy << " needs flex tables. Run\n"
            << "  endgame parcel estimate-tables --corpus " << corpus_in << " --out tables.txt\n"
            << "and pass --tables tables.txt\n";
        return 1;
      }
      ExperimentConfig config = make_config(Model::Parcel, parcel_run_c);
      parcel_run_p.apply(config);
      config.corpus_path = corpus_in;
      config.tables_path = tables_in;
      config.policies = {parcel_policy};
      config.replications = 1;
      auto result = harness::run_experiment(config);
      result.routes.write_csv(out);
      return finish(result, result.raw, out, err);
    }
    if (*parcel_sweep) {
      ExperimentConfig config = make_config(Model::Parcel, parcel_sweep_c);
      parcel_sweep_p.apply(config);
      parcel_grid.apply(config);
      if (!sweep_corpus.empty()) config.corpus_path = sweep_corpus;
      if (!sweep_tables.empty()) config.tables_path = sweep_tables;
      if (!parcel_policies.empty()) config.policies = parcel_policies;
      auto result = harness::run_experiment(config);
      return finish(result, result.summary, out, err);
    }
    if (*report) {
      const plot::FigureSpec spec = plot::figure_spec(figure);
      namespace fs = std::filesystem;
      const std::string file = spec.kind == plot::FigureKind::Histogram ? "routes.csv" : "summary.csv";
      const Table table = load_table((fs::path(report_in) / file).string());
      const std::string dir = report_out.empty() ? (fs::path(report_in) / "plots").string() : report_out;
      const plot::Emitted emitted = plot::emit_plot_data(table, spec, dir);
      for (const auto& f : emitted.data_files) out << f << "\n";
      out << emitted.script << "\n";
      return 0;
    }
  } catch (const harness::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace endgame
