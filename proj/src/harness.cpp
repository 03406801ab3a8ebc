#include "endgame/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "endgame/balls_bins.hpp"
#include "endgame/opaque_selling.hpp"
#include "endgame/parallel.hpp"
#include "endgame/parcel_delivery.hpp"
#include "endgame/random.hpp"
#include "endgame/stats.hpp"

namespace endgame::harness {

namespace {

using Row = std::vector<std::string>;
using Json = nlohmann::ordered_json;

const std::set<std::string> kIntegerParams{"T", "N", "r", "S", "M1", "cycles", "zones", "pool",
                                           "table_reps", "corpus_seed"};

std::string num(double v) { return format_number(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

// One point of the sweep grid.
using Cell = std::vector<std::pair<std::string, double>>;

std::vector<Cell> expand(const std::vector<Axis>& axes) {
  std::vector<Cell> cells{{}};
  for (const Axis& axis : axes) {
    std::vector<Cell> next;
    for (const Cell& c : cells) {
      for (double v : axis.values) {
        Cell d = c;
        d.emplace_back(axis.name, v);
        next.push_back(std::move(d));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

std::map<std::string, double> merged(const ExperimentConfig& config, const Cell& cell) {
  std::map<std::string, double> p = config.params;
  for (const auto& [k, v] : cell) p[k] = v;
  return p;
}

double get(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::vector<std::string> axis_names(const ExperimentConfig& config) {
  std::vector<std::string> out;
  for (const Axis& a : config.sweep) out.push_back(a.name);
  return out;
}

Row cell_values(const Cell& cell) {
  Row out;
  for (const auto& [_, v] : cell) out.push_back(num(v));
  return out;
}

Row concat(Row a, const Row& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

opaque::Preset preset_of(const std::string& name) {
  return name == "theory" ? opaque::Preset::Theory : opaque::Preset::Numerics;
}

// Bins ----------------------------------------------------------------------

bins::ModelParams bins_params(const std::map<std::string, double>& p) {
  bins::ModelParams m;
  m.horizon = static_cast<bins::Period>(get(p, "T", 10000));
  m.bins = static_cast<std::size_t>(get(p, "N", 5));
  m.flex_prob = get(p, "q", 0.1);
  m.flex_set_size = static_cast<std::size_t>(get(p, "r", 2));
  return m;
}

bins::PolicySpec bins_policy(const std::string& name, const bins::ModelParams& m,
                             const std::map<std::string, double>& p, const std::string& preset) {
  const bool theory = preset == "theory";
  const double a_s = get(p, "a_s", theory ? bins::theory_static_constant(m) : bins::kNumericsStaticConstant);
  const double a_d = get(p, "a_d", theory ? bins::theory_dynamic_constant(m) : bins::kNumericsDynamicConstant);
  if (name == "no_flex") return bins::NoFlex{};
  if (name == "always_flex") return bins::AlwaysFlex{};
  if (name == "static") return bins::Static{a_s};
  if (name == "dynamic") return bins::Dynamic{a_d, false};
  if (name == "dynamic_latched") return bins::Dynamic{a_d, true};
  if (name == "flex_sqrt_t") return bins::FlexSqrtT{a_s};
  throw ConfigError("config.policies", "unknown bins policy '" + name + "'");
}

std::string bins_coordinates(const bins::ModelParams& m) {
  return "bins;T=" + num(m.horizon) + ";N=" + num(m.bins) + ";q=" + num(m.flex_prob) +
         ";r=" + num(m.flex_set_size);
}

// Opaque --------------------------------------------------------------------

opaque::InventoryParams opaque_params(const ExperimentConfig& config,
                                      const std::map<std::string, double>& p) {
  opaque::InventoryParams base;
  base.products = static_cast<std::size_t>(get(p, "N", 5));
  base.stock = static_cast<std::int64_t>(get(p, "S", 100));
  base.flex_prob = get(p, "q", 0.1);
  base.flex_set_size = static_cast<std::size_t>(get(p, "r", 2));
  base.order_cost = get(p, "K", 1.0);
  base.holding_cost = get(p, "h", 1.0);
  base.discount = get(p, "delta", 0.0);
  if (config.regime.empty()) return base;
  return opaque::regime_params(opaque::parse_regime(config.regime), base.stock, base);
}

bins::PolicySpec opaque_policy(const std::string& name, const opaque::InventoryParams& params,
                               const std::map<std::string, double>& p, const std::string& preset) {
  const opaque::Preset pr = preset_of(preset);
  const double a_s = get(p, "a_s", opaque::static_constant(params, pr));
  const double a_d = get(p, "a_d", opaque::dynamic_constant(params, pr));
  if (name == "no_flex") return bins::NoFlex{};
  if (name == "always_flex") return bins::AlwaysFlex{};
  if (name == "static") return bins::Static{a_s};
  if (name == "dynamic") return bins::Dynamic{a_d, true};
  if (name == "flex_sqrt_t") return bins::FlexSqrtT{a_s};
  throw ConfigError("config.policies", "unknown opaque policy '" + name + "'");
}

// Parcel --------------------------------------------------------------------

parcel::ParcelParams parcel_params(const std::map<std::string, double>& p) {
  parcel::ParcelParams out;
  out.cost.travel_cost = get(p, "c_r", out.cost.travel_cost);
  out.cost.overtime_cost = get(p, "c_o", out.cost.overtime_cost);
  out.cost.overtime_threshold_h = get(p, "h_max", out.cost.overtime_threshold_h);
  out.trucks = static_cast<std::size_t>(get(p, "zones", 24));
  out.packages_per_day = static_cast<std::int64_t>(get(p, "T", 2000));
  out.speed_kmh = get(p, "speed", out.speed_kmh);
  out.flex_km = get(p, "flex_km", out.flex_km);
  out.oblivious_radius_km = get(p, "radius_km", out.oblivious_radius_km);
  out.resolve_every = static_cast<std::int64_t>(get(p, "M1", 100));
  out.projection_divisor = get(p, "M2", out.projection_divisor);
  return out;
}

parcel::DayPolicy parcel_policy(const std::string& name, const parcel::ParcelParams& params,
                                const std::map<std::string, double>& p) {
  parcel::DayPolicy policy = parcel::parse_day_policy(name);
  if (auto* u = std::get_if<parcel::UnloadingOnly>(&policy)) {
    u->a_d = get(p, "a_d", u->a_d);
    u->radius_km = params.oblivious_radius_km;
  } else if (auto* r = std::get_if<parcel::RoutingDynamic>(&policy)) {
    r->a_d = get(p, "a_d", r->a_d);
  }
  return policy;
}

// Simulation coordinates exclude costs, so cost sweeps replay the same days.
std::string parcel_coordinates(const parcel::ParcelParams& p) {
  return "parcel;T=" + num(p.packages_per_day) + ";speed=" + num(p.speed_kmh) +
         ";flex_km=" + num(p.flex_km) + ";M1=" + num(p.resolve_every) +
         ";M2=" + num(p.projection_divisor);
}

std::string cost_coordinates(const parcel::CostParams& c) {
  return ";c_r=" + num(c.travel_cost) + ";c_o=" + num(c.overtime_cost) +
         ";h_max=" + num(c.overtime_threshold_h);
}

std::string sim_coordinates(const std::string& policy, const parcel::ParcelParams& p,
                            const std::map<std::string, double>& values) {
  std::string key = policy + "|" + parcel_coordinates(p) + ";radius=" + num(p.oblivious_radius_km) +
                    ";a_d=" + num(get(values, "a_d", 0.7));
  if (policy == "cost_min") key += cost_coordinates(p.cost);
  return key;
}

double mad_of(const std::vector<double>& v) { return stats::summarize(v).mad; }

void append_error(ExperimentResult& result, Model model, const std::string& policy,
                  const std::string& cell, const std::string& what) {
  result.errors.add_row({std::to_string(kSchemaVersion), model_name(model), policy, cell, what});
}

std::string describe_cell(const Cell& cell) {
  std::string out;
  for (const auto& [k, v] : cell) out += (out.empty() ? "" : ";") + k + "=" + num(v);
  return out.empty() ? "-" : out;
}

std::vector<std::string> bins_metrics() { return {"final_gap", "flex_count", "flex_arrivals"}; }
std::vector<std::string> opaque_metrics() {
  return {"cost", "loss", "mean_length", "balancedness", "discounts"};
}
std::vector<std::string> parcel_metrics() {
  return {"total_cost", "travel_cost", "overtime_cost", "travel_h", "unload_h", "total_h",
          "unload_mad", "total_mad", "overtime_h", "overtime_share", "flex_count"};
}

void run_bins(const ExperimentConfig& config, ExperimentResult& result) {
  const auto axes = axis_names(config);
  result.raw.columns = concat({"schema_version", "model", "policy"}, axes);
  for (const char* c : {"replication", "seed", "final_gap", "flex_count", "flex_arrivals", "first_trigger"})
    result.raw.columns.emplace_back(c);

  const auto cells = expand(config.sweep);
  const auto& policies = config.policies;
  const std::size_t reps = config.replication_count();
  const std::size_t jobs = cells.size() * policies.size() * reps;
  std::vector<Row> rows(jobs);
  std::vector<std::string> failures(jobs);

  parallel_for(jobs, config.parallel, [&](std::size_t job) {
    const std::size_t rep = job % reps;
    const std::size_t pol = (job / reps) % policies.size();
    const Cell& cell = cells[job / reps / policies.size()];
    try {
      const auto values = merged(config, cell);
      const bins::ModelParams m = bins_params(values);
      const bins::PolicySpec policy = bins_policy(policies[pol], m, values, config.preset);
      const std::uint64_t seed = derive_seed(config.seed, bins_coordinates(m), rep);
      const bins::RunRecord rec = bins::run(policy, m, seed);
      rows[job] = concat({std::to_string(kSchemaVersion), "bins", policies[pol]}, cell_values(cell));
      for (std::string v : {num(rep), std::to_string(seed), num(rec.final_gap), num(rec.flex_count),
                            num(rec.flex_arrivals),
                            rec.first_trigger ? num(*rec.first_trigger) : std::string()})
        rows[job].push_back(std::move(v));
    } catch (const std::exception& e) {
      failures[job] = e.what();
    }
  });
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::size_t pol = (job / reps) % policies.size();
    if (!failures[job].empty()) {
      if (job % reps == 0 || failures[job - 1].empty())
        append_error(result, Model::Bins, policies[pol], describe_cell(cells[job / reps / policies.size()]),
                     failures[job]);
      continue;
    }
    result.raw.add_row(std::move(rows[job]));
  }
  result.summary = summarize_table(result.raw, concat({"model", "policy"}, axes), bins_metrics());
}

void run_opaque(const ExperimentConfig& config, ExperimentResult& result) {
  const auto axes = axis_names(config);
  result.raw.columns = concat({"schema_version", "model", "regime", "policy"}, axes);
  for (const char* c : {"instance", "cycles", "lower_bound", "cost", "loss", "se_cost", "mean_length",
                        "balancedness", "discounts"})
    result.raw.columns.emplace_back(c);
  const std::string regime = config.regime.empty() ? "explicit" : config.regime;

  opaque::SweepOptions options;
  options.instances = config.replication_count();
  options.seed = config.seed;
  options.preset = preset_of(config.preset);
  options.parallel = config.parallel;

  for (const Cell& cell : expand(config.sweep)) {
    const auto values = merged(config, cell);
    options.cycles_per_instance = static_cast<std::size_t>(get(values, "cycles", 10));
    for (const std::string& name : config.policies) {
      try {
        const opaque::InventoryParams params = opaque_params(config, values);
        params.validate();
        const bins::PolicySpec policy = opaque_policy(name, params, values, config.preset);
        const auto instances = opaque::simulate_cell(policy, params, options);
        const double c_star = opaque::lower_bound(params);
        const double total_stock = static_cast<double>(params.products) * static_cast<double>(params.stock);
        for (std::size_t i = 0; i < instances.size(); ++i) {
          const opaque::CostEstimate est = opaque::long_run_cost(instances[i], params);
          Row row = concat({std::to_string(kSchemaVersion), "opaque", regime, name}, cell_values(cell));
          for (std::string v : {num(i), num(est.cycles), num(c_star), num(est.total), num(est.total - c_star),
                                num(est.se_total), num(est.mean_length), num(total_stock - est.mean_length),
                                num(est.mean_discounts)})
            row.push_back(std::move(v));
          result.raw.add_row(std::move(row));
        }
      } catch (const std::exception& e) {
        append_error(result, Model::Opaque, name, describe_cell(cell), e.what());
      }
    }
  }
  result.summary =
      summarize_table(result.raw, concat({"model", "regime", "policy"}, axes), opaque_metrics());
}

void run_parcel(const ExperimentConfig& config, const ParcelInputs& inputs, ExperimentResult& result) {
  const auto axes = axis_names(config);
  result.raw.columns = concat({"schema_version", "model", "policy"}, axes);
  for (const char* c : {"replication", "seed"}) result.raw.columns.emplace_back(c);
  for (const auto& m : parcel_metrics()) result.raw.columns.push_back(m);
  result.routes.columns = concat({"schema_version", "model", "policy"}, axes);
  for (const char* c : {"replication", "truck", "stops", "unload_h", "travel_h", "total_h"})
    result.routes.columns.emplace_back(c);

  const auto base_values = config.params;
  parcel::Corpus owned_corpus;
  const parcel::Corpus* corpus = inputs.corpus;
  if (corpus == nullptr) {
    if (!config.corpus_path.empty()) {
      owned_corpus = parcel::load_corpus(config.corpus_path);
    } else {
      owned_corpus = parcel::build_corpus(
          static_cast<std::uint64_t>(get(base_values, "corpus_seed", static_cast<double>(config.seed))),
          static_cast<std::size_t>(get(base_values, "zones", 24)),
          static_cast<std::size_t>(get(base_values, "pool", 20000)));
    }
    corpus = &owned_corpus;
  }
  std::map<std::string, double> with_zones = base_values;
  with_zones["zones"] = static_cast<double>(corpus->zones);

  const bool tables_needed = std::any_of(config.policies.begin(), config.policies.end(), [](const auto& n) {
    return parcel::needs_tables(parcel::parse_day_policy(n));
  });
  parcel::FlexTables owned_tables;
  const parcel::FlexTables* tables = inputs.tables;
  if (tables == nullptr && tables_needed) {
    if (!config.tables_path.empty()) {
      owned_tables = parcel::load_flex_tables(config.tables_path);
    } else {
      owned_tables = parcel::estimate_flex_tables(
          *corpus, parcel_params(with_zones), static_cast<std::size_t>(get(base_values, "table_reps", 50)),
          derive_seed(config.seed, "flex-tables", 0), config.parallel);
    }
    tables = &owned_tables;
  }

  // Unique simulations; cost-only differences reuse the same day.
  struct Output {
    Row cell_prefix;
    std::size_t sim = 0;
    parcel::CostParams cost;
    std::uint64_t seed = 0;
    std::size_t rep = 0;
    std::string policy;
    std::string cell;
  };
  struct Sim {
    parcel::DayPolicy policy;
    parcel::ParcelParams params;
    std::uint64_t seed = 0;
  };
  std::vector<Output> outputs;
  std::vector<Sim> sims;
  std::map<std::string, std::size_t> sim_index;
  const std::size_t reps = config.replication_count();
  for (const Cell& cell : expand(config.sweep)) {
    auto values = merged(config, cell);
    values["zones"] = static_cast<double>(corpus->zones);
    const parcel::ParcelParams params = parcel_params(values);
    for (const std::string& name : config.policies) {
      const parcel::DayPolicy policy = parcel_policy(name, params, values);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const std::uint64_t seed = derive_seed(config.seed, parcel_coordinates(params), rep);
        const std::string key = sim_coordinates(name, params, values) + "#" + num(rep);
        auto [it, inserted] = sim_index.emplace(key, sims.size());
        if (inserted) sims.push_back({policy, params, seed});
        outputs.push_back({concat({std::to_string(kSchemaVersion), "parcel", name}, cell_values(cell)),
                           it->second, params.cost, seed, rep, name, describe_cell(cell)});
      }
    }
  }

  std::vector<parcel::DayRecord> records(sims.size());
  std::vector<std::string> failures(sims.size());
  parallel_for(sims.size(), config.parallel, [&](std::size_t i) {
    try {
      records[i] = parcel::run_day(sims[i].policy, *corpus, sims[i].params, tables, sims[i].seed);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  std::set<std::pair<std::string, std::string>> reported;
  for (const Output& out : outputs) {
    if (!failures[out.sim].empty()) {
      if (reported.emplace(out.policy, out.cell).second)
        append_error(result, Model::Parcel, out.policy, out.cell, failures[out.sim]);
      continue;
    }
    const parcel::DayRecord& rec = records[out.sim];
    const parcel::DayCost cost = parcel::day_cost(rec, out.cost);
    std::vector<double> unload, travel, total;
    for (std::size_t t = 0; t < rec.trucks.size(); ++t) {
      const auto& truck = rec.trucks[t];
      unload.push_back(truck.unload_h);
      travel.push_back(truck.travel_exact_h);
      total.push_back(truck.unload_h + truck.travel_exact_h);
      result.routes.add_row(concat(out.cell_prefix, {num(out.rep), num(t), num(truck.stops.size()),
                                                     num(unload.back()), num(travel.back()),
                                                     num(total.back())}));
    }
    const auto n = static_cast<double>(rec.trucks.size());
    const auto mean = [n](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / n;
    };
    Row row = concat(out.cell_prefix, {num(out.rep), std::to_string(out.seed)});
    for (double v : {cost.total, cost.travel, cost.overtime, mean(travel), mean(unload), mean(total),
                     mad_of(unload), mad_of(total), cost.overtime_hours / n,
                     static_cast<double>(cost.routes_over) / n, static_cast<double>(rec.flex_count)})
      row.push_back(num(v));
    result.raw.add_row(std::move(row));
  }
  result.summary = summarize_table(result.raw, concat({"model", "policy"}, axes), parcel_metrics());
}

}  // namespace

Model parse_model(const std::string& name) {
  if (name == "bins") return Model::Bins;
  if (name == "opaque") return Model::Opaque;
  if (name == "parcel") return Model::Parcel;
  throw ConfigError("config.model", "unknown model '" + name + "' (bins, opaque, parcel)");
}

const char* model_name(Model model) {
  switch (model) {
    case Model::Bins: return "bins";
    case Model::Opaque: return "opaque";
    case Model::Parcel: return "parcel";
  }
  return "?";
}

std::vector<std::string> model_parameters(Model model) {
  switch (model) {
    case Model::Bins: return {"T", "N", "q", "r", "a_s", "a_d"};
    case Model::Opaque: return {"N", "S", "q", "r", "K", "h", "delta", "cycles", "a_s", "a_d"};
    case Model::Parcel:
      return {"T", "c_r", "c_o", "h_max", "speed", "flex_km", "radius_km", "M1", "M2", "a_d",
              "zones", "pool", "corpus_seed", "table_reps"};
  }
  return {};
}

std::vector<std::string> standard_policies(Model model) {
  switch (model) {
    case Model::Bins:
    case Model::Opaque: return {"no_flex", "always_flex", "static", "dynamic", "flex_sqrt_t"};
    case Model::Parcel:
      return {"no_flex", "unloading_only", "routing_dynamic", "patient_dynamic", "cost_min"};
  }
  return {};
}

std::size_t default_replications(Model model) {
  switch (model) {
    case Model::Bins: return 1000;
    case Model::Opaque: return 10;
    case Model::Parcel: return 50;
  }
  return 1;
}

std::size_t ExperimentConfig::replication_count() const {
  return replications.value_or(default_replications(model));
}

std::vector<double> parse_grid(const std::string& text) {
  const auto bad = [&](const std::string& why) {
    return std::invalid_argument("grid '" + text + "': " + why);
  };
  std::vector<double> out;
  if (text.find(':') == std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw bad("bad number '" + item + "'");
    }
    if (out.empty()) throw bad("no values");
    return out;
  }
  std::stringstream ss(text);
  std::string lo_s, hi_s, spec;
  std::getline(ss, lo_s, ':');
  std::getline(ss, hi_s, ':');
  std::getline(ss, spec);
  const double lo = std::stod(lo_s), hi = std::stod(hi_s);
  const bool log = spec.rfind("log", 0) == 0;
  const int k = std::stoi(log ? spec.substr(3) : spec);
  if (k < 1) throw bad("point count must be >= 1");
  if (log && !(lo > 0 && hi > 0)) throw bad("log grids need positive ends");
  const double step = k == 1 ? 0.0 : (hi - lo) / (k - 1);
  const bool integral = lo == std::floor(lo) && hi == std::floor(hi) && (log || step == std::floor(step));
  for (int i = 0; i < k; ++i) {
    const double f = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
    double v = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    if (integral) v = std::round(v);
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto known = model_parameters(model);
  const auto check_param = [&](const std::string& path, const std::string& name, double v) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError(path, std::string("unknown parameter for model ") + model_name(model));
    }
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    if (kIntegerParams.count(name) && (v != std::floor(v) || v < 0)) {
      throw ConfigError(path, "must be a nonnegative integer");
    }
  };
  for (const auto& [k, v] : params) check_param("config.params." + k, k, v);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const std::string path = "config.sweep." + sweep[i].name;
    if (sweep[i].values.empty()) throw ConfigError(path, "empty grid");
    for (double v : sweep[i].values) check_param(path, sweep[i].name, v);
    for (std::size_t j = 0; j < i; ++j)
      if (sweep[j].name == sweep[i].name) throw ConfigError(path, "axis listed twice");
  }
  if (replications && *replications < 1) throw ConfigError("config.replications", "must be >= 1");
  if (parallel < 1) throw ConfigError("config.parallel", "must be >= 1");
  if (preset != "theory" && preset != "numerics")
    throw ConfigError("config.preset", "must be 'theory' or 'numerics'");
  const auto allowed = standard_policies(model);
  std::vector<std::string> all = allowed;
  if (model == Model::Bins) all.emplace_back("dynamic_latched");
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (std::find(all.begin(), all.end(), policies[i]) == all.end())
      throw ConfigError("config.policies[" + std::to_string(i) + "]", "unknown policy '" + policies[i] + "'");
  }
  if (!regime.empty()) {
    if (model != Model::Opaque) throw ConfigError("config.regime", "only applies to the opaque model");
    try {
      opaque::parse_regime(regime);
    } catch (const std::exception& e) {
      throw ConfigError("config.regime", e.what());
    }
  }
  if ((!corpus_path.empty() || !tables_path.empty()) && model != Model::Parcel)
    throw ConfigError("config.corpus", "only applies to the parcel model");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  ExperimentConfig c;
  if (!j.contains("model")) throw ConfigError("config.model", "required");
  const auto str = [&](const std::string& key) {
    if (!j[key].is_string()) throw ConfigError("config." + key, "must be a string");
    return j[key].get<std::string>();
  };
  const auto uint = [&](const std::string& key) {
    if (!j[key].is_number_unsigned()) throw ConfigError("config." + key, "must be a nonnegative integer");
    return j[key].get<std::uint64_t>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "model") {
      c.model = parse_model(str(key));
    } else if (key == "policies") {
      if (!value.is_array()) throw ConfigError("config.policies", "must be an array of names");
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_string()) throw ConfigError("config.policies[" + std::to_string(i) + "]", "must be a string");
        c.policies.push_back(value[i].get<std::string>());
      }
    } else if (key == "params") {
      if (!value.is_object()) throw ConfigError("config.params", "must be an object");
      for (const auto& [name, v] : value.items()) {
        if (!v.is_number()) throw ConfigError("config.params." + name, "must be a number");
        c.params[name] = v.get<double>();
      }
    } else if (key == "sweep") {
      if (!value.is_object()) throw ConfigError("config.sweep", "must be an object of axes");
      for (const auto& [name, v] : value.items()) {
        Axis axis{name, {}};
        if (v.is_string()) {
          try {
            axis.values = parse_grid(v.get<std::string>());
          } catch (const std::exception& e) {
            throw ConfigError("config.sweep." + name, e.what());
          }
        } else if (v.is_array()) {
          for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError("config.sweep." + name, "values must be numbers");
            axis.values.push_back(x.get<double>());
          }
        } else {
          throw ConfigError("config.sweep." + name, "must be an array or a grid string");
        }
        c.sweep.push_back(std::move(axis));
      }
    } else if (key == "preset") {
      c.preset = str(key);
    } else if (key == "replications") {
      c.replications = static_cast<std::size_t>(uint(key));
    } else if (key == "seed") {
      c.seed = uint(key);
    } else if (key == "parallel") {
      c.parallel = static_cast<std::size_t>(uint(key));
    } else if (key == "out") {
      c.out_dir = str(key);
    } else if (key == "regime") {
      c.regime = str(key);
    } else if (key == "corpus") {
      c.corpus_path = str(key);
    } else if (key == "tables") {
      c.tables_path = str(key);
    } else {
      throw ConfigError("config." + key, "unknown field");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

Table summarize_table(const Table& raw, const std::vector<std::string>& cell_columns,
                      const std::vector<std::string>& metrics) {
  Table out;
  out.columns.emplace_back("schema_version");
  for (const auto& c : cell_columns) out.columns.push_back(c);
  for (const char* c : {"metric", "mean", "se", "mad", "q1", "median", "q3", "n"}) out.columns.emplace_back(c);

  std::vector<std::size_t> idx;
  for (const auto& c : cell_columns) idx.push_back(raw.column(c));
  std::vector<Row> order;
  std::map<Row, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    Row key;
    for (std::size_t i : idx) key.push_back(raw.rows[r][i]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r);
  }
  for (const Row& key : order) {
    for (const auto& metric : metrics) {
      const std::size_t mc = raw.column(metric);
      std::vector<double> values;
      for (std::size_t r : groups[key]) {
        if (!raw.rows[r][mc].empty()) values.push_back(std::stod(raw.rows[r][mc]));
      }
      if (values.empty()) continue;
      const stats::Summary s = stats::summarize(values);
      Row row{std::to_string(kSchemaVersion)};
      row.insert(row.end(), key.begin(), key.end());
      for (std::string v : {metric, num(s.mean), num(s.se), num(s.mad), num(s.q1), num(s.median),
                            num(s.q3), num(s.n)})
        row.push_back(std::move(v));
      out.add_row(std::move(row));
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& input, const ParcelInputs& inputs) {
  ExperimentConfig config = input;
  if (config.policies.empty()) config.policies = standard_policies(config.model);
  config.validate();
  ExperimentResult result;
  result.errors.columns = {"schema_version", "model", "policy", "cell", "message"};
  switch (config.model) {
    case Model::Bins: run_bins(config, result); break;
    case Model::Opaque: run_opaque(config, result); break;
    case Model::Parcel: run_parcel(config, inputs, result); break;
  }
  if (!config.out_dir.empty()) write_result(result, config.out_dir);
  return result;
}

void write_result(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  save_table((fs::path(out_dir) / "raw.csv").string(), result.raw);
  save_table((fs::path(out_dir) / "summary.csv").string(), result.summary);
  if (!result.routes.rows.empty()) save_table((fs::path(out_dir) / "routes.csv").string(), result.routes);
  if (!result.errors.rows.empty()) save_table((fs::path(out_dir) / "errors.csv").string(), result.errors);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ENDGAME_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::char_traits<char>::length(env)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("ENDGAME_SEED", std::string("not an unsigned integer: '") + env + "'");
  }
  return fallback;
}

}  // namespace endgame::harness
