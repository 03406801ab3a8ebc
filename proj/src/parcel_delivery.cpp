#include "endgame/parcel_delivery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "endgame/balls_bins.hpp"
#include "endgame/random.hpp"
#include "endgame/tsp.hpp"

namespace endgame::parcel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void resolve(TruckState& truck, const geo::Point& depot, double speed, DayRecord& record) {
  const tsp::Route route = tsp::tsp_route(truck.stops, depot, speed);
  truck.tour = route.tour.order;
  truck.travel_exact_h = route.hours;
  truck.travel_approx_h = route.hours;
  ++record.resolves;
  if (route.tour.length_km > route.tour.construction_km + 1e-9) ++record.resolve_violations;
}

// Alg. 1 trigger on arbitrary loads: max load minus mean load against the
// remaining-horizon threshold, expressed in hours through `unit`.
bool balance_trigger(std::span<const double> x, double a_d, std::int64_t remaining, double q,
                     double unit) {
  double max = -kInf, sum = 0.0;
  for (double v : x) {
    max = std::max(max, v);
    sum += v;
  }
  const double n = static_cast<double>(x.size());
  return max - sum / n >= a_d * static_cast<double>(remaining) * q * unit / n;
}

std::size_t argmin_over(std::span<const std::size_t> set, std::span<const double> x) {
  std::size_t best = set.front();
  for (std::size_t j : set) {
    if (x[j] < x[best]) best = j;
  }
  return best;
}

double table_or_inf(const FlexTables& tables, std::size_t from, std::size_t to) {
  if (!tables.has(from, to)) return kInf;
  const auto f = static_cast<Eigen::Index>(from), t = static_cast<Eigen::Index>(to);
  return tables.inc(f, t) + tables.ser(f, t);
}

// Diagonal per-package increment used by the cost-minimization projection.
std::pair<double, double> own_increment(const FlexTables& tables, std::size_t zone,
                                        double fallback_unload) {
  if (!tables.has(zone, zone)) return {0.0, fallback_unload};
  const auto z = static_cast<Eigen::Index>(zone);
  return {tables.inc(z, z), tables.ser(z, z)};
}

}  // namespace

void ParcelParams::validate() const {
  const bool ok = cost.travel_cost > 0 && cost.overtime_cost > 0 && cost.overtime_threshold_h > 0 &&
                  trucks >= 1 && packages_per_day >= 1 && speed_kmh > 0 && flex_km >= 0 &&
                  oblivious_radius_km > 0 && resolve_every >= 1 && projection_divisor > 0;
  if (!ok) throw ContractError("ParcelParams: every parameter must be positive");
}

const char* policy_name(const DayPolicy& policy) {
  return std::visit(Overloaded{[](const NoFlex&) { return "no_flex"; },
                               [](const UnloadingOnly&) { return "unloading_only"; },
                               [](const RoutingDynamic&) { return "routing_dynamic"; },
                               [](const PatientDynamic&) { return "patient_dynamic"; },
                               [](const CostMin&) { return "cost_min"; }},
                    policy);
}

DayPolicy parse_day_policy(const std::string& name) {
  if (name == "no_flex") return NoFlex{};
  if (name == "unloading_only") return UnloadingOnly{};
  if (name == "routing_dynamic") return RoutingDynamic{};
  if (name == "patient_dynamic") return PatientDynamic{};
  if (name == "cost_min") return CostMin{};
  throw std::invalid_argument("unknown parcel policy '" + name +
                              "' (no_flex, unloading_only, routing_dynamic, patient_dynamic, cost_min)");
}

bool needs_tables(const DayPolicy& policy) {
  return std::holds_alternative<PatientDynamic>(policy) || std::holds_alternative<CostMin>(policy);
}

std::vector<std::size_t> flex_set_of(const geo::Point& position, std::size_t default_zone,
                                     std::span<const geo::Point> centers, double flex_km) {
  const double limit = geo::distance(position, centers[default_zone]) + flex_km;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    if (j == default_zone || geo::distance(position, centers[j]) <= limit) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> radius_set_of(const geo::Point& position, std::size_t default_zone,
                                       std::span<const geo::Point> centers, double radius_km) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    if (j == default_zone || geo::distance(position, centers[j]) <= radius_km) out.push_back(j);
  }
  return out;
}

double inc_approx(const TruckState& truck, const geo::Point& position, const geo::Point& depot,
                  double speed_kmh) {
  double nearest = geo::distance(position, depot);
  for (const auto& s : truck.stops) nearest = std::min(nearest, geo::distance(position, s));
  return 2.0 * nearest / speed_kmh;
}

double expected_excess(double base, double step, std::int64_t trials, double p, double threshold) {
  if (trials <= 0 || p <= 0.0 || step == 0.0) return std::max(0.0, base - threshold);
  if (p >= 1.0) return std::max(0.0, base + step * static_cast<double>(trials) - threshold);
  const double n = static_cast<double>(trials);
  const double mean = n * p;
  const double sd = std::sqrt(n * p * (1.0 - p));
  const auto lo = static_cast<std::int64_t>(std::max(0.0, std::floor(mean - 12.0 * sd - 1.0)));
  const auto hi = static_cast<std::int64_t>(std::min(n, std::ceil(mean + 12.0 * sd + 1.0)));
  const double log_norm = std::lgamma(n + 1.0);
  const double lp = std::log(p), lq = std::log1p(-p);
  double total = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double excess = base + step * static_cast<double>(k) - threshold;
    if (excess <= 0.0) continue;
    const double kd = static_cast<double>(k);
    const double log_pmf =
        log_norm - std::lgamma(kd + 1.0) - std::lgamma(n - kd + 1.0) + kd * lp + (n - kd) * lq;
    total += std::exp(log_pmf) * excess;
  }
  return total;
}

std::vector<std::size_t> sample_day(const Corpus& corpus, std::int64_t packages, std::uint64_t seed) {
  if (corpus.packages.empty()) throw ContractError("sample_day: empty package pool");
  const RandomStream arrivals = RandomStream(seed).split("arrivals");
  std::vector<std::size_t> out(static_cast<std::size_t>(packages));
  for (std::size_t t = 0; t < out.size(); ++t) {
    RandomStream rng = arrivals.at(t);
    out[t] = static_cast<std::size_t>(rng.below(corpus.packages.size()));
  }
  return out;
}

DayRecord run_day(const DayPolicy& policy, const Corpus& corpus, const ParcelParams& params,
                  const FlexTables* tables, std::uint64_t seed, const DayOptions& options) {
  params.validate();
  const std::size_t n = params.trucks;
  if (corpus.zones != n || corpus.centers.size() != n) {
    throw ContractError("run_day: corpus has " + std::to_string(corpus.zones) +
                        " zones but params ask for " + std::to_string(n) + " trucks");
  }
  if (needs_tables(policy)) {
    if (tables == nullptr) {
      throw ContractError(std::string("policy ") + policy_name(policy) +
                          " needs flex tables; run `parcel estimate-tables` first and pass --tables");
    }
    if (tables->zones() != n) throw ContractError("run_day: flex tables do not match the zone count");
  }

  const std::int64_t T = params.packages_per_day;
  const std::vector<std::size_t> day = sample_day(corpus, T, seed);
  const PoolStats stats = pool_stats(corpus);
  const double unit = stats.mean_unload;

  // Share of the pool with a non-trivial flex set under the policy's rule;
  // plays the role of q in the Alg. 1 threshold.
  double q = 1.0;
  const auto policy_flex_set = [&](const Package& pkg) {
    if (const auto* u = std::get_if<UnloadingOnly>(&policy)) {
      return radius_set_of(pkg.position, pkg.default_zone, corpus.centers, u->radius_km);
    }
    return flex_set_of(pkg.position, pkg.default_zone, corpus.centers, params.flex_km);
  };
  if (std::holds_alternative<UnloadingOnly>(policy) || std::holds_alternative<RoutingDynamic>(policy)) {
    std::size_t flexible = 0;
    for (const auto& pkg : corpus.packages) flexible += policy_flex_set(pkg).size() > 1 ? 1 : 0;
    q = static_cast<double>(flexible) / static_cast<double>(corpus.packages.size());
  }

  DayRecord record;
  record.policy = policy_name(policy);
  record.trucks.assign(n, TruckState{});
  auto& trucks = record.trucks;
  std::vector<double> x(n), inc(n, 0.0), score(n);

  for (std::int64_t t = 0; t < T; ++t) {
    if (t > 0 && t % params.resolve_every == 0) {
      for (auto& truck : trucks) resolve(truck, corpus.depot, params.speed_kmh, record);
      if (options.on_resolve) options.on_resolve(t, trucks);
    }
    const std::size_t id = day[static_cast<std::size_t>(t)];
    const Package& pkg = corpus.packages[id];
    const std::size_t home = pkg.default_zone;
    const std::int64_t remaining = T - t;

    std::size_t target = home;
    if (!std::holds_alternative<NoFlex>(policy)) {
      const std::vector<std::size_t> set = policy_flex_set(pkg);
      for (std::size_t j : set) inc[j] = inc_approx(trucks[j], pkg.position, corpus.depot, params.speed_kmh);

      if (const auto* u = std::get_if<UnloadingOnly>(&policy)) {
        for (std::size_t i = 0; i < n; ++i) x[i] = trucks[i].unload_h;
        if (set.size() > 1 && balance_trigger(x, u->a_d, remaining, q, unit)) target = argmin_over(set, x);
      } else if (const auto* r = std::get_if<RoutingDynamic>(&policy)) {
        for (std::size_t i = 0; i < n; ++i) x[i] = trucks[i].load();
        if (set.size() > 1 && balance_trigger(x, r->a_d, remaining, q, unit)) target = argmin_over(set, x);
      } else if (std::holds_alternative<PatientDynamic>(policy)) {
        const double horizon = static_cast<double>(remaining) / params.projection_divisor;
        for (std::size_t j : set) {
          score[j] = trucks[j].load() + inc[j] + pkg.unload + horizon * table_or_inf(*tables, home, j);
        }
        const std::size_t best = argmin_over(set, score);
        if (trucks[home].load() + inc[home] + pkg.unload >= score[best]) target = best;
      } else {
        // Cost minimization: compare expected day-end cost with and without the
        // flex, future arrivals per zone ~ Binomial(T - t, p_j).
        const CostParams& c = params.cost;
        const double h = c.overtime_threshold_h;
        const auto over = [&](std::size_t j, double base) {
          const auto [ti, si] = own_increment(*tables, j, unit);
          return expected_excess(base, ti + si, remaining, tables->arrival_prob(static_cast<Eigen::Index>(j)), h);
        };
        const double keep_home = over(home, trucks[home].load() + inc[home] + pkg.unload);
        const double flex_home = over(home, trucks[home].load());
        double best_gain = -kInf;
        std::size_t best = home;
        for (std::size_t j : set) {
          if (j == home) continue;
          const double keep_j = over(j, trucks[j].load());
          const double flex_j = over(j, trucks[j].load() + inc[j] + pkg.unload);
          const double gain = c.overtime_cost * (keep_home + keep_j - flex_home - flex_j) +
                              c.travel_cost * (inc[home] - inc[j]);
          if (gain > best_gain) {
            best_gain = gain;
            best = j;
          }
        }
        if (best != home && best_gain >= static_cast<double>(remaining) / params.projection_divisor) {
          target = best;
        }
      }
    }

    TruckState& truck = trucks[target];
    const double added = std::holds_alternative<NoFlex>(policy)
                             ? inc_approx(truck, pkg.position, corpus.depot, params.speed_kmh)
                             : inc[target];
    truck.stops.push_back(pkg.position);
    truck.pool_ids.push_back(id);
    truck.unload_h += pkg.unload;
    truck.travel_approx_h += added;
    if (target != home) ++record.flex_count;
    ++record.packages;
  }
  for (auto& truck : trucks) resolve(truck, corpus.depot, params.speed_kmh, record);
  return record;
}

DayCost day_cost(std::span<const double> travel_h, std::span<const double> total_h,
                 const CostParams& cost) {
  if (travel_h.size() != total_h.size()) throw ContractError("day_cost: size mismatch");
  DayCost out;
  for (std::size_t i = 0; i < travel_h.size(); ++i) {
    out.travel += cost.travel_cost * travel_h[i];
    const double excess = std::max(0.0, total_h[i] - cost.overtime_threshold_h);
    out.overtime_hours += excess;
    out.overtime += cost.overtime_cost * excess;
    if (excess > 0.0) ++out.routes_over;
  }
  out.total = out.travel + out.overtime;
  return out;
}

DayCost day_cost(const DayRecord& record, const CostParams& cost) {
  std::vector<double> travel, total;
  for (const auto& truck : record.trucks) {
    travel.push_back(truck.travel_exact_h);
    total.push_back(truck.travel_exact_h + truck.unload_h);
  }
  return day_cost(travel, total, cost);
}

}  // namespace endgame::parcel
