#pragma once

// Online package-to-truck assignment with routing.
//
// A day streams T packages bootstrapped from the pool. Each truck keeps its
// stops, unloading hours and an approximate travel time: every M1 arrivals
// all routes are re-solved (NN + 2-opt) and the approximation is reset to the
// exact value; between re-solves a new stop adds twice its distance to the
// nearest existing stop (or the depot). The day ends with a final re-solve
// and is costed as sum_i c_r y_r_i + c_o (y_i - h_max)^+.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "endgame/corpus.hpp"
#include "endgame/errors.hpp"
#include "endgame/flex_tables.hpp"
#include "endgame/geometry.hpp"

namespace endgame::parcel {

struct CostParams {
  double travel_cost = 6.3;           // c_r, $/hour
  double overtime_cost = 38.0;        // c_o, $/hour
  double overtime_threshold_h = 8.0;  // h_max
};

struct ParcelParams {
  CostParams cost;
  std::size_t trucks = 24;                 // N
  std::int64_t packages_per_day = 2000;    // T
  double speed_kmh = 15.75;
  double flex_km = 1.0;
  double oblivious_radius_km = 5.0;
  std::int64_t resolve_every = 100;        // M1
  double projection_divisor = 200.0;       // M2

  void validate() const;
};

struct TruckState {
  std::vector<geo::Point> stops;
  std::vector<std::size_t> pool_ids;
  std::vector<std::size_t> tour;  // order over `stops` from the last re-solve
  double unload_h = 0.0;          // y_u
  double travel_approx_h = 0.0;   // y_r approximation
  double travel_exact_h = 0.0;    // last re-solved y_r

  double load() const { return unload_h + travel_approx_h; }
};

// Policies ------------------------------------------------------------------

struct NoFlex {};
/// Balls-into-bins dynamic rule on unloading time only, flexing within a radius.
struct UnloadingOnly {
  double a_d = 0.7;
  double radius_km = 5.0;
};
/// Balls-into-bins dynamic rule on unloading + approximate travel.
struct RoutingDynamic {
  double a_d = 0.7;
};
/// Projected-load rule driven by the INC/SER tables.
struct PatientDynamic {};
/// Expected-cost rule with binomial future arrivals.
struct CostMin {};

using DayPolicy = std::variant<NoFlex, UnloadingOnly, RoutingDynamic, PatientDynamic, CostMin>;

const char* policy_name(const DayPolicy& policy);
DayPolicy parse_day_policy(const std::string& name);
bool needs_tables(const DayPolicy& policy);

// Building blocks -----------------------------------------------------------

/// Zones whose center is at most `flex_km` farther than the default zone's;
/// always contains the default zone. Ascending zone order.
std::vector<std::size_t> flex_set_of(const geo::Point& position, std::size_t default_zone,
                                     std::span<const geo::Point> centers, double flex_km);

/// Zones whose center lies within `radius_km`, plus the default zone.
std::vector<std::size_t> radius_set_of(const geo::Point& position, std::size_t default_zone,
                                       std::span<const geo::Point> centers, double radius_km);

/// 2 * distance to the nearest assigned stop or the depot, in hours.
double inc_approx(const TruckState& truck, const geo::Point& position, const geo::Point& depot,
                  double speed_kmh);

/// E[(base + step * N - threshold)^+] for N ~ Binomial(trials, p).
double expected_excess(double base, double step, std::int64_t trials, double p, double threshold);

// Day simulation ------------------------------------------------------------

struct DayRecord {
  std::string policy;
  std::vector<TruckState> trucks;  // after the final re-solve
  std::int64_t flex_count = 0;
  std::int64_t packages = 0;
  std::size_t resolves = 0;
  /// Re-solves where 2-opt ended longer than its NN start (must stay 0).
  std::size_t resolve_violations = 0;
};

struct DayCost {
  double travel = 0.0;
  double overtime = 0.0;
  double total = 0.0;
  double overtime_hours = 0.0;
  std::size_t routes_over = 0;
};

struct DayOptions {
  /// Called after every periodic re-solve with the refreshed trucks.
  std::function<void(std::int64_t period, std::span<const TruckState>)> on_resolve;
};

/// Simulates one day; PatientDynamic and CostMin require `tables`.
DayRecord run_day(const DayPolicy& policy, const Corpus& corpus, const ParcelParams& params,
                  const FlexTables* tables, std::uint64_t seed, const DayOptions& options = {});

/// Pool indices of the packages a day with `seed` streams, in arrival order.
std::vector<std::size_t> sample_day(const Corpus& corpus, std::int64_t packages, std::uint64_t seed);

DayCost day_cost(const DayRecord& record, const CostParams& cost);
/// Same arithmetic over raw per-truck (travel, total) hours.
DayCost day_cost(std::span<const double> travel_h, std::span<const double> total_h,
                 const CostParams& cost);

}  // namespace endgame::parcel
