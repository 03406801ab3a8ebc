#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "endgame/corpus.hpp"
#include "endgame/flex_tables.hpp"
#include "endgame/parcel_delivery.hpp"
#include "endgame/tsp.hpp"

using namespace endgame::parcel;
using endgame::geo::Point;

namespace {

ParcelParams small_params(std::size_t trucks) {
  ParcelParams p;
  p.trucks = trucks;
  p.packages_per_day = 300;
  p.resolve_every = 50;
  return p;
}

const Corpus& small_corpus() {
  static const Corpus c = build_corpus(11, 4, 3000);
  return c;
}

FlexTables zero_tables(std::size_t n) {
  FlexTables t;
  const auto z = static_cast<Eigen::Index>(n);
  t.inc = Eigen::MatrixXd::Zero(z, z);
  t.ser = Eigen::MatrixXd::Zero(z, z);
  t.observations = Eigen::MatrixXi::Ones(z, z);
  t.arrival_prob = Eigen::VectorXd::Constant(z, 1.0 / static_cast<double>(n));
  t.replications = 1;
  return t;
}

}  // namespace

TEST(IncApprox, DepotFallbackAndCoincidentStop) {
  TruckState empty;
  EXPECT_NEAR(inc_approx(empty, Point(3, 0), Point(0, 0), 15.75), 6.0 / 15.75, 1e-12);
  TruckState one;
  one.stops.push_back(Point(5, 5));
  EXPECT_DOUBLE_EQ(inc_approx(one, Point(5, 5), Point(0, 0), 15.75), 0.0);
  EXPECT_GE(inc_approx(one, Point(9, 1), Point(0, 0), 15.75), 0.0);
}

TEST(FlexSet, Boundaries) {
  const std::vector<Point> centers{Point(0, 0), Point(2, 0), Point(5, 0)};
  const Point pkg(1.2, 0);  // 1.2 from zone 0, 0.8 from zone 1, 3.8 from zone 2
  EXPECT_EQ(flex_set_of(pkg, 0, centers, 0.0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(flex_set_of(pkg, 1, centers, 0.0), (std::vector<std::size_t>{1}));
  EXPECT_EQ(flex_set_of(pkg, 1, centers, std::numeric_limits<double>::infinity()),
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(flex_set_of(Point(1, 0), 0, centers, 1.0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(radius_set_of(pkg, 2, centers, 1.5), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(radius_set_of(pkg, 0, centers, 0.5), (std::vector<std::size_t>{0}));
}

TEST(DayCost, Fixtures) {
  const CostParams c{6.3, 38.0, 8.0};
  const std::vector<double> travel_a{4, 4}, total_a{7, 7};
  const auto a = day_cost(travel_a, total_a, c);
  EXPECT_DOUBLE_EQ(a.total, 2 * 4 * 6.3);
  EXPECT_DOUBLE_EQ(a.overtime, 0.0);

  const std::vector<double> travel_b{5}, total_b{9};
  EXPECT_DOUBLE_EQ(day_cost(travel_b, total_b, c).total, 5 * 6.3 + 38.0);

  // Hand sums: travel 3.99 + 4.2 + 2.5 = 10.69 h, overtime 0.5 h on the second route.
  const std::vector<double> travel_c{3.99, 4.2, 2.5}, total_c{7.99, 8.5, 6.0};
  const auto d = day_cost(travel_c, total_c, c);
  EXPECT_NEAR(d.travel, 67.347, 1e-9);
  EXPECT_NEAR(d.overtime, 19.0, 1e-9);
  EXPECT_NEAR(d.total, 86.347, 1e-9);
  EXPECT_EQ(d.routes_over, 1u);
}

TEST(ExpectedExcess, AgainstDirectSum) {
  const double base = 6.0, step = 0.3, threshold = 8.0, p = 0.2;
  const int n = 30;
  double direct = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                k * std::log(p) + (n - k) * std::log(1 - p));
    direct += pmf * std::max(0.0, base + step * k - threshold);
  }
  EXPECT_NEAR(expected_excess(base, step, n, p, threshold), direct, 1e-12);
  EXPECT_DOUBLE_EQ(expected_excess(9, 1, 10, 0.0, 8), 1.0);
  EXPECT_DOUBLE_EQ(expected_excess(7, 0.5, 4, 1.0, 8), 1.0);
}

TEST(RunDay, SingleZoneKeepsEveryPackageHome) {
  const Corpus c = build_corpus(4, 1, 500);
  ParcelParams p = small_params(1);
  const auto rec = run_day(NoFlex{}, c, p, nullptr, 1);
  ASSERT_EQ(rec.trucks.size(), 1u);
  EXPECT_EQ(rec.trucks[0].stops.size(), 300u);
  EXPECT_EQ(rec.flex_count, 0);
}

TEST(RunDay, EveryPackageAssignedOnce) {
  const Corpus& c = small_corpus();
  const ParcelParams p = small_params(4);
  const FlexTables tables = zero_tables(4);
  for (const DayPolicy& policy : {DayPolicy{NoFlex{}}, DayPolicy{UnloadingOnly{}}, DayPolicy{RoutingDynamic{}},
                                   DayPolicy{PatientDynamic{}}, DayPolicy{CostMin{}}}) {
    const auto rec = run_day(policy, c, p, &tables, 5);
    const auto day = sample_day(c, p.packages_per_day, 5);
    std::vector<std::size_t> assigned;
    double unload = 0;
    for (const auto& t : rec.trucks) {
      assigned.insert(assigned.end(), t.pool_ids.begin(), t.pool_ids.end());
      unload += t.unload_h;
      EXPECT_EQ(t.tour.size(), t.stops.size());
      EXPECT_DOUBLE_EQ(t.travel_approx_h, t.travel_exact_h);
    }
    std::vector<std::size_t> expected = day;
    std::sort(expected.begin(), expected.end());
    std::sort(assigned.begin(), assigned.end());
    EXPECT_EQ(assigned, expected) << rec.policy;
    double want = 0;
    for (auto id : day) want += c.packages[id].unload;
    EXPECT_NEAR(unload, want, 1e-9) << rec.policy;
    EXPECT_EQ(rec.resolve_violations, 0u);
    EXPECT_EQ(rec.packages, p.packages_per_day);
  }
}

TEST(RunDay, ResolveResetsApproximation) {
  const Corpus& c = small_corpus();
  const ParcelParams p = small_params(4);
  std::vector<std::int64_t> periods;
  DayOptions opt;
  opt.on_resolve = [&](std::int64_t t, std::span<const TruckState> trucks) {
    periods.push_back(t);
    for (const auto& tr : trucks) {
      EXPECT_DOUBLE_EQ(tr.travel_approx_h, tr.travel_exact_h);
      const auto route = endgame::tsp::tsp_route(tr.stops, c.depot, p.speed_kmh);
      EXPECT_NEAR(tr.travel_exact_h, route.hours, 1e-12);
    }
  };
  const auto rec = run_day(RoutingDynamic{}, c, p, nullptr, 8, opt);
  EXPECT_EQ(periods, (std::vector<std::int64_t>{50, 100, 150, 200, 250}));
  EXPECT_EQ(rec.resolves, 4u * 6u);
}

TEST(RunDay, NoFlexUsesDefaultZones) {
  const Corpus& c = small_corpus();
  const auto rec = run_day(NoFlex{}, c, small_params(4), nullptr, 3);
  for (std::size_t i = 0; i < rec.trucks.size(); ++i)
    for (auto id : rec.trucks[i].pool_ids) EXPECT_EQ(c.packages[id].default_zone, i);
}

TEST(RunDay, MissingTablesNamesTheFix) {
  try {
    run_day(PatientDynamic{}, small_corpus(), small_params(4), nullptr, 1);
    FAIL() << "expected ContractError";
  } catch (const endgame::ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("estimate-tables"), std::string::npos);
  }
}

TEST(RunDay, PatientDynamicCollapsesToGreedyWithZeroTables) {
  const Corpus& c = small_corpus();
  ParcelParams p = small_params(4);
  p.packages_per_day = 40;
  p.resolve_every = 1000;  // no re-solve before the day ends
  p.projection_divisor = 1e12;
  p.flex_km = 3.0;
  const FlexTables tables = zero_tables(4);
  const auto rec = run_day(PatientDynamic{}, c, p, &tables, 13);

  // Replay the collapsed rule: flex iff the default truck's one-step load is
  // at least the best alternative's.
  std::vector<TruckState> trucks(4);
  std::int64_t flexes = 0;
  for (auto id : sample_day(c, p.packages_per_day, 13)) {
    const Package& pkg = c.packages[id];
    const auto set = flex_set_of(pkg.position, pkg.default_zone, c.centers, p.flex_km);
    const auto step = [&](std::size_t j) {
      return trucks[j].load() + inc_approx(trucks[j], pkg.position, c.depot, p.speed_kmh) + pkg.unload;
    };
    std::size_t best = set.front();
    for (auto j : set)
      if (step(j) < step(best)) best = j;
    const std::size_t target = step(pkg.default_zone) >= step(best) ? best : pkg.default_zone;
    if (target != pkg.default_zone) ++flexes;
    trucks[target].travel_approx_h += inc_approx(trucks[target], pkg.position, c.depot, p.speed_kmh);
    trucks[target].stops.push_back(pkg.position);
    trucks[target].unload_h += pkg.unload;
    trucks[target].pool_ids.push_back(id);
  }
  EXPECT_EQ(rec.flex_count, flexes);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(rec.trucks[j].pool_ids, trucks[j].pool_ids);
}

TEST(RunDay, TwoFarClustersNoFlexIsBestInHindsight) {
  // Two clusters of three stops either side of the depot.
  const Point depot(0, 0);
  const std::vector<Point> west{Point(-10, 0), Point(-10.5, 0.5), Point(-10.5, -0.5)};
  const std::vector<Point> east{Point(10, 0), Point(10.5, 0.5), Point(10.5, -0.5)};
  const auto travel = [&](const std::vector<Point>& a, const std::vector<Point>& b) {
    return endgame::tsp::solve(a, depot).length_km + endgame::tsp::solve(b, depot).length_km;
  };
  const double no_flex = travel(west, east);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<Point> w = west, e = east;
    e.push_back(w[k]);
    w.erase(w.begin() + static_cast<long>(k));
    EXPECT_LT(no_flex, travel(w, e));
  }
}

TEST(RunDay, Deterministic) {
  const Corpus& c = small_corpus();
  const auto a = run_day(RoutingDynamic{}, c, small_params(4), nullptr, 21);
  const auto b = run_day(RoutingDynamic{}, c, small_params(4), nullptr, 21);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(a.trucks[j].pool_ids, b.trucks[j].pool_ids);
  EXPECT_EQ(a.flex_count, b.flex_count);
}

TEST(Policies, Names) {
  for (const char* n : {"no_flex", "unloading_only", "routing_dynamic", "patient_dynamic", "cost_min"})
    EXPECT_STREQ(policy_name(parse_day_policy(n)), n);
  EXPECT_THROW(parse_day_policy("teleport"), std::invalid_argument);
  EXPECT_TRUE(needs_tables(PatientDynamic{}));
  EXPECT_FALSE(needs_tables(RoutingDynamic{}));
}

TEST(FlexTables, Consistency) {
  const Corpus& c = small_corpus();
  const ParcelParams p = small_params(4);
  const FlexTables t = estimate_flex_tables(c, p, 6, 99);
  EXPECT_EQ(t.zones(), 4u);
  EXPECT_NEAR(t.arrival_prob.sum(), 1.0, 1e-12);
  const double pool_mean = pool_stats(c).mean_unload;
  double weighted = 0;
  long long total = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_GT(t.observations(i, i), 0);
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (t.observations(i, j) == 0) {
        EXPECT_TRUE(std::isnan(t.inc(i, j)));
        continue;
      }
      EXPECT_GE(t.inc(i, j), -1e-12);
      weighted += t.ser(i, j) * t.observations(i, j);
      total += t.observations(i, j);
    }
  }
  EXPECT_NEAR(weighted / static_cast<double>(total), pool_mean, 0.1 * pool_mean);
}

TEST(FlexTables, RoundTripAndParallel) {
  const Corpus& c = small_corpus();
  const FlexTables t = estimate_flex_tables(c, small_params(4), 4, 7, 1);
  std::ostringstream os;
  write_flex_tables(os, t);
  std::istringstream is(os.str());
  const FlexTables back = read_flex_tables(is);
  std::ostringstream again;
  write_flex_tables(again, back);
  EXPECT_EQ(os.str(), again.str());
  std::ostringstream par;
  write_flex_tables(par, estimate_flex_tables(c, small_params(4), 4, 7, 3));
  EXPECT_EQ(os.str(), par.str());
}
