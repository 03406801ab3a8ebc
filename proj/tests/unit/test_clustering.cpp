#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "endgame/clustering.hpp"

using endgame::geo::Point;
namespace cluster = endgame::cluster;

namespace {

// Nearest-center assignment moved into the window one cheapest move at a time.
double greedy_repair(const std::vector<Point>& pts, const std::vector<Point>& centers, std::size_t lo,
                     std::size_t hi) {
  const std::size_t n = pts.size(), k = centers.size();
  std::vector<std::size_t> zone(n), count(k, 0);
  const auto d = [&](std::size_t i, std::size_t z) { return (pts[i] - centers[z]).norm(); };
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = 0;
    for (std::size_t z = 1; z < k; ++z)
      if (d(i, z) < d(i, b)) b = z;
    zone[i] = b;
    ++count[b];
  }
  const auto move = [&](auto from_ok, auto to_ok) {
    double best = INFINITY;
    std::size_t bi = n, bz = k;
    for (std::size_t i = 0; i < n; ++i) {
      if (!from_ok(zone[i])) continue;
      for (std::size_t z = 0; z < k; ++z) {
        if (z != zone[i] && to_ok(z) && d(i, z) - d(i, zone[i]) < best) {
          best = d(i, z) - d(i, zone[i]);
          bi = i;
          bz = z;
        }
      }
    }
    --count[zone[bi]];
    ++count[bz];
    zone[bi] = bz;
  };
  for (std::size_t z = 0; z < k; ++z)
    while (count[z] > hi) move([&](std::size_t f) { return f == z; }, [&](std::size_t t) { return count[t] < hi; });
  for (std::size_t z = 0; z < k; ++z)
    while (count[z] < lo) move([&](std::size_t f) { return count[f] > lo; }, [&](std::size_t t) { return t == z; });
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += d(i, zone[i]);
  return total;
}

std::vector<Point> random_points(std::size_t n, std::uint64_t seed) {
  endgame::RandomStream rng(seed);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    // Three blobs of unequal size make the balance window bind.
    const double cx = i % 5 == 0 ? 8.0 : (i % 5 < 3 ? 0.0 : 4.0);
    pts.emplace_back(cx + rng.normal(), rng.normal());
  }
  return pts;
}

}  // namespace

TEST(Clustering, CollinearPoints) {
  const std::vector<Point> pts{Point(0, 0), Point(1, 0), Point(10, 0), Point(11, 0)};
  endgame::RandomStream rng(1);
  const auto z = cluster::cluster_default(pts, 2, 0.0, rng);
  const auto& a = z.assignment.zone_of;
  EXPECT_EQ(a[0], a[1]);
  EXPECT_EQ(a[2], a[3]);
  EXPECT_NE(a[0], a[2]);
  EXPECT_EQ(z.assignment.counts, (std::vector<std::size_t>{2, 2}));
}

TEST(Clustering, CountsWithinWindow) {
  const auto pts = random_points(10000, 3);
  endgame::RandomStream rng(2);
  const double eps = 50;
  const auto z = cluster::cluster_default(pts, 6, eps, rng);
  std::vector<std::size_t> counts(6, 0);
  for (auto zone : z.assignment.zone_of) ++counts[zone];
  EXPECT_EQ(counts, z.assignment.counts);
  for (auto c : counts) {
    EXPECT_GE(static_cast<double>(c), 10000.0 / 6 - eps);
    EXPECT_LE(static_cast<double>(c), 10000.0 / 6 + eps);
  }
}

TEST(Clustering, FlowNoWorseThanGreedyRepair) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = random_points(300, seed);
    endgame::RandomStream rng(seed);
    const auto km = cluster::kmeans(pts, 4, rng);
    for (double eps : {0.0, 5.0, 20.0}) {
      const auto a = cluster::balanced_assignment(pts, km.centers, eps);
      const double mean = 300.0 / 4;
      const auto lo = static_cast<std::size_t>(std::ceil(mean - eps));
      const auto hi = static_cast<std::size_t>(std::floor(mean + eps));
      double objective = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) objective += (pts[i] - km.centers[a.zone_of[i]]).norm();
      EXPECT_NEAR(objective, a.objective, 1e-6);
      EXPECT_LE(a.objective, greedy_repair(pts, km.centers, lo, hi) + 1e-9) << "seed " << seed << " eps " << eps;
    }
  }
}

TEST(Clustering, UnconstrainedIsNearestCenter) {
  const auto pts = random_points(200, 9);
  const std::vector<Point> centers{Point(0, 0), Point(4, 0), Point(8, 0)};
  const auto a = cluster::balanced_assignment(pts, centers, 1e6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double own = (pts[i] - centers[a.zone_of[i]]).norm();
    for (const auto& c : centers) EXPECT_LE(own, (pts[i] - c).norm() + 1e-12);
  }
}

TEST(Clustering, InfeasibleWindow) {
  const auto pts = random_points(10, 1);
  const std::vector<Point> centers{Point(0, 0), Point(4, 0), Point(8, 0)};
  EXPECT_NEAR(cluster::minimal_feasible_epsilon(10, 3), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(cluster::minimal_feasible_epsilon(12, 3), 0.0);
  try {
    cluster::balanced_assignment(pts, centers, 0.5);
    FAIL() << "expected InfeasibleBalance";
  } catch (const cluster::InfeasibleBalance& e) {
    EXPECT_DOUBLE_EQ(e.requested_epsilon(), 0.5);
    EXPECT_NEAR(e.minimal_epsilon(), 2.0 / 3.0, 1e-12);
  }
  EXPECT_NO_THROW(cluster::balanced_assignment(pts, centers, 2.0 / 3.0));
}

TEST(KMeans, LabelsAreNearestCenters) {
  const auto pts = random_points(500, 4);
  endgame::RandomStream rng(5);
  const auto km = cluster::kmeans(pts, 3, rng);
  ASSERT_EQ(km.centers.size(), 3u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double own = (pts[i] - km.centers[km.labels[i]]).norm();
    for (const auto& c : km.centers) EXPECT_LE(own, (pts[i] - c).norm() + 1e-9);
  }
}
