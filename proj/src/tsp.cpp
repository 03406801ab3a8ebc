#include "endgame/tsp.hpp"

#include <algorithm>
#include <limits>

namespace endgame::tsp {

namespace {

constexpr double kImprovementEps = 1e-10;

// Node 0 is the depot, node k + 1 is points[k].
Eigen::MatrixXd node_distances(std::span<const geo::Point> points, const geo::Point& depot) {
  Eigen::Matrix2Xd nodes(2, static_cast<Eigen::Index>(points.size() + 1));
  nodes.col(0) = depot;
  for (std::size_t i = 0; i < points.size(); ++i) {
    nodes.col(static_cast<Eigen::Index>(i + 1)) = points[i];
  }
  return geo::distance_matrix(nodes);
}

double cycle_length(const Eigen::MatrixXd& d, const std::vector<std::size_t>& cycle) {
  double total = 0.0;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    total += d(static_cast<Eigen::Index>(cycle[k]),
               static_cast<Eigen::Index>(cycle[(k + 1) % cycle.size()]));
  }
  return total;
}

}  // namespace

double tour_length(std::span<const geo::Point> points, const geo::Point& depot,
                   std::span<const std::size_t> order) {
  if (order.empty()) return 0.0;
  double total = geo::distance(depot, points[order.front()]);
  for (std::size_t k = 1; k < order.size(); ++k) {
    total += geo::distance(points[order[k - 1]], points[order[k]]);
  }
  return total + geo::distance(points[order.back()], depot);
}

Tour nearest_neighbor(std::span<const geo::Point> points, const geo::Point& depot) {
  Tour tour;
  const std::size_t n = points.size();
  tour.order.reserve(n);
  std::vector<bool> visited(n, false);
  geo::Point here = depot;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (visited[k]) continue;
      const double d = geo::distance(here, points[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    visited[best] = true;
    tour.order.push_back(best);
    here = points[best];
  }
  tour.length_km = tour_length(points, depot, tour.order);
  tour.construction_km = tour.length_km;
  return tour;
}

void two_opt(std::span<const geo::Point> points, const geo::Point& depot, Tour& tour) {
  const std::size_t n = tour.order.size();
  if (n < 3) {
    tour.length_km = tour_length(points, depot, tour.order);
    return;
  }
  const Eigen::MatrixXd d = node_distances(points, depot);
  // cycle[0] is the depot; reversing cycle[i..j] replaces edges
  // (i-1, i) and (j, j+1) with (i-1, j) and (i, j+1).
  std::vector<std::size_t> cycle(n + 1);
  cycle[0] = 0;
  for (std::size_t k = 0; k < n; ++k) cycle[k + 1] = tour.order[k] + 1;
  const std::size_t m = cycle.size();
  const auto dist = [&](std::size_t a, std::size_t b) {
    return d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };

  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const std::size_t a = cycle[i - 1], b = cycle[i];
        const std::size_t c = cycle[j], e = cycle[(j + 1) % m];
        const double delta = dist(a, c) + dist(b, e) - dist(a, b) - dist(c, e);
        if (delta < -kImprovementEps) {
          std::reverse(cycle.begin() + static_cast<std::ptrdiff_t>(i),
                       cycle.begin() + static_cast<std::ptrdiff_t>(j + 1));
          improved = true;
        }
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) tour.order[k] = cycle[k + 1] - 1;
  tour.length_km = cycle_length(d, cycle);
}

Tour solve(std::span<const geo::Point> points, const geo::Point& depot) {
  Tour tour = nearest_neighbor(points, depot);
  two_opt(points, depot, tour);
  return tour;
}

Route tsp_route(std::span<const geo::Point> points, const geo::Point& depot, double speed_kmh) {
  Route route;
  if (points.empty()) return route;
  route.tour = solve(points, depot);
  route.hours = route.tour.length_km / speed_kmh;
  return route;
}

double insertion_cost(std::span<const geo::Point> points, const geo::Point& depot,
                      std::span<const std::size_t> order, const geo::Point& p) {
  if (order.empty()) return 2.0 * geo::distance(depot, p);
  const auto at = [&](std::size_t k) -> const geo::Point& {
    return (k == 0 || k == order.size() + 1) ? depot : points[order[k - 1]];
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= order.size(); ++k) {
    const geo::Point& a = at(k);
    const geo::Point& b = at(k + 1);
    best = std::min(best, geo::distance(a, p) + geo::distance(p, b) - geo::distance(a, b));
  }
  return std::max(best, 0.0);
}

double removal_gain(std::span<const geo::Point> points, const geo::Point& depot,
                    std::span<const std::size_t> order, std::size_t position) {
  const geo::Point& p = points[order[position]];
  const geo::Point& prev = position == 0 ? depot : points[order[position - 1]];
  const geo::Point& next = position + 1 == order.size() ? depot : points[order[position + 1]];
  return std::max(0.0, geo::distance(prev, p) + geo::distance(p, next) - geo::distance(prev, next));
}

}  // namespace endgame::tsp
