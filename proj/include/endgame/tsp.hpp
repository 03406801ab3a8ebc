#pragma once

// Closed depot tours: nearest-neighbour construction followed by 2-opt until
// no improving move remains. Deterministic for a given input order.

#include <cstddef>
#include <span>
#include <vector>

#include "endgame/geometry.hpp"

namespace endgame::tsp {

struct Tour {
  /// Visiting order as indices into the input points (depot excluded).
  std::vector<std::size_t> order;
  double length_km = 0.0;
  /// Length of the nearest-neighbour tour 2-opt started from.
  double construction_km = 0.0;
};

double tour_length(std::span<const geo::Point> points, const geo::Point& depot,
                   std::span<const std::size_t> order);

Tour nearest_neighbor(std::span<const geo::Point> points, const geo::Point& depot);

/// Improves `tour` in place with first-improvement 2-opt.
void two_opt(std::span<const geo::Point> points, const geo::Point& depot, Tour& tour);

/// NN + 2-opt.
Tour solve(std::span<const geo::Point> points, const geo::Point& depot);

struct Route {
  Tour tour;
  double hours = 0.0;
};

/// Tour plus travel time at `speed_kmh`; an empty stop set costs nothing.
Route tsp_route(std::span<const geo::Point> points, const geo::Point& depot, double speed_kmh);

/// Cheapest insertion cost (km) of `p` into a closed tour; out-and-back from
/// the depot when the tour is empty.
double insertion_cost(std::span<const geo::Point> points, const geo::Point& depot,
                      std::span<const std::size_t> order, const geo::Point& p);

/// Length saved (km) by dropping the stop at `position` of `order`.
double removal_gain(std::span<const geo::Point> points, const geo::Point& depot,
                    std::span<const std::size_t> order, std::size_t position);

}  // namespace endgame::tsp
