#pragma once

// Default zoning: k-means centers followed by an exact, size-balanced
// reassignment. The reassignment is a transportation problem (packages to
// zones, zone sizes within L/N +- epsilon) solved as a min-cost flow by
// successive shortest paths; flow optima are integral, so the result is an
// optimal 0/1 assignment.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "endgame/geometry.hpp"
#include "endgame/random.hpp"

namespace endgame::cluster {

/// Thrown when no assignment satisfies the balance window.
class InfeasibleBalance : public std::runtime_error {
 public:
  InfeasibleBalance(double requested, double minimal);
  double requested_epsilon() const { return requested_; }
  double minimal_epsilon() const { return minimal_; }

 private:
  double requested_;
  double minimal_;
};

/// Smallest epsilon for which ceil(L/N - eps) <= floor(L/N + eps) leaves an
/// integral solution.
double minimal_feasible_epsilon(std::size_t points, std::size_t zones);

struct KMeansResult {
  std::vector<geo::Point> centers;
  std::vector<std::size_t> labels;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from a k-means++ seeding; stops when labels are stable.
KMeansResult kmeans(std::span<const geo::Point> points, std::size_t k, RandomStream& rng,
                    std::size_t max_iterations = 300);

struct Assignment {
  std::vector<std::size_t> zone_of;  // per point
  std::vector<std::size_t> counts;   // per zone
  double objective = 0.0;            // sum of point-to-center distances
};

/// Minimum total distance assignment with every zone count in
/// [ceil(L/N - eps), floor(L/N + eps)].
Assignment balanced_assignment(std::span<const geo::Point> points,
                               std::span<const geo::Point> centers, double epsilon);

struct Zoning {
  std::vector<geo::Point> centers;
  Assignment assignment;
};

/// k-means (K = N) then balanced reassignment.
Zoning cluster_default(std::span<const geo::Point> points, std::size_t zones, double epsilon,
                       RandomStream& rng);

}  // namespace endgame::cluster
