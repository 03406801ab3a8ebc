#include "endgame/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace endgame::cluster {

namespace {

std::string infeasible_message(double requested, double minimal) {
  std::ostringstream os;
  os << "balance window epsilon=" << requested << " is infeasible; minimal feasible epsilon is "
     << minimal;
  return os.str();
}

struct BalanceWindow {
  std::size_t lower;
  std::size_t upper;
};

BalanceWindow window_for(std::size_t points, std::size_t zones, double epsilon) {
  const double mean = static_cast<double>(points) / static_cast<double>(zones);
  constexpr double kSlack = 1e-9;
  const double lo = std::ceil(mean - epsilon - kSlack);
  const double hi = std::floor(mean + epsilon + kSlack);
  return {static_cast<std::size_t>(std::max(0.0, lo)), static_cast<std::size_t>(std::max(0.0, hi))};
}

struct MoveCandidate {
  double key;  // cost(p, to) - cost(p, from)
  std::size_t point;
  std::uint32_t version;
  bool operator>(const MoveCandidate& o) const {
    return key != o.key ? key > o.key : point > o.point;
  }
};

using MinHeap =
    std::priority_queue<MoveCandidate, std::vector<MoveCandidate>, std::greater<MoveCandidate>>;

}  // namespace

InfeasibleBalance::InfeasibleBalance(double requested, double minimal)
    : std::runtime_error(infeasible_message(requested, minimal)),
      requested_(requested),
      minimal_(minimal) {}

double minimal_feasible_epsilon(std::size_t points, std::size_t zones) {
  if (zones == 0) return 0.0;
  if (points % zones == 0) return 0.0;
  const double mean = static_cast<double>(points) / static_cast<double>(zones);
  return std::max(std::ceil(mean) - mean, mean - std::floor(mean));
}

KMeansResult kmeans(std::span<const geo::Point> points, std::size_t k, RandomStream& rng,
                    std::size_t max_iterations) {
  const std::size_t n = points.size();
  if (k == 0 || n < k) throw std::invalid_argument("kmeans needs at least k points and k >= 1");

  KMeansResult out;
  out.centers.reserve(k);
  // k-means++ seeding.
  std::vector<double> nearest_sq(n, std::numeric_limits<double>::infinity());
  out.centers.push_back(points[rng.below(n)]);
  while (out.centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest_sq[i] = std::min(nearest_sq[i], (points[i] - out.centers.back()).squaredNorm());
      total += nearest_sq[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest_sq[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    out.centers.push_back(points[pick]);
  }

  out.labels.assign(n, k);
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (points[i] - out.centers[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.labels[i] != best) {
        out.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<geo::Point> sums(k, geo::Point::Zero());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[out.labels[i]] += points[i];
      ++counts[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        out.centers[c] = sums[c] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: reseed at the point farthest from its center.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (points[i] - out.centers[out.labels[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      out.centers[c] = points[far];
      out.labels[far] = c;
    }
  }
  return out;
}

Assignment balanced_assignment(std::span<const geo::Point> points,
                               std::span<const geo::Point> centers, double epsilon) {
  const std::size_t n = points.size();
  const std::size_t zones = centers.size();
  if (zones == 0) throw std::invalid_argument("balanced_assignment needs at least one zone");
  const BalanceWindow window = window_for(n, zones, epsilon);
  if (window.lower > window.upper || window.lower * zones > n || window.upper * zones < n) {
    throw InfeasibleBalance(epsilon, minimal_feasible_epsilon(n, zones));
  }

  const auto cost = [&](std::size_t p, std::size_t z) { return geo::distance(points[p], centers[z]); };
  // Filling a zone below its lower bound earns -kMandatory; this makes every
  // optimum fill all lower bounds first whenever that is possible.
  constexpr double kMandatory = 1e9;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  Assignment out;
  out.zone_of.assign(n, kNone);
  out.counts.assign(zones, 0);
  std::vector<std::uint32_t> version(n, 0);
  std::vector<MinHeap> heaps(zones * zones);
  const auto push_moves = [&](std::size_t p) {
    const std::size_t from = out.zone_of[p];
    const double base = cost(p, from);
    for (std::size_t to = 0; to < zones; ++to) {
      if (to == from) continue;
      heaps[from * zones + to].push({cost(p, to) - base, p, version[p]});
    }
  };

  std::vector<double> weight(zones * zones);
  std::vector<std::size_t> mover(zones * zones);
  std::vector<double> dist(zones);
  std::vector<std::size_t> pred(zones);

  for (std::size_t p = 0; p < n; ++p) {
    // Residual zone graph: a -> b moves the cheapest member of a into b.
    for (std::size_t a = 0; a < zones; ++a) {
      for (std::size_t b = 0; b < zones; ++b) {
        const std::size_t e = a * zones + b;
        weight[e] = kInf;
        if (a == b) continue;
        MinHeap& heap = heaps[e];
        while (!heap.empty()) {
          const MoveCandidate& top = heap.top();
          if (out.zone_of[top.point] == a && version[top.point] == top.version) break;
          heap.pop();
        }
        if (!heap.empty()) {
          weight[e] = heap.top().key;
          mover[e] = heap.top().point;
        }
      }
    }
    for (std::size_t z = 0; z < zones; ++z) {
      dist[z] = cost(p, z);
      pred[z] = kNone;
    }
    // Bellman-Ford; the current assignment is optimal, so no negative cycles.
    for (std::size_t round = 0; round < zones; ++round) {
      bool relaxed = false;
      for (std::size_t a = 0; a < zones; ++a) {
        for (std::size_t b = 0; b < zones; ++b) {
          const double w = weight[a * zones + b];
          if (w == kInf) continue;
          if (dist[a] + w < dist[b] - 1e-12) {
            dist[b] = dist[a] + w;
            pred[b] = a;
            relaxed = true;
          }
        }
      }
      if (!relaxed) break;
    }

    std::size_t sink = kNone;
    double best = kInf;
    for (std::size_t z = 0; z < zones; ++z) {
      if (out.counts[z] >= window.upper) continue;
      const double total = dist[z] + (out.counts[z] < window.lower ? -kMandatory : 0.0);
      if (total < best) {
        best = total;
        sink = z;
      }
    }
    if (sink == kNone) throw InfeasibleBalance(epsilon, minimal_feasible_epsilon(n, zones));

    std::vector<std::size_t> path{sink};
    while (pred[path.back()] != kNone) {
      path.push_back(pred[path.back()]);
      if (path.size() > zones) throw std::logic_error("balanced_assignment: cyclic predecessor chain");
    }
    std::reverse(path.begin(), path.end());  // path[0] receives p
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t moved = mover[path[k] * zones + path[k + 1]];
      out.zone_of[moved] = path[k + 1];
      ++version[moved];
      push_moves(moved);
    }
    out.zone_of[p] = path.front();
    push_moves(p);
    ++out.counts[sink];
  }

  for (std::size_t p = 0; p < n; ++p) out.objective += cost(p, out.zone_of[p]);
  return out;
}

Zoning cluster_default(std::span<const geo::Point> points, std::size_t zones, double epsilon,
                       RandomStream& rng) {
  if (points.size() < zones) throw std::invalid_argument("cluster_default needs L >= N points");
  // Validate the window before spending time on k-means.
  const BalanceWindow window = window_for(points.size(), zones, epsilon);
  if (window.lower > window.upper || window.lower * zones > points.size() ||
      window.upper * zones < points.size()) {
    throw InfeasibleBalance(epsilon, minimal_feasible_epsilon(points.size(), zones));
  }
  Zoning zoning;
  zoning.centers = kmeans(points, zones, rng).centers;
  zoning.assignment = balanced_assignment(points, zoning.centers, epsilon);
  return zoning;
}

}  // namespace endgame::cluster
