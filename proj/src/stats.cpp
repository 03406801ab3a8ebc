#include "endgame/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace endgame::stats {

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize needs at least one value");
  Summary s;
  s.n = values.size();
  const auto n = static_cast<double>(s.n);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double sq = 0.0, abs = 0.0;
  for (double v : values) {
    sq += (v - s.mean) * (v - s.mean);
    abs += std::abs(v - s.mean);
  }
  s.mad = abs / n;
  s.se = s.n > 1 ? std::sqrt(sq / (n - 1.0) / n) : 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.q1 = quantile(sorted, 0.25);
  s.median = quantile(sorted, 0.5);
  s.q3 = quantile(sorted, 0.75);
  return s;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope needs >= 2 pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace endgame::stats
