#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace endgame::stats {

struct Summary {
  double mean = 0.0;
  double se = 0.0;   // sample sd / sqrt(n); 0 for n = 1
  double mad = 0.0;  // mean absolute deviation about the mean
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t n = 0;
};

/// Quantile with linear interpolation between order statistics (type 7).
double quantile(std::span<const double> sorted, double p);

/// Summary of `values`; throws std::invalid_argument when empty.
Summary summarize(std::span<const double> values);

/// Least-squares slope of log(y) on log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

/// One aggregated metric for one experiment cell.
struct SummaryRow {
  std::vector<std::pair<std::string, std::string>> cell;  // identifiers in column order
  std::string metric;
  Summary summary;
};

}  // namespace endgame::stats
