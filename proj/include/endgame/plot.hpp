#pragma once

// Plot-data emission: whitespace-delimited data files, one per curve, plus a
// gnuplot script that references them.

#include <string>
#include <vector>

#include "endgame/table.hpp"

namespace endgame::plot {

enum class FigureKind { Curve, Histogram };

struct FigureSpec {
  std::string name;
  FigureKind kind = FigureKind::Curve;
  std::string x_column;       // curves: numeric cell column
  std::string metric;         // curves: summary metric; histograms: raw value column
  std::string group_column = "policy";
  double bin_width = 0.25;    // histograms, in the value's unit (hours for routes)
  bool log_x = false;
  std::string x_label;
  std::string y_label;
};

/// Built-in figures: loss_vs_s, balancedness_vs_s, discounts_vs_s, gap_vs_t,
/// flexes_vs_t, route_hist, unload_hist, travel_hist. Throws on unknown names.
FigureSpec figure_spec(const std::string& name);
std::vector<std::string> figure_names();

struct Emitted {
  std::vector<std::string> data_files;
  std::string script;
};

/// Curves read a summary table (mean and se per cell); histograms read a raw
/// per-route table. Files are written into `out_dir`.
Emitted emit_plot_data(const Table& table, const FigureSpec& spec, const std::string& out_dir);

}  // namespace endgame::plot
