#include "endgame/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace endgame::plot {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::string safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return s;
}

}  // namespace

std::vector<std::string> figure_names() {
  return {"loss_vs_s", "balancedness_vs_s", "discounts_vs_s", "gap_vs_t",
          "flexes_vs_t", "route_hist",       "unload_hist",    "travel_hist"};
}

FigureSpec figure_spec(const std::string& name) {
  FigureSpec f;
  f.name = name;
  if (name == "loss_vs_s") {
    f.x_column = "S", f.metric = "loss", f.log_x = true, f.x_label = "S", f.y_label = "C - C*";
  } else if (name == "balancedness_vs_s") {
    f.x_column = "S", f.metric = "balancedness", f.log_x = true, f.x_label = "S",
    f.y_label = "NS - E[R]";
  } else if (name == "discounts_vs_s") {
    f.x_column = "S", f.metric = "discounts", f.log_x = true, f.x_label = "S", f.y_label = "E[D]";
  } else if (name == "gap_vs_t") {
    f.x_column = "T", f.metric = "final_gap", f.log_x = true, f.x_label = "T", f.y_label = "E[Gap(T)]";
  } else if (name == "flexes_vs_t") {
    f.x_column = "T", f.metric = "flex_count", f.log_x = true, f.x_label = "T", f.y_label = "E[M]";
  } else if (name == "route_hist" || name == "unload_hist" || name == "travel_hist") {
    f.kind = FigureKind::Histogram;
    f.metric = name == "route_hist" ? "total_h" : name == "unload_hist" ? "unload_h" : "travel_h";
    f.x_label = "hours";
    f.y_label = "share of routes";
  } else {
    std::string known;
    for (const auto& n : figure_names()) known += " " + n;
    throw std::invalid_argument("unknown figure '" + name + "'; known:" + known);
  }
  return f;
}

Emitted emit_plot_data(const Table& table, const FigureSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  Emitted out;
  // group -> rows of numbers
  std::map<std::string, std::vector<std::vector<double>>> curves;

  if (!table.rows.empty()) {
    const std::size_t g = table.column(spec.group_column);
    if (spec.kind == FigureKind::Curve) {
      const std::size_t xc = table.column(spec.x_column), mc = table.column("metric");
      const std::size_t mean = table.column("mean"), se = table.column("se");
      for (const auto& row : table.rows) {
        if (row[mc] != spec.metric) continue;
        curves[row[g]].push_back({std::stod(row[xc]), std::stod(row[mean]), std::stod(row[se])});
      }
      for (auto& [_, pts] : curves) std::sort(pts.begin(), pts.end());
    } else {
      const std::size_t vc = table.column(spec.metric);
      std::map<std::string, std::vector<double>> values;
      for (const auto& row : table.rows) values[row[g]].push_back(std::stod(row[vc]));
      for (auto& [group, vals] : values) {
        std::map<long long, std::size_t> bins;
        for (double v : vals) ++bins[static_cast<long long>(std::floor(v / spec.bin_width))];
        auto& pts = curves[group];
        for (const auto& [b, count] : bins) {
          const double left = static_cast<double>(b) * spec.bin_width;
          pts.push_back({left, left + 0.5 * spec.bin_width, static_cast<double>(count),
                         static_cast<double>(count) / static_cast<double>(vals.size())});
        }
      }
    }
  }

  const std::string header = spec.kind == FigureKind::Curve ? "# x mean se" : "# bin_left bin_center count share";
  if (curves.empty()) {
    const fs::path path = fs::path(out_dir) / (spec.name + ".dat");
    open_out(path) << header << "\n";
    out.data_files.push_back(path.string());
  }
  for (const auto& [group, pts] : curves) {
    const fs::path path = fs::path(out_dir) / (spec.name + "_" + safe(group) + ".dat");
    auto os = open_out(path);
    os << header << "\n";
    for (const auto& p : pts) {
      for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << format_number(p[i]);
      os << "\n";
    }
    out.data_files.push_back(path.string());
  }

  const fs::path script = fs::path(out_dir) / (spec.name + ".gp");
  auto gp = open_out(script);
  gp << "set terminal pngcairo size 900,600\n";
  gp << "set output '" << spec.name << ".png'\n";
  gp << "set xlabel '" << spec.x_label << "'\n";
  gp << "set ylabel '" << spec.y_label << "'\n";
  gp << "set key outside right\n";
  if (spec.log_x) gp << "set logscale x\n";
  if (curves.empty()) {
    gp << "# no data rows\n";
  } else {
    if (spec.kind == FigureKind::Histogram) gp << "set style fill transparent solid 0.4\n";
    gp << "plot ";
    bool first = true;
    for (const auto& [group, _] : curves) {
      const std::string file = spec.name + "_" + safe(group) + ".dat";
      gp << (first ? "" : ", \\\n     ") << "'" << file << "'";
      if (spec.kind == FigureKind::Curve) {
        gp << " using 1:2:3 with yerrorlines title '" << group << "'";
      } else {
        gp << " using 2:4 with boxes title '" << group << "'";
      }
      first = false;
    }
    gp << "\n";
  }
  out.script = script.string();
  return out;
}

}  // namespace endgame::plot
