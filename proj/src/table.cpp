#include "endgame/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace endgame {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string clean(std::string field) {
  std::replace(field.begin(), field.end(), ',', ';');
  std::replace(field.begin(), field.end(), '\n', ' ');
  return field;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool Table::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("row has " + std::to_string(row.size()) + " fields, table has " +
                           std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << clean(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << clean(row[c]);
    os << '\n';
  }
}

std::string Table::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

Table Table::read_csv(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) return t;
  t.columns = split_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    row.resize(t.columns.size());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  if (value == std::trunc(value) && std::fabs(value) < 1e15) {
    const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
    return std::string(buf, res.ptr);
  }
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void save_table(const std::string& path, const Table& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  table.write_csv(os);
}

Table load_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return Table::read_csv(is);
}

}  // namespace endgame
