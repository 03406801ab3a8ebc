#pragma once

// Row-major string table with CSV I/O. Every file this project writes starts
// with a schema_version column; bump kSchemaVersion whenever a column is
// added, removed or reordered.

#include <iosfwd>
#include <string>
#include <vector>

namespace endgame {

inline constexpr int kSchemaVersion = 1;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name`; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  void add_row(std::vector<std::string> row);

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
  static Table read_csv(std::istream& is);
};

/// Shortest round-trip text for a double ("nan"/"inf" for non-finite).
std::string format_number(double value);

void save_table(const std::string& path, const Table& table);
Table load_table(const std::string& path);

}  // namespace endgame
