#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glmmsel {

/// Minimal comma-separated reader: first line is the header, fields may be
/// double-quoted, blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Column position, or raises MissingColumn.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

CsvTable read_csv_table(const std::string& path);
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a finite double; raises ParseError naming the line and column.
double parse_number(std::string_view cell, std::size_t line, std::string_view column);

/// Shortest decimal that round-trips a double.
std::string format_double(double value);

}  // namespace glmmsel
