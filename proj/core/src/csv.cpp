#include "glmmsel/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "glmmsel/dataset.hpp"
#include "glmmsel/errors.hpp"

namespace glmmsel {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  raise(ErrorKind::MissingColumn, "column '" + std::string(name) + "' not found");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      // Tolerate a UTF-8 byte order mark on the header.
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      raise(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(table.header.size()) + " fields, found " +
                                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) raise(ErrorKind::EmptyDataset, "'" + path + "' has no header");
  return table;
}

double parse_number(std::string_view cell, std::size_t line, std::string_view column) {
  auto first = cell.find_first_not_of(' ');
  auto last = cell.find_last_not_of(' ');
  std::string_view trimmed =
      first == std::string_view::npos ? std::string_view{} : cell.substr(first, last - first + 1);
  if (!trimmed.empty() && trimmed.front() == '+') trimmed.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
  if (trimmed.empty() || ec != std::errc() || ptr != trimmed.data() + trimmed.size() ||
      !std::isfinite(value)) {
    raise(ErrorKind::ParseError, "line " + std::to_string(line) + ", column '" +
                                     std::string(column) + "': cannot parse '" +
                                     std::string(cell) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema, Family family) {
  const CsvTable table = read_csv_table(path);
  const std::size_t cluster_col = table.column(schema.cluster_col);
  const std::size_t response_col = table.column(schema.response_col);

  std::vector<std::size_t> predictor_cols;
  std::vector<std::string> predictor_names = schema.predictor_cols;
  if (predictor_names.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j != cluster_col && j != response_col) predictor_names.push_back(table.header[j]);
    }
  }
  for (const auto& name : predictor_names) predictor_cols.push_back(table.column(name));
  if (predictor_cols.empty()) raise(ErrorKind::MissingColumn, "no predictor columns");
  if (table.rows.empty()) raise(ErrorKind::EmptyDataset, "'" + path + "' has a header but no rows");

  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& id = table.rows[r][cluster_col];
    if (id.empty()) {
      raise(ErrorKind::EmptyCluster, "line " + std::to_string(table.line_numbers[r]) +
                                         ": empty cluster id");
    }
    auto [it, inserted] = slot.try_emplace(id, ids.size());
    if (inserted) {
      ids.push_back(id);
      members.emplace_back();
    }
    members[it->second].push_back(r);
  }

  const auto p = static_cast<Index>(predictor_cols.size());
  std::vector<ClusterData> clusters(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto& c = clusters[i];
    const auto n = static_cast<Index>(members[i].size());
    c.id = ids[i];
    c.y.resize(n);
    c.X.resize(n, p);
    c.w = Eigen::VectorXd::Ones(n);
    for (Index j = 0; j < n; ++j) {
      const std::size_t r = members[i][static_cast<std::size_t>(j)];
      const auto& row = table.rows[r];
      const std::size_t line = table.line_numbers[r];
      c.y[j] = parse_number(row[response_col], line, schema.response_col);
      for (Index k = 0; k < p; ++k) {
        const std::size_t col = predictor_cols[static_cast<std::size_t>(k)];
        c.X(j, k) = parse_number(row[col], line, table.header[col]);
      }
    }
  }
  return Dataset(std::move(clusters), family);
}

void write_csv(const std::string& path, const Dataset& data, const std::string& cluster_col,
               const std::string& response_col) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::Io, "cannot write '" + path + "'");
  out << cluster_col << ',' << response_col;
  for (Index k = 0; k < data.p(); ++k) out << ",x" << (k + 1);
  out << '\n';
  const Eigen::VectorXd& s = data.scales();
  for (const auto& c : data.clusters()) {
    for (Index j = 0; j < c.size(); ++j) {
      out << c.id << ',' << format_double(c.y[j]);
      for (Index k = 0; k < data.p(); ++k) out << ',' << format_double(c.X(j, k) * s[k]);
      out << '\n';
    }
  }
  if (!out) raise(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace glmmsel
