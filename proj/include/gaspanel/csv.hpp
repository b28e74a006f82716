#pragma once

// Minimal reader for the comma-separated dialect used by the input extracts:
// UTF-8, mandatory header row, dot decimal separator, optional double quotes.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gaspanel/errors.hpp"

namespace gaspanel {

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in, std::string source) {
  CsvTable table;
  table.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(table.source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw DataError(table.source + ": missing header row");
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return parse_csv(in, path.string());
}

/// Parses a numeric cell. Empty cells are missing; anything else must be a
/// complete finite decimal number.
inline std::optional<double> parse_number_cell(std::string_view cell, bool& ok) {
  ok = true;
  cell = detail::trim(cell);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    ok = false;
    return std::nullopt;
  }
  return value;
}

inline std::optional<int> parse_int_cell(std::string_view cell) {
  cell = detail::trim(cell);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

}  // namespace gaspanel
