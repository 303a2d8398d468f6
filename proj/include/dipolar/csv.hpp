#pragma once

/// CSV interchange for time series.
///
/// Header vocabulary (any subset containing t_s and at least one data column):
///   t_s, N3, N2, N1, T_uK, sigma_x_m, sigma_y_m, sigma_z_m, V_cm3
/// Values are converted to SI on ingest and back to these units on output.
/// Output uses 9 significant digits.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dipolar/errors.hpp"
#include "dipolar/timeseries.hpp"
#include "dipolar/units.hpp"

namespace dipolar::csv {

struct ColumnSpec {
  std::string_view header;
  std::optional<Column> column;  // nullopt: the time axis
  double to_si;
};

inline constexpr std::array<ColumnSpec, 9> vocabulary{{
    {"t_s", std::nullopt, 1.0},
    {"N3", Column::n3, 1.0},
    {"N2", Column::n2, 1.0},
    {"N1", Column::n1, 1.0},
    {"T_uK", Column::temperature, 1e-6},
    {"sigma_x_m", Column::sigma_x, 1.0},
    {"sigma_y_m", Column::sigma_y, 1.0},
    {"sigma_z_m", Column::sigma_z, 1.0},
    {"V_cm3", Column::volume, 1e-6},
}};

inline const ColumnSpec& spec_for(Column c) {
  for (const auto& s : vocabulary)
    if (s.column == c) return s;
  throw InvalidInput("column has no CSV header");
}

/// Formats with 9 significant digits, the single number format of all output.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses CSV text. Rows are sorted by time; duplicate times, non-numeric
/// cells and unknown headers raise ParseError with row/column coordinates
/// (row 1 is the header).
inline TimeSeries parse_timeseries_csv_text(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t nl = text.find('\n', start);
      lines.push_back(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  std::size_t header_line = 0;
  while (header_line < lines.size() && detail::trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw ParseError("empty CSV file");

  const auto header = detail::split(lines[header_line]);
  std::vector<const ColumnSpec*> specs;
  bool has_time = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const ColumnSpec* found = nullptr;
    for (const auto& s : vocabulary)
      if (s.header == header[c]) found = &s;
    if (!found)
      throw ParseError("unknown column '" + std::string(header[c]) + "'", header_line + 1, c + 1);
    for (const auto* prev : specs)
      if (prev == found)
        throw ParseError("duplicate column '" + std::string(header[c]) + "'", header_line + 1,
                         c + 1);
    if (!found->column) has_time = true;
    specs.push_back(found);
  }
  if (!has_time) throw ParseError("missing t_s column", header_line + 1);
  if (specs.size() < 2) throw ParseError("need t_s plus at least one data column", header_line + 1);

  TimeSeries ts;
  std::map<double, std::size_t> seen_times;  // time -> line
  for (std::size_t ln = header_line + 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto cells = detail::split(lines[ln]);
    if (cells.size() != specs.size())
      throw ParseError("expected " + std::to_string(specs.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       ln + 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw ParseError("non-numeric cell '" + std::string(cells[c]) + "'", ln + 1, c + 1);
      const double si = *v * specs[c]->to_si;
      if (specs[c]->column) {
        ts.columns[*specs[c]->column].push_back(si);
      } else {
        if (auto it = seen_times.find(si); it != seen_times.end())
          throw ParseError("duplicate time " + std::string(cells[c]) + " (first on line " +
                               std::to_string(it->second) + ")",
                           ln + 1, c + 1);
        seen_times.emplace(si, ln + 1);
        ts.times.push_back(si);
      }
    }
  }
  // Columns that exist in the header but had no rows still need an entry.
  for (const auto* s : specs)
    if (s->column) ts.columns[*s->column];
  return ts.sorted();
}

inline TimeSeries parse_timeseries_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_timeseries_csv_text(buf.str());
}

/// Writes t_s followed by the series' columns in vocabulary order, or in
/// `order` when given.
inline void write_timeseries_csv(std::ostream& out, const TimeSeries& ts,
                                 const std::vector<Column>& order = {}) {
  std::vector<Column> cols = order;
  if (cols.empty())
    for (const auto& s : vocabulary)
      if (s.column && ts.has(*s.column)) cols.push_back(*s.column);
  out << "t_s";
  for (Column c : cols) out << ',' << spec_for(c).header;
  out << '\n';
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << format_number(ts.times[i]);
    for (Column c : cols) out << ',' << format_number(ts.at(c)[i] / spec_for(c).to_si);
    out << '\n';
  }
}

}  // namespace dipolar::csv
