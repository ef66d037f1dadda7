#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ckdyn {

/// Shortest decimal that round-trips to the same double; locale independent.
std::string format_double(double value);

/// Writes one whitespace-separated row of round-trip decimals followed by '\n'.
void write_row(std::ostream& os, std::span<const double> values);

/// Parses a row produced by write_row. Throws ConfigError on malformed numbers.
std::vector<double> parse_row(const std::string& line);

/// Plain-text numeric table: '#'-prefixed header lines, one column-name line, then rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

void write_table(std::ostream& os, const Table& table);
Table read_table(std::istream& is);
Table read_table_file(const std::string& path);
void write_table_file(const std::string& path, const Table& table);

}  // namespace ckdyn
