#include "ckdyn/format.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ckdyn/errors.hpp"

namespace ckdyn {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("format_double: buffer too small");
  return std::string(buf, ptr);
}

void write_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) os << ' ';
    os << format_double(values[i]);
  }
  os << '\n';
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{}) throw ConfigError("malformed number in row: " + line);
    out.push_back(v);
    p = next;
  }
  return out;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ConfigError("table has no column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(idx));
  return out;
}

void write_table(std::ostream& os, const Table& table) {
  for (const auto& h : table.header) os << "# " << h << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i != 0) os << ' ';
    os << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) write_row(os, row);
}

Table read_table(std::istream& is) {
  Table table;
  std::string line;
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.header.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    if (!have_columns) {
      std::istringstream ls(line);
      std::string name;
      while (ls >> name) table.columns.push_back(name);
      have_columns = true;
      continue;
    }
    auto row = parse_row(line);
    if (row.size() != table.columns.size()) {
      throw ConfigError("row width does not match column count");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_table(in);
}

void write_table_file(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_table(out, table);
}

}  // namespace ckdyn
