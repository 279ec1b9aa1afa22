#include <cstdio>
#include <sstream>

#include "ubsim/harness.hpp"

namespace ubsim::harness {

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::size_t Table::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw std::out_of_range("no column " + name + " in " + experiment);
}

void Table::add(std::vector<std::string> cells) {
  cells.insert(cells.begin(), experiment);
  if (cells.size() != columns.size())
    throw std::logic_error(experiment + ": row width does not match header");
  rows.push_back(std::move(cells));
}

const std::string& Table::cell(std::size_t row, const std::string& column) const {
  return rows.at(row).at(col(column));
}

double Table::number(std::size_t row, const std::string& column) const {
  return std::stod(cell(row, column));
}

std::vector<std::size_t> Table::where(const std::map<std::string, std::string>& match) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool ok = true;
    for (const auto& [k, v] : match) ok = ok && rows[r][col(k)] == v;
    if (ok) out.push_back(r);
  }
  return out;
}

namespace {

const std::string kMagic = "# ubsim-csv";

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_q = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_q) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_q = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_q = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void write_row(std::ostringstream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << quote(cells[i]);
  os << '\n';
}

}  // namespace

std::string to_csv(const Table& t, std::uint64_t seed) {
  std::ostringstream os;
  os << kMagic << " schema=" << kSchemaVersion << " experiment=" << t.experiment
     << " seed=" << seed << '\n';
  write_row(os, t.columns);
  for (const auto& r : t.rows) write_row(os, r);
  return os.str();
}

Table parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind(kMagic, 0) != 0)
    throw SchemaMismatch("missing schema comment");
  const std::string want = "schema=" + std::to_string(kSchemaVersion) + " ";
  const auto at = line.find("schema=");
  if (at == std::string::npos || line.compare(at, want.size(), want) != 0)
    throw SchemaMismatch("unsupported schema: " + line);
  Table t;
  const auto e = line.find("experiment=");
  if (e != std::string::npos) {
    const auto end = line.find(' ', e);
    t.experiment = line.substr(e + 11, end == std::string::npos ? std::string::npos : end - e - 11);
  }
  if (!std::getline(is, line) || line.empty()) throw SchemaMismatch("missing header row");
  t.columns = split_line(line);
  if (t.columns.size() < 2 || t.columns[0] != "experiment" || t.columns[1] != "stack")
    throw SchemaMismatch("header must start with experiment,stack");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.columns.size())
      throw SchemaMismatch("row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(t.columns.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace ubsim::harness
