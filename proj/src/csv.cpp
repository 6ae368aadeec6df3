#include "sdidkit/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdidkit::csv {

int Table::column(const std::string &name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int Table::require_column(const std::string &name) const {
  int c = column(name);
  if (c < 0) throw ValidationError("missing required column '" + name + "'");
  return c;
}

static std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

Table parse(const std::string &text, const std::string &origin) {
  Table t;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw ValidationError(origin + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(t.header.size()) +
                              " fields, got " + std::to_string(fields.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty())
    throw ValidationError(origin + ": empty file (no header)");
  return t;
}

Table read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

double to_double(const std::string &field, std::size_t row, int col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception &) {
    throw ValidationError("row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": not a number: '" + field +
                          "'");
  }
}

long to_long(const std::string &field, std::size_t row, int col) {
  try {
    std::size_t pos = 0;
    long v = std::stol(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception &) {
    throw ValidationError("row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": not an integer: '" + field +
                          "'");
  }
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

} // namespace sdidkit::csv
