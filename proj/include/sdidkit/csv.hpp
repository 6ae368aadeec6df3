#pragma once

#include <string>
#include <vector>

#include "sdidkit/errors.hpp"

namespace sdidkit::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string &name) const; // -1 when absent
  int require_column(const std::string &name) const; // throws ValidationError
};

// Minimal reader for the comma-separated formats used by this toolkit.
// No quoting; fields may not contain commas. Blank lines are skipped.
Table read_file(const std::string &path);
Table parse(const std::string &text, const std::string &origin = "<string>");

double to_double(const std::string &field, std::size_t row, int col);
long to_long(const std::string &field, std::size_t row, int col);

// Fixed 6-significant-digit float formatting for diffable outputs.
std::string fmt_double(double x);

} // namespace sdidkit::csv
