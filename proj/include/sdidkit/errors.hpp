#pragma once

#include <stdexcept>
#include <string>

namespace sdidkit {

// Input/format/invariant problems. CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// Estimation-stage failures (collinear design, degenerate weights, ...).
// CLI maps these to exit code 2.
class EstimationError : public std::runtime_error {
public:
  explicit EstimationError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace sdidkit
