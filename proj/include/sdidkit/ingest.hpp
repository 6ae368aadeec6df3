#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdidkit/panel.hpp"

namespace sdidkit {

enum class EmpStatus { employed, unemployed, nilf };

EmpStatus parse_empstatus(const std::string &s);

struct MicroRecord {
  UnitId occupation;
  TimeIndex period;
  EmpStatus empstat = EmpStatus::employed;
  std::optional<double> weekly_earnings; // nominal dollars, earnings-eligible only
};

// Price index normalized to 1 at January 2010.
class DeflatorSeries {
public:
  explicit DeflatorSeries(std::map<TimeIndex, double> index);

  double at(const TimeIndex &t) const; // throws if the period is missing
  bool covers(const TimeIndex &t) const { return index_.count(t) > 0; }

  static constexpr TimeIndex base_period() { return TimeIndex{2010, 1}; }

private:
  std::map<TimeIndex, double> index_;
};

struct TopcodeRegime {
  TimeIndex cutover{2024, 4};       // switch to mean-of-top-3% codes
  double fixed_threshold = 2884.0;  // nominal, pre-cutover
};

// value = unemployed / (employed + unemployed); cells with no labor force
// are omitted; nilf records never enter.
PanelDataset aggregate_unemployment(const std::vector<MicroRecord> &records);

// Unweighted mean of deflated weekly earnings per (occupation, period).
PanelDataset aggregate_earnings(const std::vector<MicroRecord> &records,
                                const DeflatorSeries &deflator);

struct TopcodeFlags {
  std::vector<bool> flagged;                              // parallel to input
  std::map<std::pair<UnitId, TimeIndex>, double> cell_share; // diagnostics
};

TopcodeFlags flag_topcoded(const std::vector<MicroRecord> &records,
                           const TopcodeRegime &regime);

std::vector<MicroRecord> read_micro_csv(const std::string &path);
DeflatorSeries read_deflator_csv(const std::string &path);

} // namespace sdidkit
