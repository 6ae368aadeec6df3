#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sdidkit/errors.hpp"

namespace sdidkit {

// Opaque unit identifier (occupation code in the intended use).
using UnitId = std::string;

struct TimeIndex {
  int year = 0;
  int month = 1; // 1..12

  auto operator<=>(const TimeIndex &) const = default;

  // Signed distance in months (this - other).
  int months_since(const TimeIndex &other) const {
    return (year - other.year) * 12 + (month - other.month);
  }

  TimeIndex plus_months(int k) const {
    int m0 = year * 12 + (month - 1) + k;
    int y = m0 / 12;
    int m = m0 % 12;
    if (m < 0) { m += 12; y -= 1; }
    return TimeIndex{y, m + 1};
  }

  std::string str() const;
};

TimeIndex parse_time(const std::string &year_s, const std::string &month_s);

struct PanelCell {
  double value = 0.0;
  std::int64_t n_obs = 1; // micro observations behind the cell, >= 1
};

// Unit-by-period outcome grid. Cells may be missing (unbalanced panel);
// a missing cell is absent, never zero. Immutable after construction.
class PanelDataset {
public:
  PanelDataset(std::vector<UnitId> units, std::vector<TimeIndex> periods,
               std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells,
               std::string outcome_label = "outcome");

  // Builds the unit/period lists from the cell keys.
  static PanelDataset from_cells(
      std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells,
      std::string outcome_label = "outcome");

  const std::vector<UnitId> &units() const { return units_; }
  const std::vector<TimeIndex> &periods() const { return periods_; }
  const std::string &outcome_label() const { return outcome_label_; }
  std::size_t n_cells() const { return cells_.size(); }

  bool has(const UnitId &u, const TimeIndex &t) const {
    return cells_.count({u, t}) > 0;
  }
  const PanelCell *cell(const UnitId &u, const TimeIndex &t) const {
    auto it = cells_.find({u, t});
    return it == cells_.end() ? nullptr : &it->second;
  }
  const std::map<std::pair<UnitId, TimeIndex>, PanelCell> &cells() const {
    return cells_;
  }

  bool has_unit(const UnitId &u) const;

  // Periods in which a unit has a cell, in panel order.
  std::vector<TimeIndex> observed_periods(const UnitId &u) const;

private:
  std::vector<UnitId> units_;          // lexicographic
  std::vector<TimeIndex> periods_;     // strictly increasing
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells_;
  std::string outcome_label_;
};

// Treated set, control set and common onset (first treated period).
struct TreatmentSpec {
  std::set<UnitId> treated;
  std::set<UnitId> controls;
  TimeIndex onset{2022, 12}; // first treated month (ChatGPT: December 2022)

  // Throws ValidationError if the spec is inconsistent with the panel:
  // overlapping sets, unknown units, or onset without >=1 pre and post period.
  void validate(const PanelDataset &panel) const;
};

bool check_balanced(const PanelDataset &panel, const std::set<UnitId> &units);

// Controls jointly observed with the treated unit in every period where the
// treated unit is observed. Deterministic (lexicographic) ordering.
std::vector<UnitId> donor_pool_for(const PanelDataset &panel,
                                   const UnitId &treated_unit,
                                   const TreatmentSpec &spec);

struct PrePostSplit {
  std::vector<TimeIndex> pre;  // t < onset
  std::vector<TimeIndex> post; // t >= onset
};

PrePostSplit split_pre_post(const PanelDataset &panel,
                            const TreatmentSpec &spec);

// Long-format CSV: header `unit,year,month,value,n_obs`, missing cells absent.
PanelDataset read_panel_csv(const std::string &path);
void write_panel_csv(const PanelDataset &panel, const std::string &path);

} // namespace sdidkit
