#include "sdidkit/panel.hpp"

#include <algorithm>
#include <fstream>

#include "sdidkit/csv.hpp"

namespace sdidkit {

std::string TimeIndex::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

TimeIndex parse_time(const std::string &year_s, const std::string &month_s) {
  TimeIndex t;
  t.year = static_cast<int>(csv::to_long(year_s, 0, 0));
  t.month = static_cast<int>(csv::to_long(month_s, 0, 0));
  if (t.month < 1 || t.month > 12)
    throw ValidationError("month out of range 1..12: " + month_s);
  return t;
}

PanelDataset::PanelDataset(
    std::vector<UnitId> units, std::vector<TimeIndex> periods,
    std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells,
    std::string outcome_label)
    : units_(std::move(units)), periods_(std::move(periods)),
      cells_(std::move(cells)), outcome_label_(std::move(outcome_label)) {
  std::sort(units_.begin(), units_.end());
  units_.erase(std::unique(units_.begin(), units_.end()), units_.end());
  std::sort(periods_.begin(), periods_.end());
  periods_.erase(std::unique(periods_.begin(), periods_.end()),
                 periods_.end());
  if (units_.size() < 2)
    throw ValidationError("panel needs at least 2 units");
  if (periods_.size() < 2)
    throw ValidationError("panel needs at least 2 periods");
  for (const auto &[key, cell] : cells_) {
    if (!std::binary_search(units_.begin(), units_.end(), key.first))
      throw ValidationError("cell references unknown unit '" + key.first + "'");
    if (!std::binary_search(periods_.begin(), periods_.end(), key.second))
      throw ValidationError("cell references unlisted period " +
                            key.second.str());
    if (key.first.empty()) throw ValidationError("empty unit id");
    if (cell.n_obs < 1)
      throw ValidationError("cell (" + key.first + ", " + key.second.str() +
                            ") has n_obs < 1");
  }
}

PanelDataset PanelDataset::from_cells(
    std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells,
    std::string outcome_label) {
  std::vector<UnitId> units;
  std::vector<TimeIndex> periods;
  for (const auto &[key, cell] : cells) {
    units.push_back(key.first);
    periods.push_back(key.second);
  }
  return PanelDataset(std::move(units), std::move(periods), std::move(cells),
                      std::move(outcome_label));
}

bool PanelDataset::has_unit(const UnitId &u) const {
  return std::binary_search(units_.begin(), units_.end(), u);
}

std::vector<TimeIndex> PanelDataset::observed_periods(const UnitId &u) const {
  std::vector<TimeIndex> out;
  for (const auto &t : periods_)
    if (has(u, t)) out.push_back(t);
  return out;
}

void TreatmentSpec::validate(const PanelDataset &panel) const {
  for (const auto &u : treated)
    if (controls.count(u))
      throw ValidationError("unit '" + u + "' is both treated and control");
  for (const auto &u : treated)
    if (!panel.has_unit(u))
      throw ValidationError("treated unit '" + u + "' not in panel");
  for (const auto &u : controls)
    if (!panel.has_unit(u))
      throw ValidationError("control unit '" + u + "' not in panel");
  if (treated.empty()) throw ValidationError("treated set is empty");
  if (controls.empty()) throw ValidationError("control set is empty");
  const auto &ps = panel.periods();
  if (!(ps.front() < onset))
    throw ValidationError("onset " + onset.str() +
                          " leaves no pre-period in the panel");
  if (ps.back() < onset)
    throw ValidationError("onset " + onset.str() +
                          " leaves no post-period in the panel");
}

bool check_balanced(const PanelDataset &panel, const std::set<UnitId> &units) {
  for (const auto &u : units)
    if (!panel.has_unit(u))
      throw ValidationError("unknown unit '" + u + "'");
  for (const auto &u : units)
    for (const auto &t : panel.periods())
      if (!panel.has(u, t)) return false;
  return true;
}

std::vector<UnitId> donor_pool_for(const PanelDataset &panel,
                                   const UnitId &treated_unit,
                                   const TreatmentSpec &spec) {
  if (!spec.treated.count(treated_unit))
    throw ValidationError("unit '" + treated_unit + "' is not treated");
  auto obs = panel.observed_periods(treated_unit);
  int n_pre = 0;
  for (const auto &t : obs)
    if (t < spec.onset) ++n_pre;
  if (n_pre < 2)
    throw ValidationError("insufficient pre-period data for unit '" +
                          treated_unit + "'");
  std::vector<UnitId> pool;
  for (const auto &j : spec.controls) {
    bool ok = true;
    for (const auto &t : obs)
      if (!panel.has(j, t)) { ok = false; break; }
    if (ok) pool.push_back(j);
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

PrePostSplit split_pre_post(const PanelDataset &panel,
                            const TreatmentSpec &spec) {
  spec.validate(panel);
  PrePostSplit s;
  for (const auto &t : panel.periods())
    (t < spec.onset ? s.pre : s.post).push_back(t);
  return s;
}

PanelDataset read_panel_csv(const std::string &path) {
  auto t = csv::read_file(path);
  int cu = t.require_column("unit");
  int cy = t.require_column("year");
  int cm = t.require_column("month");
  int cv = t.require_column("value");
  int cn = t.require_column("n_obs");
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto &row = t.rows[r];
    TimeIndex ti = parse_time(row[cy], row[cm]);
    PanelCell cell;
    cell.value = csv::to_double(row[cv], r + 2, cv);
    cell.n_obs = csv::to_long(row[cn], r + 2, cn);
    auto key = std::make_pair(row[cu], ti);
    if (!cells.emplace(key, cell).second)
      throw ValidationError(path + ": duplicate cell (" + row[cu] + ", " +
                            ti.str() + ")");
  }
  return PanelDataset::from_cells(std::move(cells));
}

void write_panel_csv(const PanelDataset &panel, const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write file: " + path);
  f << "unit,year,month,value,n_obs\n";
  for (const auto &[key, cell] : panel.cells()) {
    f << key.first << ',' << key.second.year << ',' << key.second.month << ','
      << csv::fmt_double(cell.value) << ',' << cell.n_obs << '\n';
  }
}

} // namespace sdidkit
