#include "sdidkit/ingest.hpp"

#include <cmath>

#include "sdidkit/csv.hpp"

namespace sdidkit {

EmpStatus parse_empstatus(const std::string &s) {
  if (s == "employed") return EmpStatus::employed;
  if (s == "unemployed") return EmpStatus::unemployed;
  if (s == "nilf") return EmpStatus::nilf;
  throw ValidationError("unknown empstat '" + s + "'");
}

DeflatorSeries::DeflatorSeries(std::map<TimeIndex, double> index)
    : index_(std::move(index)) {
  for (const auto &[t, v] : index_)
    if (v <= 0.0)
      throw ValidationError("deflator index must be positive at " + t.str());
  auto it = index_.find(base_period());
  if (it == index_.end())
    throw ValidationError("deflator missing base period 2010-01");
  if (std::abs(it->second - 1.0) > 1e-9)
    throw ValidationError("deflator base period 2010-01 must equal 1");
}

double DeflatorSeries::at(const TimeIndex &t) const {
  auto it = index_.find(t);
  if (it == index_.end())
    throw ValidationError("deflator missing period " + t.str());
  return it->second;
}

PanelDataset aggregate_unemployment(const std::vector<MicroRecord> &records) {
  struct Acc { std::int64_t emp = 0, unemp = 0; };
  std::map<std::pair<UnitId, TimeIndex>, Acc> acc;
  for (const auto &r : records) {
    if (r.empstat == EmpStatus::nilf) continue;
    auto &a = acc[{r.occupation, r.period}];
    if (r.empstat == EmpStatus::employed) ++a.emp; else ++a.unemp;
  }
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  for (const auto &[key, a] : acc) {
    std::int64_t lf = a.emp + a.unemp;
    if (lf == 0) continue;
    cells[key] = PanelCell{static_cast<double>(a.unemp) / lf, lf};
  }
  if (cells.empty())
    throw ValidationError("no labor-force records to aggregate");
  return PanelDataset::from_cells(std::move(cells), "unemployment_rate");
}

PanelDataset aggregate_earnings(const std::vector<MicroRecord> &records,
                                const DeflatorSeries &deflator) {
  struct Acc { double sum = 0.0; std::int64_t n = 0; };
  std::map<std::pair<UnitId, TimeIndex>, Acc> acc;
  for (const auto &r : records) {
    if (!r.weekly_earnings) continue;
    if (*r.weekly_earnings < 0)
      throw ValidationError("negative weekly_earnings for occupation '" +
                            r.occupation + "'");
    auto &a = acc[{r.occupation, r.period}];
    a.sum += *r.weekly_earnings / deflator.at(r.period);
    ++a.n;
  }
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  for (const auto &[key, a] : acc)
    cells[key] = PanelCell{a.sum / a.n, a.n};
  if (cells.empty())
    throw ValidationError("no earnings-eligible records to aggregate");
  return PanelDataset::from_cells(std::move(cells), "real_weekly_earnings");
}

TopcodeFlags flag_topcoded(const std::vector<MicroRecord> &records,
                           const TopcodeRegime &regime) {
  TopcodeFlags out;
  out.flagged.assign(records.size(), false);

  // Post-cutover: no published threshold, so flag a shared maximum within a
  // period (a mass point at the top is the signature of the mean-of-top-3%
  // code). A unique maximum is left unflagged.
  std::map<TimeIndex, std::pair<double, int>> post_max; // value, count
  for (const auto &r : records) {
    if (!r.weekly_earnings || r.period < regime.cutover) continue;
    auto &[mx, cnt] = post_max[r.period];
    if (cnt == 0 || *r.weekly_earnings > mx) {
      mx = *r.weekly_earnings;
      cnt = 1;
    } else if (*r.weekly_earnings == mx) {
      ++cnt;
    }
  }

  struct Acc { std::int64_t flagged = 0, total = 0; };
  std::map<std::pair<UnitId, TimeIndex>, Acc> acc;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i];
    if (!r.weekly_earnings) continue;
    bool f;
    if (r.period < regime.cutover) {
      f = *r.weekly_earnings >= regime.fixed_threshold;
    } else {
      const auto &[mx, cnt] = post_max.at(r.period);
      f = cnt >= 2 && *r.weekly_earnings == mx;
    }
    out.flagged[i] = f;
    auto &a = acc[{r.occupation, r.period}];
    ++a.total;
    if (f) ++a.flagged;
  }
  for (const auto &[key, a] : acc)
    out.cell_share[key] = static_cast<double>(a.flagged) / a.total;
  return out;
}

std::vector<MicroRecord> read_micro_csv(const std::string &path) {
  auto t = csv::read_file(path);
  int co = t.require_column("occupation");
  int cy = t.require_column("year");
  int cm = t.require_column("month");
  int ce = t.require_column("empstat");
  int cw = t.require_column("weekly_earnings");
  std::vector<MicroRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto &row = t.rows[r];
    MicroRecord rec;
    rec.occupation = row[co];
    rec.period = parse_time(row[cy], row[cm]);
    rec.empstat = parse_empstatus(row[ce]);
    if (!row[cw].empty())
      rec.weekly_earnings = csv::to_double(row[cw], r + 2, cw);
    out.push_back(std::move(rec));
  }
  return out;
}

DeflatorSeries read_deflator_csv(const std::string &path) {
  auto t = csv::read_file(path);
  int cy = t.require_column("year");
  int cm = t.require_column("month");
  int ci = t.require_column("index");
  std::map<TimeIndex, double> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto &row = t.rows[r];
    index[parse_time(row[cy], row[cm])] = csv::to_double(row[ci], r + 2, ci);
  }
  return DeflatorSeries(std::move(index));
}

} // namespace sdidkit
