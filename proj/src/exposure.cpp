#include "sdidkit/exposure.hpp"

#include <algorithm>
#include <cmath>

#include "sdidkit/csv.hpp"

namespace sdidkit {

TaskClass parse_task_class(const std::string &s) {
  if (s == "automative") return TaskClass::automative;
  if (s == "augmentative") return TaskClass::augmentative;
  if (s == "neither") return TaskClass::neither;
  throw ValidationError("unknown task classification '" + s + "'");
}

std::string task_class_name(TaskClass c) {
  switch (c) {
  case TaskClass::automative: return "automative";
  case TaskClass::augmentative: return "augmentative";
  default: return "neither";
  }
}

double score_of(const ExposureScore &s, ExposureVariant v) {
  switch (v) {
  case ExposureVariant::overall: return s.overall;
  case ExposureVariant::automative: return s.automative;
  default: return s.augmentative;
  }
}

std::vector<ExposureScore> compute_exposure(
    const std::vector<TaskRecord> &tasks) {
  struct Acc {
    int n = 0, prompted = 0, autom = 0, aug = 0;
  };
  std::map<UnitId, Acc> by_occ;
  std::set<std::pair<UnitId, std::string>> seen;
  for (const auto &t : tasks) {
    if (t.prompt_share < 0)
      throw ValidationError("negative prompt_share for task '" + t.task_id +
                            "' of occupation '" + t.occupation + "'");
    if (!seen.emplace(t.occupation, t.task_id).second)
      throw ValidationError("duplicate task (" + t.occupation + ", " +
                            t.task_id + ")");
    auto &a = by_occ[t.occupation];
    ++a.n;
    if (t.prompt_share > 0) {
      ++a.prompted;
      if (t.classification == TaskClass::automative) ++a.autom;
      if (t.classification == TaskClass::augmentative) ++a.aug;
    }
  }
  if (by_occ.empty()) throw ValidationError("no task records");
  std::vector<ExposureScore> out;
  out.reserve(by_occ.size());
  for (const auto &[occ, a] : by_occ) {
    ExposureScore s;
    s.occupation = occ;
    s.n_tasks = a.n;
    s.overall = static_cast<double>(a.prompted) / a.n;
    s.automative = static_cast<double>(a.autom) / a.n;
    s.augmentative = static_cast<double>(a.aug) / a.n;
    out.push_back(s);
  }
  return out;
}

static double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TreatmentPartition binarize_above_median(
    const std::vector<ExposureScore> &scores, ExposureVariant variant) {
  if (scores.size() < 2)
    throw ValidationError("median split needs at least 2 occupations");
  std::vector<double> vals;
  vals.reserve(scores.size());
  for (const auto &s : scores) vals.push_back(score_of(s, variant));
  TreatmentPartition p;
  p.median = median_of(vals);
  for (const auto &s : scores) {
    // strict > : a mass point at the median lands in controls
    if (score_of(s, variant) > p.median)
      p.treated.insert(s.occupation);
    else
      p.controls.insert(s.occupation);
  }
  return p;
}

// Linear-interpolation percentile over sorted data, matching the usual
// type-7 definition: index h = q*(n-1).
static double percentile(const std::vector<double> &sorted, double q) {
  double h = q * (static_cast<double>(sorted.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::map<UnitId, int> quartile_bins(const std::vector<ExposureScore> &scores,
                                    ExposureVariant variant) {
  if (scores.size() < 4)
    throw ValidationError("quartile binning needs at least 4 occupations");
  std::vector<double> vals;
  vals.reserve(scores.size());
  for (const auto &s : scores) vals.push_back(score_of(s, variant));
  std::sort(vals.begin(), vals.end());
  double c25 = percentile(vals, 0.25);
  double c50 = percentile(vals, 0.50);
  double c75 = percentile(vals, 0.75);
  std::map<UnitId, int> bins;
  for (const auto &s : scores) {
    double v = score_of(s, variant);
    int b = v <= c25 ? 1 : v <= c50 ? 2 : v <= c75 ? 3 : 4;
    bins[s.occupation] = b;
  }
  return bins;
}

std::vector<TaskRecord> read_tasks_csv(const std::string &path) {
  auto t = csv::read_file(path);
  int co = t.require_column("occupation");
  int ct = t.require_column("task_id");
  int cp = t.require_column("prompt_share");
  int cc = t.require_column("classification");
  std::vector<TaskRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto &row = t.rows[r];
    TaskRecord rec;
    rec.occupation = row[co];
    rec.task_id = row[ct];
    rec.prompt_share = csv::to_double(row[cp], r + 2, cp);
    rec.classification = parse_task_class(row[cc]);
    out.push_back(std::move(rec));
  }
  return out;
}

} // namespace sdidkit
