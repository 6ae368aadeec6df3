#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdidkit/panel.hpp"

namespace sdidkit {

enum class TaskClass { automative, augmentative, neither };

TaskClass parse_task_class(const std::string &s);
std::string task_class_name(TaskClass c);

struct TaskRecord {
  UnitId occupation;
  std::string task_id;
  double prompt_share = 0.0; // share of prompts tied to the task; 0 = none
  TaskClass classification = TaskClass::neither;
};

// Per-occupation share of tasks with any associated prompts, plus the
// automative/augmentative restrictions. All three shares use n_tasks as
// the denominator, so variant <= overall always.
struct ExposureScore {
  UnitId occupation;
  double overall = 0.0;
  double automative = 0.0;
  double augmentative = 0.0;
  int n_tasks = 0;
};

enum class ExposureVariant { overall, automative, augmentative };

double score_of(const ExposureScore &s, ExposureVariant v);

std::vector<ExposureScore> compute_exposure(const std::vector<TaskRecord> &tasks);

struct TreatmentPartition {
  std::set<UnitId> treated;  // score strictly above the median
  std::set<UnitId> controls;
  double median = 0.0;
};

TreatmentPartition binarize_above_median(const std::vector<ExposureScore> &scores,
                                         ExposureVariant variant);

// Quartile bins 1..4 with cutpoints at the 25th/50th/75th linear-interpolation
// percentiles; ties land in the lower bin.
std::map<UnitId, int> quartile_bins(const std::vector<ExposureScore> &scores,
                                    ExposureVariant variant);

std::vector<TaskRecord> read_tasks_csv(const std::string &path);

} // namespace sdidkit
