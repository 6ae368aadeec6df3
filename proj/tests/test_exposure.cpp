#include <doctest.h>

#include <algorithm>
#include <random>

#include "sdidkit/exposure.hpp"

using namespace sdidkit;

namespace {

TaskRecord task(const std::string &occ, const std::string &id, double share,
                TaskClass cls = TaskClass::neither) {
  return TaskRecord{occ, id, share, cls};
}

std::vector<ExposureScore> scores_from(const std::vector<double> &vals) {
  std::vector<ExposureScore> out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    ExposureScore s;
    s.occupation = "occ" + std::to_string(100 + i);
    s.overall = vals[i];
    s.n_tasks = 1;
    out.push_back(s);
  }
  return out;
}

} // namespace

TEST_CASE("compute_exposure ratios") {
  auto scores = compute_exposure({
      task("prog", "t1", 0.2, TaskClass::automative),
      task("prog", "t2", 0.0, TaskClass::neither),
      task("prog", "t3", 0.1, TaskClass::augmentative),
  });
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].overall == doctest::Approx(2.0 / 3));
  CHECK(scores[0].automative == doctest::Approx(1.0 / 3));
  CHECK(scores[0].augmentative == doctest::Approx(1.0 / 3));
  CHECK(scores[0].n_tasks == 3);
}

TEST_CASE("compute_exposure bounds") {
  auto zero = compute_exposure({task("a", "t1", 0.0), task("a", "t2", 0.0)});
  CHECK(zero[0].overall == 0.0); // the modal occupation
  auto full = compute_exposure(
      {task("b", "t1", 0.5), task("b", "t2", 0.01), task("b", "t3", 1.0)});
  CHECK(full[0].overall == 1.0);
}

TEST_CASE("compute_exposure rejects bad input") {
  CHECK_THROWS_AS(compute_exposure({}), ValidationError);
  CHECK_THROWS_AS(compute_exposure({task("a", "t1", -0.1)}), ValidationError);
  CHECK_THROWS_AS(
      compute_exposure({task("a", "t1", 0.1), task("a", "t1", 0.2)}),
      ValidationError);
}

TEST_CASE("variant scores never exceed overall") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<TaskRecord> tasks;
  for (int occ = 0; occ < 10; ++occ)
    for (int t = 0; t < 8; ++t) {
      TaskClass cls = static_cast<TaskClass>(rng() % 3);
      tasks.push_back(task("o" + std::to_string(occ), "t" + std::to_string(t),
                           rng() % 2 ? u(rng) : 0.0, cls));
    }
  for (const auto &s : compute_exposure(tasks)) {
    CHECK(s.automative <= s.overall);
    CHECK(s.augmentative <= s.overall);
    CHECK(s.overall <= 1.0);
  }
}

TEST_CASE("exposure is scale free in prompt_share") {
  std::vector<TaskRecord> tasks = {
      task("a", "t1", 0.2, TaskClass::automative), task("a", "t2", 0.0),
      task("b", "t1", 0.7, TaskClass::augmentative), task("b", "t2", 0.3)};
  auto s1 = compute_exposure(tasks);
  for (auto &t : tasks) t.prompt_share *= 13.7;
  auto s2 = compute_exposure(tasks);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].overall == s2[i].overall);
    CHECK(s1[i].automative == s2[i].automative);
    CHECK(s1[i].augmentative == s2[i].augmentative);
  }
}

TEST_CASE("median split uses strict inequality") {
  auto part = binarize_above_median(scores_from({0, 0, 0.2, 0.5}),
                                    ExposureVariant::overall);
  CHECK(part.median == doctest::Approx(0.1));
  CHECK(part.treated == std::set<UnitId>{"occ102", "occ103"});

  auto flat =
      binarize_above_median(scores_from({0.3, 0.3, 0.3}), ExposureVariant::overall);
  CHECK(flat.treated.empty()); // mass point at the median stays in controls
  CHECK(flat.controls.size() == 3);

  auto odd =
      binarize_above_median(scores_from({0.1, 0.3, 0.6}), ExposureVariant::overall);
  CHECK(odd.median == doctest::Approx(0.3));
  CHECK(odd.treated == std::set<UnitId>{"occ102"});
}

TEST_CASE("partition covers all occupations") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> vals;
  for (int i = 0; i < 31; ++i) vals.push_back(u(rng));
  auto part = binarize_above_median(scores_from(vals), ExposureVariant::overall);
  CHECK(part.treated.size() + part.controls.size() == vals.size());
  for (const auto &t : part.treated) CHECK(part.controls.count(t) == 0);
}

TEST_CASE("quartile bins") {
  auto bins = quartile_bins(scores_from({1, 2, 3, 4, 5, 6, 7, 8}),
                            ExposureVariant::overall);
  std::map<int, int> counts;
  for (const auto &[occ, b] : bins) ++counts[b];
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 2);
  CHECK(counts[3] == 2);
  CHECK(counts[4] == 2);

  SUBCASE("zero-heavy lower half lands in bin 1") {
    auto b2 = quartile_bins(scores_from({0, 0, 0, 0, 0.4, 0.5, 0.6, 0.7}),
                            ExposureVariant::overall);
    for (int i = 0; i < 4; ++i)
      CHECK(b2.at("occ" + std::to_string(100 + i)) == 1);
  }
  SUBCASE("fewer than 4 occupations rejected") {
    CHECK_THROWS_AS(quartile_bins(scores_from({1, 2, 3}), ExposureVariant::overall),
                    ValidationError);
  }
}

TEST_CASE("quartile bin counts on 100 random scores") {
  // reference: distinct uniform draws should land ~25 per bin
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> vals;
  for (int i = 0; i < 100; ++i) vals.push_back(u(rng));
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  auto bins = quartile_bins(scores_from(vals), ExposureVariant::overall);
  std::map<int, int> counts;
  for (const auto &[occ, b] : bins) ++counts[b];
  for (int b = 1; b <= 4; ++b) {
    CHECK(counts[b] >= 24);
    CHECK(counts[b] <= 26);
  }
}
