#include <doctest.h>

#include <algorithm>
#include <random>

#include "sdidkit/ingest.hpp"

using namespace sdidkit;

namespace {

MicroRecord rec(const std::string &occ, int year, int month, EmpStatus st,
                std::optional<double> earn = std::nullopt) {
  return MicroRecord{occ, TimeIndex{year, month}, st, earn};
}

DeflatorSeries flat_deflator(double v = 1.0) {
  std::map<TimeIndex, double> ix;
  ix[{2010, 1}] = 1.0;
  for (int y = 2022; y <= 2023; ++y)
    for (int m = 1; m <= 12; ++m) ix[{y, m}] = v;
  return DeflatorSeries(std::move(ix));
}

} // namespace

TEST_CASE("unemployment aggregation") {
  std::vector<MicroRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back(rec("a", 2022, 1, EmpStatus::unemployed));
  for (int i = 0; i < 95; ++i) records.push_back(rec("a", 2022, 1, EmpStatus::employed));
  for (int i = 0; i < 50; ++i) records.push_back(rec("a", 2022, 1, EmpStatus::nilf));
  for (int i = 0; i < 10; ++i) records.push_back(rec("b", 2022, 2, EmpStatus::employed));
  auto panel = aggregate_unemployment(records);
  const PanelCell *c = panel.cell("a", {2022, 1});
  REQUIRE(c != nullptr);
  CHECK(c->value == doctest::Approx(0.05));
  CHECK(c->n_obs == 100);
  const PanelCell *z = panel.cell("b", {2022, 2});
  REQUIRE(z != nullptr);
  CHECK(z->value == 0.0);
}

TEST_CASE("only-nilf cell is absent") {
  std::vector<MicroRecord> records = {
      rec("a", 2022, 1, EmpStatus::employed), rec("a", 2022, 2, EmpStatus::nilf),
      rec("b", 2022, 1, EmpStatus::unemployed),
      rec("b", 2022, 2, EmpStatus::employed)};
  auto panel = aggregate_unemployment(records);
  CHECK_FALSE(panel.has("a", {2022, 2}));
  CHECK(panel.has("b", {2022, 2}));
}

TEST_CASE("earnings aggregation with deflation") {
  auto defl = flat_deflator(1.0);
  std::vector<MicroRecord> records = {
      rec("a", 2022, 1, EmpStatus::employed, 1000.0),
      rec("a", 2022, 1, EmpStatus::employed, 2000.0),
      rec("a", 2022, 1, EmpStatus::employed), // not earnings-eligible
      rec("b", 2022, 2, EmpStatus::employed, 500.0)};
  auto panel = aggregate_earnings(records, defl);
  const PanelCell *c = panel.cell("a", {2022, 1});
  REQUIRE(c != nullptr);
  CHECK(c->value == doctest::Approx(1500.0));
  CHECK(c->n_obs == 2);

  SUBCASE("index 1.25 divides") {
    auto defl125 = flat_deflator(1.25);
    auto p2 = aggregate_earnings({rec("a", 2022, 1, EmpStatus::employed, 1000.0),
                                  rec("b", 2022, 2, EmpStatus::employed, 1.0)},
                                 defl125);
    CHECK(p2.cell("a", {2022, 1})->value == doctest::Approx(800.0));
  }
  SUBCASE("missing deflator period raises") {
    std::map<TimeIndex, double> ix;
    ix[{2010, 1}] = 1.0;
    DeflatorSeries tiny(std::move(ix));
    CHECK_THROWS_WITH_AS(
        aggregate_earnings({rec("a", 2022, 1, EmpStatus::employed, 1.0)}, tiny),
        doctest::Contains("2022-01"), ValidationError);
  }
}

TEST_CASE("deflation is linear in nominal earnings") {
  auto defl = flat_deflator(1.1);
  std::vector<MicroRecord> base = {
      rec("a", 2022, 1, EmpStatus::employed, 100.0),
      rec("a", 2022, 1, EmpStatus::employed, 350.0),
      rec("b", 2022, 2, EmpStatus::employed, 900.0)};
  auto scaled = base;
  for (auto &r : scaled)
    if (r.weekly_earnings) *r.weekly_earnings *= 3.0;
  auto p1 = aggregate_earnings(base, defl);
  auto p2 = aggregate_earnings(scaled, defl);
  for (const auto &[key, cell] : p1.cells())
    CHECK(p2.cell(key.first, key.second)->value ==
          doctest::Approx(3.0 * cell.value));
}

TEST_CASE("aggregation is permutation invariant") {
  std::vector<MicroRecord> records;
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    EmpStatus st = static_cast<EmpStatus>(rng() % 3);
    std::optional<double> earn;
    if (st == EmpStatus::employed && rng() % 2) earn = double(rng() % 3000);
    records.push_back(rec(rng() % 2 ? "a" : "b", 2022, 1 + int(rng() % 3), st, earn));
  }
  auto shuffled = records;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto p1 = aggregate_unemployment(records);
  auto p2 = aggregate_unemployment(shuffled);
  CHECK(p1.n_cells() == p2.n_cells());
  for (const auto &[key, cell] : p1.cells()) {
    CHECK(p2.cell(key.first, key.second)->value == cell.value);
    CHECK(p2.cell(key.first, key.second)->n_obs == cell.n_obs);
  }
}

TEST_CASE("unemployment values stay in [0,1]") {
  std::mt19937 rng(6);
  std::vector<MicroRecord> records;
  for (int i = 0; i < 500; ++i)
    records.push_back(rec("u" + std::to_string(rng() % 5), 2022,
                          1 + int(rng() % 12), static_cast<EmpStatus>(rng() % 3)));
  auto panel = aggregate_unemployment(records);
  for (const auto &[key, cell] : panel.cells()) {
    CHECK(cell.value >= 0.0);
    CHECK(cell.value <= 1.0);
  }
}

TEST_CASE("topcode flags") {
  TopcodeRegime regime;
  std::vector<MicroRecord> records = {
      rec("a", 2023, 5, EmpStatus::employed, 2884.0),
      rec("a", 2023, 5, EmpStatus::employed, 2883.99),
      rec("a", 2024, 6, EmpStatus::employed, 5000.0),  // unique max: not flagged
      rec("a", 2024, 6, EmpStatus::employed, 4000.0),
      rec("b", 2024, 7, EmpStatus::employed, 6000.0),  // shared max: flagged
      rec("b", 2024, 7, EmpStatus::employed, 6000.0),
      rec("b", 2024, 7, EmpStatus::employed, 1000.0)};
  auto flags = flag_topcoded(records, regime);
  CHECK(flags.flagged[0]);
  CHECK_FALSE(flags.flagged[1]);
  CHECK_FALSE(flags.flagged[2]);
  CHECK_FALSE(flags.flagged[3]);
  CHECK(flags.flagged[4]);
  CHECK(flags.flagged[5]);
  CHECK_FALSE(flags.flagged[6]);
  CHECK(flags.cell_share.at({"b", {2024, 7}}) == doctest::Approx(2.0 / 3));
  CHECK(flags.cell_share.at({"a", {2023, 5}}) == doctest::Approx(0.5));
}
