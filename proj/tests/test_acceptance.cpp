// End-to-end acceptance suite. Each case prints one pass/fail line.
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "sdidkit/did.hpp"
#include "sdidkit/ingest.hpp"
#include "sdidkit/sdid.hpp"
#include "sdidkit/simlab.hpp"

using namespace sdidkit;

namespace {

void report(int id, const char *name, bool ok) {
  std::printf("[acceptance] %d %-28s %s\n", id, name, ok ? "PASS" : "FAIL");
  CHECK_MESSAGE(ok, "criterion ", id, " (", name, ")");
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

} // namespace

TEST_CASE("criterion 1: 2x2 closed form") {
  auto t0 = std::chrono::steady_clock::now();
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  cells[{"treated", {2022, 11}}] = PanelCell{10.0, 1};
  cells[{"treated", {2022, 12}}] = PanelCell{20.0, 1};
  cells[{"control", {2022, 11}}] = PanelCell{5.0, 1};
  cells[{"control", {2022, 12}}] = PanelCell{8.0, 1};
  auto panel = PanelDataset::from_cells(std::move(cells));
  TreatmentSpec spec{{"treated"}, {"control"}, {2022, 12}};

  auto did = twfe_did(panel, spec, false);
  bool ok = std::abs(did.beta - 7.0) <= 1e-10;

  UnitWeights omega{{"control"}, Eigen::VectorXd::Ones(1), 0.0};
  TimeWeights lambda{{{2022, 11}}, Eigen::VectorXd::Ones(1), 0.0};
  auto sdid =
      weighted_twfe_tau(panel, "treated", {"control"}, omega, lambda, {2022, 12});
  ok = ok && std::abs(sdid.tau - 7.0) <= 1e-8;
  ok = ok && elapsed_s(t0) < 1.0;
  report(1, "2x2 closed form", ok);
}

TEST_CASE("criterion 2: weight-solver grid oracle") {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(2026);
  std::normal_distribution<double> normal(0, 1);
  bool ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    int n_donors = 2 + int(rng() % 3);   // 2..4
    int n_pre = 2 + int(rng() % 5);      // 2..6
    int n_post = 1 + int(rng() % 3);
    auto onset = TimeIndex{2022, 12};
    std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
    std::vector<UnitId> donors;
    std::vector<TimeIndex> pre, post;
    for (int t = 0; t < n_pre; ++t) pre.push_back(onset.plus_months(t - n_pre));
    for (int t = 0; t < n_post; ++t) post.push_back(onset.plus_months(t));
    for (int j = 0; j < n_donors; ++j)
      donors.push_back("d" + std::to_string(j));
    for (const auto &u : donors)
      for (const auto &t : pre) cells[{u, t}] = PanelCell{2 * normal(rng), 1};
    for (const auto &u : donors)
      for (const auto &t : post) cells[{u, t}] = PanelCell{2 * normal(rng), 1};
    for (const auto &t : pre) cells[{"T", t}] = PanelCell{2 * normal(rng), 1};
    for (const auto &t : post) cells[{"T", t}] = PanelCell{2 * normal(rng), 1};
    auto panel = PanelDataset::from_cells(std::move(cells));

    // unit-weight program vs grid search
    auto w = solve_unit_weights(panel, "T", donors, pre);
    Eigen::MatrixXd A(n_pre, n_donors);
    Eigen::VectorXd b(n_pre);
    for (int r = 0; r < n_pre; ++r) {
      b[r] = panel.cell("T", pre[std::size_t(r)])->value;
      for (int j = 0; j < n_donors; ++j)
        A(r, j) = panel.cell(donors[std::size_t(j)], pre[std::size_t(r)])->value;
    }
    double grid = oracles::grid_search_simplex(A, b, 1e-3);
    if (std::abs(w.objective - grid) > 1e-3) ok = false;

    // time-weight program vs grid search
    auto lw = solve_time_weights(panel, donors, pre, post);
    Eigen::MatrixXd At(n_donors, n_pre);
    Eigen::VectorXd bt(n_donors);
    for (int j = 0; j < n_donors; ++j) {
      double pm = 0;
      for (const auto &t : post) pm += panel.cell(donors[std::size_t(j)], t)->value;
      bt[j] = pm / n_post;
      for (int r = 0; r < n_pre; ++r)
        At(j, r) = panel.cell(donors[std::size_t(j)], pre[std::size_t(r)])->value;
    }
    double grid_t = oracles::grid_search_simplex(At, bt, 1e-3);
    if (std::abs(lw.objective - grid_t) > 1e-3) ok = false;
  }
  ok = ok && elapsed_s(t0) < 30.0;
  report(2, "weight-solver grid oracle", ok);
}

TEST_CASE("criterion 3: simplex feasibility property") {
  std::mt19937 rng(3);
  std::normal_distribution<double> normal(0, 1);
  bool ok = true;
  for (int rep = 0; rep < 500; ++rep) {
    int rows = 1 + int(rng() % 10);
    int cols = 1 + int(rng() % 8);
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) {
      b[r] = 5 * normal(rng);
      for (int c = 0; c < cols; ++c) A(r, c) = 5 * normal(rng);
    }
    auto sol = solve_simplex_ls(A, b);
    if (std::abs(sol.weights.sum() - 1.0) > 1e-9) ok = false;
    if (sol.weights.minCoeff() < 0.0) ok = false;
  }
  report(3, "simplex feasibility", ok);
}

TEST_CASE("criterion 4: parallel-trends recovery") {
  auto t0 = std::chrono::steady_clock::now();
  FactorDgpConfig cfg;
  cfg.n_treated = 10;
  cfg.n_control = 10;
  cfg.n_pre = 18;
  cfg.n_post = 6; // 20 units x 24 periods
  cfg.tau_true = 5.0;
  cfg.noise_sd = 0.0;
  cfg.factor_dim = 0;
  cfg.seed = 4;
  auto gp = generate(cfg);

  auto did = twfe_did(gp.panel, gp.spec, true);
  bool ok = std::abs(did.beta - 5.0) <= 1e-8;

  SdidOptions opts;
  opts.n_boot = 10;
  auto sdid = sdid_per_unit(gp.panel, gp.spec, opts);
  ok = ok && std::abs(sdid.att - 5.0) <= 1e-8;
  ok = ok && elapsed_s(t0) < 5.0;
  report(4, "parallel-trends recovery", ok);
}

TEST_CASE("criterion 5: SDiD beats DiD under a latent factor") {
  auto t0 = std::chrono::steady_clock::now();
  FactorDgpConfig cfg;
  cfg.n_treated = 5;
  cfg.n_control = 15;
  cfg.n_pre = 12;
  cfg.n_post = 6;
  cfg.tau_true = 1.0;
  cfg.factor_dim = 1;
  cfg.loading_treatment_corr = 0.9;
  cfg.noise_sd = 0.5;
  cfg.seed = 5;
  McOptions opts;
  opts.sdid_n_boot = 20;
  opts.threads = 4;
  const int reps = 200;
  auto rep = monte_carlo(cfg, reps, opts);

  const auto &did_est = rep.estimates.at("did");
  const auto &sdid_est = rep.estimates.at("sdid");
  // paired squared errors and delta-method SE for the RMSE difference
  std::vector<double> d2(reps), s2(reps);
  int n_ok = 0;
  double mse_d = 0, mse_s = 0;
  for (int r = 0; r < reps; ++r) {
    if (std::isnan(did_est[r]) || std::isnan(sdid_est[r])) continue;
    d2[n_ok] = (did_est[r] - cfg.tau_true) * (did_est[r] - cfg.tau_true);
    s2[n_ok] = (sdid_est[r] - cfg.tau_true) * (sdid_est[r] - cfg.tau_true);
    mse_d += d2[n_ok];
    mse_s += s2[n_ok];
    ++n_ok;
  }
  bool ok = n_ok >= 150;
  mse_d /= n_ok;
  mse_s /= n_ok;
  double rmse_d = std::sqrt(mse_d), rmse_s = std::sqrt(mse_s);
  // diff = rmse_d - rmse_s; var via paired delta method
  double var_diff = 0;
  for (int r = 0; r < n_ok; ++r) {
    double g = d2[r] / (2 * rmse_d) - s2[r] / (2 * rmse_s) - (rmse_d - rmse_s);
    var_diff += g * g;
  }
  var_diff /= double(n_ok) * double(n_ok - 1);
  double se_diff = std::sqrt(var_diff);
  double diff = rmse_d - rmse_s;
  std::printf("[acceptance]   rmse(did)=%.4f rmse(sdid)=%.4f diff=%.4f se=%.4f\n",
              rmse_d, rmse_s, diff, se_diff);
  ok = ok && rmse_s < rmse_d && diff > 3.0 * se_diff;
  ok = ok && elapsed_s(t0) < 600.0;
  report(5, "factor-bias reduction", ok);
}

TEST_CASE("criterion 6: event-study normalization and size") {
  int n_pre_coefs = 0, n_sig = 0;
  bool ok = true;
  for (int r = 0; r < 100; ++r) {
    FactorDgpConfig cfg;
    cfg.n_treated = 10;
    cfg.n_control = 10;
    cfg.n_pre = 10;
    cfg.n_post = 4;
    cfg.tau_true = 1.0;
    cfg.noise_sd = 1.0;
    cfg.factor_dim = 0;
    cfg.seed = 600 + std::uint64_t(r);
    auto gp = generate(cfg);
    auto fit = event_study(gp.panel, gp.spec, false);
    if (fit.coefficients.count(-1) != 0) ok = false; // must be omitted
    for (const auto &[k, c] : fit.coefficients) {
      if (k >= 0 || k == -1) continue;
      ++n_pre_coefs;
      if (std::abs(c.beta) > 1.96 * c.se) ++n_sig;
    }
  }
  double share = double(n_sig) / double(n_pre_coefs);
  std::printf("[acceptance]   pre-coef rejection share = %.4f (%d/%d)\n", share,
              n_sig, n_pre_coefs);
  ok = ok && share >= 0.01 && share <= 0.10;
  report(6, "event-study normalization", ok);
}

TEST_CASE("criterion 7: cluster-SE sandwich oracle") {
  double values[3][4] = {{1.0, 2.2, 3.1, 6.4},
                         {0.5, 1.1, 2.0, 2.6},
                         {1.7, 2.4, 2.9, 3.8}};
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  std::vector<UnitId> units{"u0", "u1", "u2"};
  std::vector<TimeIndex> periods{{2022, 10}, {2022, 11}, {2022, 12}, {2023, 1}};
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 4; ++t)
      cells[{units[i], periods[t]}] = PanelCell{values[i][t], 1};
  auto panel = PanelDataset::from_cells(std::move(cells));
  TreatmentSpec spec{{"u0"}, {"u1", "u2"}, {2022, 12}};
  auto fit = twfe_did(panel, spec, false);

  std::vector<int> ui, ti;
  Eigen::VectorXd y(12), w = Eigen::VectorXd::Ones(12);
  Eigen::MatrixXd X(12, 1);
  int r = 0;
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 4; ++t, ++r) {
      ui.push_back(i);
      ti.push_back(t);
      y[r] = values[i][t];
      X(r, 0) = (i == 0 && t >= 2) ? 1.0 : 0.0;
    }
  auto oracle = oracles::dense_twfe_clustered(ui, ti, y, X, w, 3, 4);
  bool ok = std::abs(fit.se_clustered - std::sqrt(oracle.vcov(0, 0))) <= 1e-10;
  report(7, "cluster-SE oracle", ok);
}

TEST_CASE("criterion 8: bootstrap sanity") {
  std::vector<SdidUnitFit> fits(2);
  fits[0].tau = 0.0;
  fits[1].tau = 10.0;
  fits[0].n_obs_weight = fits[1].n_obs_weight = 1.0;
  double se = bootstrap_se(fits, 10000, 8);
  double expected = 5.0 / std::sqrt(2.0);
  bool ok = std::abs(se - expected) <= 0.05 * expected;
  report(8, "bootstrap sanity", ok);
}

TEST_CASE("criterion 9: aggregation correctness") {
  std::vector<MicroRecord> unemp;
  for (int i = 0; i < 5; ++i)
    unemp.push_back({"occ_a", {2022, 1}, EmpStatus::unemployed, std::nullopt});
  for (int i = 0; i < 95; ++i)
    unemp.push_back({"occ_a", {2022, 1}, EmpStatus::employed, std::nullopt});
  unemp.push_back({"occ_b", {2022, 2}, EmpStatus::employed, std::nullopt});
  auto up = aggregate_unemployment(unemp);
  bool ok = up.cell("occ_a", {2022, 1})->value == 0.05 &&
            up.cell("occ_a", {2022, 1})->n_obs == 100;

  std::map<TimeIndex, double> ix;
  ix[{2010, 1}] = 1.0;
  ix[{2022, 1}] = 1.25;
  ix[{2022, 2}] = 1.25;
  DeflatorSeries defl(std::move(ix));
  std::vector<MicroRecord> earn = {
      {"occ_a", {2022, 1}, EmpStatus::employed, 1000.0},
      {"occ_b", {2022, 2}, EmpStatus::employed, 1250.0}};
  auto ep = aggregate_earnings(earn, defl);
  ok = ok && ep.cell("occ_a", {2022, 1})->value == 800.0;
  report(9, "aggregation correctness", ok);
}
