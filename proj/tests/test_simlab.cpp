#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "sdidkit/did.hpp"
#include "sdidkit/sdid.hpp"
#include "sdidkit/simlab.hpp"

using namespace sdidkit;

TEST_CASE("noiseless parallel-trends DGP is exact") {
  FactorDgpConfig cfg;
  cfg.n_treated = 3;
  cfg.n_control = 5;
  cfg.n_pre = 6;
  cfg.n_post = 3;
  cfg.tau_true = 5.0;
  cfg.noise_sd = 0.0;
  cfg.factor_dim = 0;
  cfg.seed = 77;
  auto gp = generate(cfg);
  CHECK(gp.tau_true == 5.0);

  // post-minus-pre difference of any treated unit minus any control unit
  const UnitId t = *gp.spec.treated.begin();
  const UnitId c = *gp.spec.controls.begin();
  auto split = split_pre_post(gp.panel, gp.spec);
  auto mean_over = [&](const UnitId &u, const std::vector<TimeIndex> &ts) {
    double s = 0;
    for (const auto &ti : ts) s += gp.panel.cell(u, ti)->value;
    return s / double(ts.size());
  };
  double dd = (mean_over(t, split.post) - mean_over(t, split.pre)) -
              (mean_over(c, split.post) - mean_over(c, split.pre));
  CHECK(dd == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("same seed reproduces the panel") {
  FactorDgpConfig cfg;
  cfg.n_treated = 2;
  cfg.n_control = 3;
  cfg.n_pre = 4;
  cfg.n_post = 2;
  cfg.noise_sd = 1.0;
  cfg.factor_dim = 2;
  cfg.seed = 123;
  auto a = generate(cfg);
  auto b = generate(cfg);
  CHECK(a.panel.n_cells() == b.panel.n_cells());
  for (const auto &[key, cell] : a.panel.cells()) {
    CHECK(b.panel.cell(key.first, key.second)->value == cell.value);
    CHECK(b.panel.cell(key.first, key.second)->n_obs == cell.n_obs);
  }
}

TEST_CASE("generated panels are balanced with n_obs in range") {
  FactorDgpConfig cfg;
  cfg.n_treated = 3;
  cfg.n_control = 4;
  cfg.n_pre = 5;
  cfg.n_post = 2;
  cfg.seed = 9;
  auto gp = generate(cfg);
  std::set<UnitId> all(gp.panel.units().begin(), gp.panel.units().end());
  CHECK(check_balanced(gp.panel, all));
  for (const auto &[key, cell] : gp.panel.cells()) {
    CHECK(cell.n_obs >= 20);
    CHECK(cell.n_obs <= 200);
  }
  CHECK(gp.spec.onset == TimeIndex{2022, 12});
  gp.spec.validate(gp.panel);
}

TEST_CASE("correlated loadings induce pre-trend drift") {
  // with strong loading-treatment correlation some pre coefficient should be
  // significant in most draws
  int hits = 0;
  for (int rep = 0; rep < 10; ++rep) {
    FactorDgpConfig cfg;
    cfg.n_treated = 8;
    cfg.n_control = 12;
    cfg.n_pre = 10;
    cfg.n_post = 4;
    cfg.factor_dim = 2;
    cfg.loading_treatment_corr = 0.9;
    cfg.noise_sd = 0.3;
    cfg.seed = 1000 + std::uint64_t(rep);
    auto gp = generate(cfg);
    auto fit = event_study(gp.panel, gp.spec, false);
    for (const auto &[k, c] : fit.coefficients)
      if (k < -1 && c.se > 0 && std::abs(c.beta) > 2.0 * c.se) {
        ++hits;
        break;
      }
  }
  CHECK(hits >= 7);
}

TEST_CASE("monte_carlo under parallel trends is unbiased") {
  FactorDgpConfig cfg;
  cfg.n_treated = 4;
  cfg.n_control = 8;
  cfg.n_pre = 6;
  cfg.n_post = 3;
  cfg.tau_true = 2.0;
  cfg.noise_sd = 0.5;
  cfg.factor_dim = 0;
  cfg.seed = 2024;
  McOptions opts;
  opts.run_sdid = false;
  auto rep = monte_carlo(cfg, 60, opts);
  const auto &did = rep.estimators.at("did");
  CHECK(did.n_failures == 0);
  double mc_se = did.rmse / std::sqrt(60.0);
  CHECK(std::abs(did.mean_bias) < 3.0 * mc_se + 1e-9);
}

TEST_CASE("monte_carlo is reproducible and order independent") {
  FactorDgpConfig cfg;
  cfg.n_treated = 3;
  cfg.n_control = 5;
  cfg.n_pre = 5;
  cfg.n_post = 2;
  cfg.noise_sd = 0.4;
  cfg.seed = 31;
  McOptions serial, threaded;
  serial.run_sdid = threaded.run_sdid = false;
  threaded.threads = 4;
  auto a = monte_carlo(cfg, 20, serial);
  auto b = monte_carlo(cfg, 20, threaded);
  CHECK(a.estimates.at("did") == b.estimates.at("did"));
}

TEST_CASE("config file parsing") {
  std::string path = "test_dgp_config.txt";
  {
    std::ofstream f(path);
    f << "# comment\n"
      << "n_treated = 4\n"
      << "n_control=9\n"
      << "tau_true = 1.5\n"
      << "noise_sd = 0.25\n"
      << "factor_dim = 1\n"
      << "loading_treatment_corr = 0.8\n"
      << "seed = 99\n";
  }
  auto cfg = read_dgp_config(path);
  CHECK(cfg.n_treated == 4);
  CHECK(cfg.n_control == 9);
  CHECK(cfg.tau_true == 1.5);
  CHECK(cfg.noise_sd == 0.25);
  CHECK(cfg.factor_dim == 1);
  CHECK(cfg.loading_treatment_corr == 0.8);
  CHECK(cfg.seed == 99);
  std::remove(path.c_str());

  {
    std::ofstream f(path);
    f << "nonsense = 3\n";
  }
  CHECK_THROWS_AS(read_dgp_config(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("invalid configs are rejected") {
  FactorDgpConfig cfg;
  cfg.n_treated = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.loading_treatment_corr = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.noise_sd = -1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
