#include "sdidkit/simlab.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "sdidkit/did.hpp"
#include "sdidkit/sdid.hpp"

namespace sdidkit {

namespace {

// splitmix64: stable per-replication seed derivation, independent of
// execution order
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string unit_name(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%03d", prefix, i + 1);
  return buf;
}

} // namespace

void FactorDgpConfig::validate() const {
  if (n_treated < 1 || n_control < 1 || n_pre < 1 || n_post < 1)
    throw ValidationError("DGP counts must be >= 1");
  if (factor_dim < 0) throw ValidationError("factor_dim must be >= 0");
  if (loading_treatment_corr < -1.0 || loading_treatment_corr > 1.0)
    throw ValidationError("loading_treatment_corr must lie in [-1, 1]");
  if (noise_sd < 0.0) throw ValidationError("noise_sd must be >= 0");
}

GeneratedPanel generate(const FactorDgpConfig &cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const TimeIndex onset{2022, 12};
  const int n_units = cfg.n_treated + cfg.n_control;
  const int n_periods = cfg.n_pre + cfg.n_post;

  std::vector<UnitId> units;
  std::vector<bool> is_treated;
  for (int i = 0; i < cfg.n_control; ++i) {
    units.push_back(unit_name('C', i));
    is_treated.push_back(false);
  }
  for (int i = 0; i < cfg.n_treated; ++i) {
    units.push_back(unit_name('T', i));
    is_treated.push_back(true);
  }
  std::vector<TimeIndex> periods;
  for (int t = 0; t < n_periods; ++t)
    periods.push_back(onset.plus_months(t - cfg.n_pre));

  std::vector<double> a(n_units), d(n_periods);
  for (auto &v : a) v = normal(rng);
  for (auto &v : d) v = normal(rng);

  // loadings: rho * (+-1 by treatment status) + sqrt(1-rho^2) * z gives the
  // configured correlation with treatment
  double rho = cfg.loading_treatment_corr;
  double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  std::vector<std::vector<double>> gamma(n_units), upsilon(n_periods);
  for (int i = 0; i < n_units; ++i) {
    gamma[i].resize(cfg.factor_dim);
    for (int f = 0; f < cfg.factor_dim; ++f)
      gamma[i][f] = rho * (is_treated[i] ? 1.0 : -1.0) + mix * normal(rng);
  }
  for (int t = 0; t < n_periods; ++t) {
    upsilon[t].resize(cfg.factor_dim);
    for (int f = 0; f < cfg.factor_dim; ++f) upsilon[t][f] = normal(rng);
  }

  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  for (int i = 0; i < n_units; ++i) {
    for (int t = 0; t < n_periods; ++t) {
      double y = a[i] + d[t];
      for (int f = 0; f < cfg.factor_dim; ++f) y += gamma[i][f] * upsilon[t][f];
      if (cfg.noise_sd > 0) y += cfg.noise_sd * normal(rng);
      bool post = !(periods[t] < onset);
      if (is_treated[i] && post) y += cfg.tau_true;
      std::int64_t n_obs = 20 + static_cast<std::int64_t>(rng() % 181); // 20..200
      cells[{units[i], periods[t]}] = PanelCell{y, n_obs};
    }
  }

  GeneratedPanel out{PanelDataset::from_cells(std::move(cells), "simulated"),
                     TreatmentSpec{}, cfg.tau_true};
  out.spec.onset = onset;
  for (int i = 0; i < n_units; ++i)
    (is_treated[i] ? out.spec.treated : out.spec.controls).insert(units[i]);
  return out;
}

McReport monte_carlo(const FactorDgpConfig &config, int n_reps,
                     const McOptions &opts) {
  config.validate();
  if (n_reps < 1) throw ValidationError("n_reps must be >= 1");

  std::vector<std::string> names;
  if (opts.run_did) names.push_back("did");
  if (opts.run_sdid) names.push_back("sdid");
  if (names.empty()) throw ValidationError("no estimators selected");

  McReport report;
  report.n_reps = n_reps;
  report.tau_true = config.tau_true;
  for (const auto &nm : names) {
    report.estimates[nm].assign(n_reps, std::nan(""));
    report.std_errors[nm].assign(n_reps, std::nan(""));
  }

  auto run_rep = [&](int r) {
    FactorDgpConfig cfg = config;
    cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    GeneratedPanel gp = generate(cfg);
    if (opts.run_did) {
      try {
        TwfeFit fit = twfe_did(gp.panel, gp.spec, true);
        report.estimates["did"][r] = fit.beta;
        report.std_errors["did"][r] = fit.se_clustered;
      } catch (const std::exception &) {
      }
    }
    if (opts.run_sdid) {
      try {
        SdidOptions so;
        so.n_boot = opts.sdid_n_boot;
        so.seed = derive_seed(cfg.seed, 0xb001);
        SdidFit fit = sdid_per_unit(gp.panel, gp.spec, so);
        report.estimates["sdid"][r] = fit.att;
        report.std_errors["sdid"][r] = fit.se_bootstrap;
      } catch (const std::exception &) {
      }
    }
  };

  int workers = std::max(1, opts.threads);
  if (workers == 1) {
    for (int r = 0; r < n_reps; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (int r = next++; r < n_reps; r = next++) run_rep(r);
      });
    for (auto &th : pool) th.join();
  }

  for (const auto &nm : names) {
    EstimatorStats st;
    const auto &est = report.estimates[nm];
    const auto &ses = report.std_errors[nm];
    double sum_bias = 0.0, sum_sq = 0.0;
    int n_ok = 0, n_cov = 0;
    for (int r = 0; r < n_reps; ++r) {
      if (std::isnan(est[r])) {
        ++st.n_failures;
        continue;
      }
      double err = est[r] - config.tau_true;
      sum_bias += err;
      sum_sq += err * err;
      if (!std::isnan(ses[r]) && std::abs(err) <= 1.959963984540054 * ses[r])
        ++n_cov;
      ++n_ok;
    }
    if (n_ok > 0) {
      st.mean_bias = sum_bias / n_ok;
      st.rmse = std::sqrt(sum_sq / n_ok);
      st.coverage = static_cast<double>(n_cov) / n_ok;
    }
    report.estimators[nm] = st;
  }
  return report;
}

FactorDgpConfig read_dgp_config(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file: " + path);
  FactorDgpConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected key=value");
    std::string key = trimmed.substr(0, eq);
    std::string val = trimmed.substr(eq + 1);
    try {
      if (key == "n_treated") cfg.n_treated = std::stoi(val);
      else if (key == "n_control") cfg.n_control = std::stoi(val);
      else if (key == "n_pre") cfg.n_pre = std::stoi(val);
      else if (key == "n_post") cfg.n_post = std::stoi(val);
      else if (key == "tau_true") cfg.tau_true = std::stod(val);
      else if (key == "factor_dim") cfg.factor_dim = std::stoi(val);
      else if (key == "loading_treatment_corr")
        cfg.loading_treatment_corr = std::stod(val);
      else if (key == "noise_sd") cfg.noise_sd = std::stod(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
    } catch (const ValidationError &) {
      throw;
    } catch (const std::exception &) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": bad value '" + val + "' for key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

} // namespace sdidkit
