#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sdidkit/panel.hpp"

namespace sdidkit {

// Interactive fixed-effects data generating process:
// Y_it(0) = a_i + d_t + g_i' v_t + eps_it, treated cells add tau_true for
// t >= onset. factor_dim = 0 recovers pure parallel trends.
struct FactorDgpConfig {
  int n_treated = 5;
  int n_control = 15;
  int n_pre = 12;
  int n_post = 6;
  double tau_true = 0.0;
  int factor_dim = 0;
  double loading_treatment_corr = 0.0; // in [-1, 1]
  double noise_sd = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GeneratedPanel {
  PanelDataset panel;
  TreatmentSpec spec;
  double tau_true = 0.0;
};

GeneratedPanel generate(const FactorDgpConfig &config);

struct EstimatorStats {
  double mean_bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0; // nominal 95% intervals
  int n_failures = 0;
};

struct McReport {
  std::map<std::string, EstimatorStats> estimators; // "did", "sdid"
  int n_reps = 0;
  // per-replication point estimates (NaN on failure), keyed like estimators
  std::map<std::string, std::vector<double>> estimates;
  std::map<std::string, std::vector<double>> std_errors;
  double tau_true = 0.0;
};

struct McOptions {
  bool run_did = true;
  bool run_sdid = true;
  int sdid_n_boot = 200;
  int threads = 1;
};

McReport monte_carlo(const FactorDgpConfig &config, int n_reps,
                     const McOptions &opts = {});

// key=value config file, one entry per line, '#' comments
FactorDgpConfig read_dgp_config(const std::string &path);

} // namespace sdidkit
