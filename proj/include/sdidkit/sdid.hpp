#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdidkit/panel.hpp"
#include "sdidkit/simplex.hpp"

namespace sdidkit {

template <typename Key> struct KeyedWeights {
  std::vector<Key> keys;
  Eigen::VectorXd values; // >= 0, sums to 1
  double objective = 0.0;
};

using UnitWeights = KeyedWeights<UnitId>; // omega over donors
using TimeWeights = KeyedWeights<TimeIndex>; // lambda over pre-periods

struct SdidUnitFit {
  UnitId treated_unit;
  double tau = 0.0;
  double mu = 0.0;
  std::map<UnitId, double> unit_fe;
  std::map<TimeIndex, double> time_fe;
  UnitWeights omega;
  TimeWeights lambda;
  int donor_count = 0;
  double n_obs_weight = 0.0; // treated unit's total post-period n_obs
};

struct SdidSkip {
  UnitId unit;
  std::string reason;
};

struct SdidFit {
  std::vector<SdidUnitFit> unit_fits;
  std::vector<SdidSkip> skipped;
  double att = 0.0;          // n_obs-weighted mean of per-unit tau
  double se_bootstrap = 0.0;
  int n_boot = 0;
};

// omega-hat: min over the simplex of sum_{t in pre} (Y_treated,t - sum_j w_j Y_jt)^2.
UnitWeights solve_unit_weights(const PanelDataset &panel,
                               const UnitId &treated_unit,
                               const std::vector<UnitId> &donors,
                               const std::vector<TimeIndex> &pre);

// lambda-hat: min over the simplex of
// sum_{j in donors} (sum_{t in pre} l_t Y_jt - mean_{t in post} Y_jt)^2.
TimeWeights solve_time_weights(const PanelDataset &panel,
                               const std::vector<UnitId> &donors,
                               const std::vector<TimeIndex> &pre,
                               const std::vector<TimeIndex> &post);

// Weighted TWFE regression for (tau, mu, alpha, beta) on the treated unit plus
// donors, with cell weights omega_i * lambda_t; the treated row carries unit
// weight 1 and post periods carry uniform time weight 1/T_post.
SdidUnitFit weighted_twfe_tau(const PanelDataset &panel,
                              const UnitId &treated_unit,
                              const std::vector<UnitId> &donors,
                              const UnitWeights &omega,
                              const TimeWeights &lambda,
                              const TimeIndex &onset);

struct SdidOptions {
  int n_boot = 1000;
  std::uint64_t seed = 20221130;
  int threads = 1;
};

// Per-treated-unit SDiD with balanced donor pools, n_obs-weighted ATT and a
// cluster bootstrap over treated units for the SE.
SdidFit sdid_per_unit(const PanelDataset &panel, const TreatmentSpec &spec,
                      const SdidOptions &opts = {});

double bootstrap_se(const std::vector<SdidUnitFit> &unit_fits, int n_boot,
                    std::uint64_t seed);

} // namespace sdidkit
