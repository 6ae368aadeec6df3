#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sdidkit/errors.hpp"

namespace sdidkit {

// Stacked panel rows for weighted two-way fixed-effects regression.
// unit/time are dense 0-based codes.
struct TwfeData {
  std::vector<int> unit;
  std::vector<int> time;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;       // regressors beyond the fixed effects
  Eigen::VectorXd weight;  // analytic weights, > 0
  int n_units = 0;
  int n_times = 0;
};

struct TwfeResult {
  Eigen::VectorXd coef;
  Eigen::MatrixXd vcov_clustered; // CR0 sandwich, clustered by unit
  Eigen::VectorXd unit_fe;        // first unit normalized to 0
  Eigen::VectorXd time_fe;        // first time normalized to 0
  double intercept = 0.0;
  int n_rows = 0;
};

// Weighted within-estimator: iterated two-way demeaning to 1e-12, WLS on the
// demeaned system, CR0 clustered variance with the finite-sample factor
// G/(G-1) * (N-1)/(N-K), where K counts intercept, absorbed effects and
// regressors. Throws EstimationError when a regressor is absorbed by the
// fixed effects (zero residual variation).
TwfeResult twfe_wls(const TwfeData &data);

} // namespace sdidkit
