#pragma once

#include <map>

#include "sdidkit/panel.hpp"

namespace sdidkit {

struct TwfeFit {
  double beta = 0.0;          // ATT coefficient
  double se_clustered = 0.0;  // clustered by unit
  int n_cells = 0;
  double intercept = 0.0;
  std::map<UnitId, double> alpha;    // unit FE, first unit = 0
  std::map<TimeIndex, double> delta; // time FE, first period = 0
};

struct EventCoef {
  double beta = 0.0;
  double se = 0.0;
};

// One coefficient per relative month k present in the panel, k != -1.
// beta_{-1} is the omitted baseline, identically zero.
struct EventStudyFit {
  std::map<int, EventCoef> coefficients;
  static constexpr int omitted_k = -1;
};

// Y_it = alpha_i + delta_t + beta * W_it + eps, W_it = 1{t >= onset, i treated}.
// weight_by_nobs uses cell n_obs as analytic weights.
TwfeFit twfe_did(const PanelDataset &panel, const TreatmentSpec &spec,
                 bool weight_by_nobs);

EventStudyFit event_study(const PanelDataset &panel, const TreatmentSpec &spec,
                          bool weight_by_nobs);

// Continuous-treatment variant: coefficient on exposure_i * 1{t >= onset}.
TwfeFit continuous_did(const PanelDataset &panel,
                       const std::map<UnitId, double> &exposure,
                       const TimeIndex &onset, bool weight_by_nobs);

} // namespace sdidkit
