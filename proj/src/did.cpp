#include "sdidkit/did.hpp"

#include <algorithm>
#include <cmath>

#include "sdidkit/regress.hpp"

namespace sdidkit {

namespace {

struct Indexed {
  TwfeData data;
  std::vector<UnitId> unit_ids;     // code -> id
  std::vector<TimeIndex> time_ids;  // code -> period
};

// Stacks the cells of treated + control units into dense-coded rows.
Indexed stack(const PanelDataset &panel, const std::set<UnitId> &keep,
              bool weight_by_nobs) {
  Indexed ix;
  std::map<UnitId, int> ucode;
  std::map<TimeIndex, int> tcode;
  for (const auto &u : panel.units()) {
    if (!keep.empty() && !keep.count(u)) continue;
    ucode[u] = static_cast<int>(ix.unit_ids.size());
    ix.unit_ids.push_back(u);
  }
  for (const auto &t : panel.periods()) {
    tcode[t] = static_cast<int>(ix.time_ids.size());
    ix.time_ids.push_back(t);
  }
  std::vector<double> y, w;
  for (const auto &[key, cell] : panel.cells()) {
    auto it = ucode.find(key.first);
    if (it == ucode.end()) continue;
    ix.data.unit.push_back(it->second);
    ix.data.time.push_back(tcode.at(key.second));
    y.push_back(cell.value);
    w.push_back(weight_by_nobs ? static_cast<double>(cell.n_obs) : 1.0);
  }
  ix.data.n_units = static_cast<int>(ix.unit_ids.size());
  ix.data.n_times = static_cast<int>(ix.time_ids.size());
  ix.data.y = Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
  ix.data.weight = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
  return ix;
}

TwfeFit pack_single(const Indexed &ix, const TwfeResult &res) {
  TwfeFit fit;
  fit.beta = res.coef[0];
  fit.se_clustered = std::sqrt(std::max(0.0, res.vcov_clustered(0, 0)));
  fit.n_cells = res.n_rows;
  fit.intercept = res.intercept;
  for (int u = 0; u < ix.data.n_units; ++u)
    fit.alpha[ix.unit_ids[u]] = res.unit_fe[u];
  for (int t = 0; t < ix.data.n_times; ++t)
    fit.delta[ix.time_ids[t]] = res.time_fe[t];
  return fit;
}

} // namespace

TwfeFit twfe_did(const PanelDataset &panel, const TreatmentSpec &spec,
                 bool weight_by_nobs) {
  spec.validate(panel);
  std::set<UnitId> keep = spec.treated;
  keep.insert(spec.controls.begin(), spec.controls.end());
  Indexed ix = stack(panel, keep, weight_by_nobs);
  const auto n = static_cast<Eigen::Index>(ix.data.unit.size());
  ix.data.X.resize(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    bool treated = spec.treated.count(ix.unit_ids[ix.data.unit[r]]) > 0;
    bool post = !(ix.time_ids[ix.data.time[r]] < spec.onset);
    ix.data.X(r, 0) = (treated && post) ? 1.0 : 0.0;
  }
  return pack_single(ix, twfe_wls(ix.data));
}

EventStudyFit event_study(const PanelDataset &panel, const TreatmentSpec &spec,
                          bool weight_by_nobs) {
  spec.validate(panel);
  auto split = split_pre_post(panel, spec);
  if (split.pre.size() < 2)
    throw ValidationError("event study needs at least 2 pre-periods");

  std::set<UnitId> keep = spec.treated;
  keep.insert(spec.controls.begin(), spec.controls.end());
  Indexed ix = stack(panel, keep, weight_by_nobs);

  // One regressor per relative month present in the panel, k = -1 omitted.
  std::vector<int> ks;
  for (const auto &t : panel.periods()) {
    int k = t.months_since(spec.onset);
    if (k != EventStudyFit::omitted_k) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::map<int, int> kcol;
  for (std::size_t j = 0; j < ks.size(); ++j) kcol[ks[j]] = static_cast<int>(j);

  const auto n = static_cast<Eigen::Index>(ix.data.unit.size());
  ix.data.X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(ks.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!spec.treated.count(ix.unit_ids[ix.data.unit[r]])) continue;
    int k = ix.time_ids[ix.data.time[r]].months_since(spec.onset);
    auto it = kcol.find(k);
    if (it != kcol.end()) ix.data.X(r, it->second) = 1.0;
  }

  TwfeResult res = twfe_wls(ix.data);
  EventStudyFit fit;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    EventCoef c;
    c.beta = res.coef[static_cast<Eigen::Index>(j)];
    c.se = std::sqrt(std::max(0.0, res.vcov_clustered(j, j)));
    fit.coefficients[ks[j]] = c;
  }
  return fit;
}

TwfeFit continuous_did(const PanelDataset &panel,
                       const std::map<UnitId, double> &exposure,
                       const TimeIndex &onset, bool weight_by_nobs) {
  for (const auto &u : panel.units())
    if (!exposure.count(u))
      throw ValidationError("exposure missing for unit '" + u + "'");
  double mn = exposure.begin()->second, mx = mn;
  for (const auto &u : panel.units()) {
    double e = exposure.at(u);
    mn = std::min(mn, e);
    mx = std::max(mx, e);
  }
  if (mx - mn <= 0)
    throw EstimationError("treatment not identified: exposure has zero variance");

  Indexed ix = stack(panel, {}, weight_by_nobs);
  const auto n = static_cast<Eigen::Index>(ix.data.unit.size());
  ix.data.X.resize(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    bool post = !(ix.time_ids[ix.data.time[r]] < onset);
    ix.data.X(r, 0) = post ? exposure.at(ix.unit_ids[ix.data.unit[r]]) : 0.0;
  }
  return pack_single(ix, twfe_wls(ix.data));
}

} // namespace sdidkit
