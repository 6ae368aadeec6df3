#include "sdidkit/sdid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "sdidkit/regress.hpp"

namespace sdidkit {

namespace {

double cell_value(const PanelDataset &panel, const UnitId &u,
                  const TimeIndex &t) {
  const PanelCell *c = panel.cell(u, t);
  if (!c)
    throw EstimationError("missing cell (" + u + ", " + t.str() +
                          ") in balanced block");
  return c->value;
}

} // namespace

UnitWeights solve_unit_weights(const PanelDataset &panel,
                               const UnitId &treated_unit,
                               const std::vector<UnitId> &donors,
                               const std::vector<TimeIndex> &pre) {
  if (donors.empty()) throw EstimationError("no balanced donors");
  if (pre.empty()) throw EstimationError("no pre-periods");
  Eigen::MatrixXd A(pre.size(), donors.size());
  Eigen::VectorXd b(pre.size());
  for (std::size_t r = 0; r < pre.size(); ++r) {
    b[r] = cell_value(panel, treated_unit, pre[r]);
    for (std::size_t j = 0; j < donors.size(); ++j)
      A(r, j) = cell_value(panel, donors[j], pre[r]);
  }
  auto sol = solve_simplex_ls(A, b);
  return UnitWeights{donors, sol.weights, sol.objective};
}

TimeWeights solve_time_weights(const PanelDataset &panel,
                               const std::vector<UnitId> &donors,
                               const std::vector<TimeIndex> &pre,
                               const std::vector<TimeIndex> &post) {
  if (donors.empty()) throw EstimationError("no balanced donors");
  if (pre.empty()) throw EstimationError("no pre-periods");
  if (post.empty()) throw EstimationError("no post-periods");
  Eigen::MatrixXd A(donors.size(), pre.size());
  Eigen::VectorXd b(donors.size());
  for (std::size_t j = 0; j < donors.size(); ++j) {
    double post_mean = 0.0;
    for (const auto &t : post) post_mean += cell_value(panel, donors[j], t);
    b[j] = post_mean / static_cast<double>(post.size());
    for (std::size_t r = 0; r < pre.size(); ++r)
      A(j, r) = cell_value(panel, donors[j], pre[r]);
  }
  auto sol = solve_simplex_ls(A, b);
  return TimeWeights{pre, sol.weights, sol.objective};
}

SdidUnitFit weighted_twfe_tau(const PanelDataset &panel,
                              const UnitId &treated_unit,
                              const std::vector<UnitId> &donors,
                              const UnitWeights &omega,
                              const TimeWeights &lambda,
                              const TimeIndex &onset) {
  if (omega.keys.size() != static_cast<std::size_t>(omega.values.size()) ||
      lambda.keys.size() != static_cast<std::size_t>(lambda.values.size()))
    throw EstimationError("malformed weight vectors");

  std::map<UnitId, double> unit_w;
  unit_w[treated_unit] = 1.0;
  for (std::size_t j = 0; j < omega.keys.size(); ++j)
    unit_w[omega.keys[j]] = omega.values[j];
  std::map<TimeIndex, double> time_w;
  for (std::size_t r = 0; r < lambda.keys.size(); ++r)
    time_w[lambda.keys[r]] = lambda.values[r];
  std::vector<TimeIndex> post;
  for (const auto &t : panel.periods())
    if (!(t < onset)) post.push_back(t);
  if (post.empty()) throw EstimationError("no post-periods");
  for (const auto &t : post) time_w[t] = 1.0 / static_cast<double>(post.size());

  TwfeData data;
  std::vector<UnitId> unit_ids;
  std::vector<TimeIndex> time_ids;
  std::map<UnitId, int> ucode;
  std::map<TimeIndex, int> tcode;
  std::vector<double> y, w, x;
  for (const auto &[u, uw] : unit_w) {
    if (uw <= 0) continue;
    for (const auto &[t, tw] : time_w) {
      if (tw <= 0) continue;
      const PanelCell *c = panel.cell(u, t);
      if (!c)
        throw EstimationError("missing cell (" + u + ", " + t.str() +
                              ") under nonzero weight");
      if (!ucode.count(u)) {
        ucode[u] = static_cast<int>(unit_ids.size());
        unit_ids.push_back(u);
      }
      if (!tcode.count(t)) {
        tcode[t] = static_cast<int>(time_ids.size());
        time_ids.push_back(t);
      }
      data.unit.push_back(ucode[u]);
      data.time.push_back(tcode[t]);
      y.push_back(c->value);
      w.push_back(uw * tw);
      bool treated_post = (u == treated_unit) && !(t < onset);
      x.push_back(treated_post ? 1.0 : 0.0);
    }
  }
  if (unit_ids.size() < 2 || time_ids.size() < 2)
    throw EstimationError("degenerate weighting: all weights zero on a required block");
  data.n_units = static_cast<int>(unit_ids.size());
  data.n_times = static_cast<int>(time_ids.size());
  data.y = Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
  data.weight = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
  data.X = Eigen::Map<Eigen::VectorXd>(x.data(), x.size());

  TwfeResult res = twfe_wls(data);

  SdidUnitFit fit;
  fit.treated_unit = treated_unit;
  fit.tau = res.coef[0];
  fit.mu = res.intercept;
  for (std::size_t u = 0; u < unit_ids.size(); ++u)
    fit.unit_fe[unit_ids[u]] = res.unit_fe[static_cast<Eigen::Index>(u)];
  for (std::size_t t = 0; t < time_ids.size(); ++t)
    fit.time_fe[time_ids[t]] = res.time_fe[static_cast<Eigen::Index>(t)];
  fit.omega = omega;
  fit.lambda = lambda;
  fit.donor_count = static_cast<int>(donors.size());
  return fit;
}

double bootstrap_se(const std::vector<SdidUnitFit> &unit_fits, int n_boot,
                    std::uint64_t seed) {
  if (unit_fits.empty())
    throw EstimationError("bootstrap needs at least one unit fit");
  if (n_boot < 1) throw EstimationError("n_boot must be >= 1");
  const std::size_t n = unit_fits.size();
  std::mt19937_64 rng(seed);
  std::vector<double> stats(n_boot);
  for (int b = 0; b < n_boot; ++b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // weights travel with their units through the resample
      const auto &f = unit_fits[rng() % n];
      double wt = f.n_obs_weight > 0 ? f.n_obs_weight : 1.0;
      num += wt * f.tau;
      den += wt;
    }
    stats[b] = num / den;
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= n_boot;
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  var /= n_boot;
  return std::sqrt(var);
}

SdidFit sdid_per_unit(const PanelDataset &panel, const TreatmentSpec &spec,
                      const SdidOptions &opts) {
  spec.validate(panel);
  std::vector<UnitId> treated(spec.treated.begin(), spec.treated.end());

  struct Slot {
    bool fitted = false;
    SdidUnitFit fit;
    SdidSkip skip;
  };
  std::vector<Slot> slots(treated.size());

  auto fit_one = [&](std::size_t i) {
    const UnitId &u = treated[i];
    Slot &slot = slots[i];
    auto obs = panel.observed_periods(u);
    std::vector<TimeIndex> pre, post;
    for (const auto &t : obs) (t < spec.onset ? pre : post).push_back(t);
    if (pre.size() < 2) {
      slot.skip = {u, "insufficient pre-period data"};
      return;
    }
    if (post.empty()) {
      slot.skip = {u, "no post-period data"};
      return;
    }
    std::vector<UnitId> donors;
    try {
      donors = donor_pool_for(panel, u, spec);
    } catch (const ValidationError &e) {
      slot.skip = {u, e.what()};
      return;
    }
    if (donors.empty()) {
      slot.skip = {u, "no balanced donors"};
      return;
    }
    try {
      // restrict the working panel to the treated unit's observed periods
      std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
      for (const auto &t : obs) {
        cells[{u, t}] = *panel.cell(u, t);
        for (const auto &j : donors) cells[{j, t}] = *panel.cell(j, t);
      }
      PanelDataset block = PanelDataset::from_cells(std::move(cells),
                                                    panel.outcome_label());
      UnitWeights omega = solve_unit_weights(block, u, donors, pre);
      TimeWeights lambda = solve_time_weights(block, donors, pre, post);
      SdidUnitFit fit =
          weighted_twfe_tau(block, u, donors, omega, lambda, spec.onset);
      double wt = 0.0;
      for (const auto &t : post) wt += static_cast<double>(panel.cell(u, t)->n_obs);
      fit.n_obs_weight = wt;
      slot.fit = std::move(fit);
      slot.fitted = true;
    } catch (const std::exception &e) {
      slot.skip = {u, e.what()};
    }
  };

  int workers = std::max(1, opts.threads);
  if (workers == 1 || treated.size() < 2) {
    for (std::size_t i = 0; i < treated.size(); ++i) fit_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < treated.size(); i = next++) fit_one(i);
      });
    for (auto &th : pool) th.join();
  }

  SdidFit out;
  out.n_boot = opts.n_boot;
  for (auto &slot : slots) {
    if (slot.fitted)
      out.unit_fits.push_back(std::move(slot.fit));
    else
      out.skipped.push_back(std::move(slot.skip));
  }
  if (out.unit_fits.empty())
    throw EstimationError("no treated unit could be fitted");
  double num = 0.0, den = 0.0;
  for (const auto &f : out.unit_fits) {
    double wt = f.n_obs_weight > 0 ? f.n_obs_weight : 1.0;
    num += wt * f.tau;
    den += wt;
  }
  out.att = num / den;
  out.se_bootstrap = bootstrap_se(out.unit_fits, opts.n_boot, opts.seed);
  return out;
}

} // namespace sdidkit
