#include "sdidkit/regress.hpp"

#include <algorithm>
#include <cmath>

namespace sdidkit {

namespace {

constexpr double kDemeanTol = 1e-12;
constexpr int kDemeanMaxIter = 10000;

// Alternating weighted projection onto unit/time means. Converges fast on
// balanced panels; iterated for unbalanced ones.
void demean_two_way(const TwfeData &d, Eigen::MatrixXd &M) {
  const auto n = static_cast<Eigen::Index>(d.unit.size());
  Eigen::VectorXd wu = Eigen::VectorXd::Zero(d.n_units);
  Eigen::VectorXd wt = Eigen::VectorXd::Zero(d.n_times);
  for (Eigen::Index r = 0; r < n; ++r) {
    wu[d.unit[r]] += d.weight[r];
    wt[d.time[r]] += d.weight[r];
  }
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  Eigen::MatrixXd mu(d.n_units, M.cols());
  Eigen::MatrixXd mt(d.n_times, M.cols());
  for (int it = 0; it < kDemeanMaxIter; ++it) {
    mu.setZero();
    for (Eigen::Index r = 0; r < n; ++r)
      mu.row(d.unit[r]) += d.weight[r] * M.row(r);
    for (int u = 0; u < d.n_units; ++u)
      if (wu[u] > 0) mu.row(u) /= wu[u];
    for (Eigen::Index r = 0; r < n; ++r) M.row(r) -= mu.row(d.unit[r]);

    mt.setZero();
    for (Eigen::Index r = 0; r < n; ++r)
      mt.row(d.time[r]) += d.weight[r] * M.row(r);
    for (int t = 0; t < d.n_times; ++t)
      if (wt[t] > 0) mt.row(t) /= wt[t];
    for (Eigen::Index r = 0; r < n; ++r) M.row(r) -= mt.row(d.time[r]);

    double drift = std::max(mu.cwiseAbs().maxCoeff(), mt.cwiseAbs().maxCoeff());
    if (drift <= kDemeanTol * scale) break;
  }
}

// Recovers intercept + additive effects for the residual outcome r.
void recover_effects(const TwfeData &d, const Eigen::VectorXd &resid,
                     Eigen::VectorXd &unit_fe, Eigen::VectorXd &time_fe,
                     double &intercept) {
  const auto n = static_cast<Eigen::Index>(d.unit.size());
  Eigen::VectorXd wu = Eigen::VectorXd::Zero(d.n_units);
  Eigen::VectorXd wt = Eigen::VectorXd::Zero(d.n_times);
  for (Eigen::Index r = 0; r < n; ++r) {
    wu[d.unit[r]] += d.weight[r];
    wt[d.time[r]] += d.weight[r];
  }
  Eigen::VectorXd a = Eigen::VectorXd::Zero(d.n_units);
  Eigen::VectorXd dd = Eigen::VectorXd::Zero(d.n_times);
  double scale = std::max(1.0, resid.cwiseAbs().maxCoeff());
  for (int it = 0; it < kDemeanMaxIter; ++it) {
    Eigen::VectorXd na = Eigen::VectorXd::Zero(d.n_units);
    for (Eigen::Index r = 0; r < n; ++r)
      na[d.unit[r]] += d.weight[r] * (resid[r] - dd[d.time[r]]);
    for (int u = 0; u < d.n_units; ++u)
      if (wu[u] > 0) na[u] /= wu[u];
    Eigen::VectorXd nd = Eigen::VectorXd::Zero(d.n_times);
    for (Eigen::Index r = 0; r < n; ++r)
      nd[d.time[r]] += d.weight[r] * (resid[r] - na[d.unit[r]]);
    for (int t = 0; t < d.n_times; ++t)
      if (wt[t] > 0) nd[t] /= wt[t];
    double delta =
        std::max((na - a).cwiseAbs().maxCoeff(), (nd - dd).cwiseAbs().maxCoeff());
    a = na;
    dd = nd;
    if (delta <= kDemeanTol * scale) break;
  }
  intercept = a[0] + dd[0];
  unit_fe = a.array() - a[0];
  time_fe = dd.array() - dd[0];
}

} // namespace

TwfeResult twfe_wls(const TwfeData &d) {
  const auto n = static_cast<Eigen::Index>(d.unit.size());
  const auto k = d.X.cols();
  if (n == 0) throw EstimationError("empty regression sample");
  if (k == 0) throw EstimationError("no regressors");

  Eigen::MatrixXd M(n, k + 1);
  M.col(0) = d.y;
  M.rightCols(k) = d.X;
  demean_two_way(d, M);
  Eigen::VectorXd yt = M.col(0);
  Eigen::MatrixXd Xt = M.rightCols(k);

  Eigen::MatrixXd XtWX = Xt.transpose() * d.weight.asDiagonal() * Xt;
  Eigen::VectorXd XtWy = Xt.transpose() * (d.weight.cwiseProduct(yt));

  // Absorbed regressor check: residual weighted variation relative to the
  // raw column scale.
  for (Eigen::Index j = 0; j < k; ++j) {
    double raw = (d.weight.cwiseProduct(d.X.col(j).cwiseAbs2())).sum();
    if (XtWX(j, j) <= 1e-12 * std::max(raw, 1e-300))
      throw EstimationError("treatment not identified: regressor " +
                            std::to_string(j) +
                            " is collinear with the fixed effects");
  }

  Eigen::LDLT<Eigen::MatrixXd> solver(XtWX);
  if (solver.info() != Eigen::Success)
    throw EstimationError("singular design in TWFE regression");
  Eigen::VectorXd coef = solver.solve(XtWy);

  Eigen::VectorXd resid = yt - Xt * coef;

  // CR0 sandwich clustered by unit.
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(d.n_units, k);
    for (Eigen::Index r = 0; r < n; ++r)
      scores.row(d.unit[r]) += d.weight[r] * resid[r] * Xt.row(r);
    meat = scores.transpose() * scores;
  }
  Eigen::MatrixXd bread = solver.solve(Eigen::MatrixXd::Identity(k, k));
  int G = d.n_units;
  double N = static_cast<double>(n);
  double K = 1.0 + (d.n_units - 1) + (d.n_times - 1) + static_cast<double>(k);
  double c = 1.0;
  if (G > 1 && N - K > 0)
    c = (static_cast<double>(G) / (G - 1)) * ((N - 1.0) / (N - K));
  Eigen::MatrixXd vcov = c * bread * meat * bread;

  TwfeResult out;
  out.coef = coef;
  out.vcov_clustered = vcov;
  out.n_rows = static_cast<int>(n);
  Eigen::VectorXd r_fe = d.y - d.X * coef;
  recover_effects(d, r_fe, out.unit_fe, out.time_fe, out.intercept);
  return out;
}

} // namespace sdidkit
