#include "sdidkit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace sdidkit {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd &v) {
  const auto n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    cssv += u[j];
    double t = (cssv - 1.0) / (j + 1);
    if (u[j] - t > 0) {
      rho = j + 1;
      theta = t;
    }
  }
  (void)rho;
  return (v.array() - theta).cwiseMax(0.0);
}

SimplexSolution solve_simplex_ls(const Eigen::MatrixXd &A,
                                 const Eigen::VectorXd &b,
                                 const SimplexSolverOptions &opts) {
  const auto k = A.cols();
  if (k == 0) throw EstimationError("simplex solve with empty column set");
  if (A.rows() != b.size())
    throw EstimationError("simplex solve: A and b are not conformal");

  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(k, 1.0 / k);
  auto objective = [&](const Eigen::VectorXd &w) {
    return (A * w - b).squaredNorm();
  };

  SimplexSolution sol;
  if (k == 1) {
    sol.weights = uniform;
    sol.objective = objective(uniform);
    return sol;
  }

  Eigen::MatrixXd G = A.transpose() * A;
  Eigen::VectorXd c = A.transpose() * b;
  double L = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G)
                       .eigenvalues()
                       .maxCoeff();
  double f_uniform = objective(uniform);
  if (L <= 0.0) { // A == 0: flat objective
    sol.weights = uniform;
    sol.objective = f_uniform;
    return sol;
  }

  // FISTA with restart on objective increase.
  Eigen::VectorXd w = uniform, v = uniform;
  double t = 1.0;
  double f_prev = f_uniform;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    Eigen::VectorXd grad = 2.0 * (G * v - c);
    Eigen::VectorXd w_next = project_to_simplex(v - grad / L);
    double f_next = objective(w_next);
    if (f_next > f_prev) { // restart momentum
      v = w;
      t = 1.0;
      Eigen::VectorXd g2 = 2.0 * (G * v - c);
      w_next = project_to_simplex(v - g2 / L);
      f_next = objective(w_next);
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = w_next + ((t - 1.0) / t_next) * (w_next - w);
    bool done = (f_prev - f_next) >= 0 && (f_prev - f_next) < opts.tol;
    w = w_next;
    f_prev = f_next;
    t = t_next;
    if (done) break;
  }

  if (f_uniform - f_prev <= opts.tol) { // flat-objective tie-break
    sol.weights = uniform;
    sol.objective = f_uniform;
    sol.iterations = it;
    return sol;
  }
  // exact renormalization against accumulated drift
  w = w.cwiseMax(0.0);
  w /= w.sum();
  sol.weights = w;
  sol.objective = objective(w);
  sol.iterations = it;
  return sol;
}

} // namespace sdidkit
