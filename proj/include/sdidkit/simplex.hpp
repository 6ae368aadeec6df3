#pragma once

#include <Eigen/Dense>

#include "sdidkit/errors.hpp"

namespace sdidkit {

struct SimplexSolution {
  Eigen::VectorXd weights;  // >= 0, sums to 1 within 1e-9
  double objective = 0.0;   // achieved ||Aw - b||^2
  int iterations = 0;
};

// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd &v);

struct SimplexSolverOptions {
  double tol = 1e-10;       // stop on objective decrease below tol
  int max_iter = 100000;
};

// min ||Aw - b||^2 s.t. w >= 0, sum w = 1, via accelerated projected
// gradient started from uniform weights. Deterministic. If the optimum is
// within tolerance of the uniform-weight objective (flat problem), uniform
// weights are returned.
SimplexSolution solve_simplex_ls(const Eigen::MatrixXd &A,
                                 const Eigen::VectorXd &b,
                                 const SimplexSolverOptions &opts = {});

} // namespace sdidkit
