#pragma once

#include <functional>

#include <Eigen/Core>

namespace gevr::opt {

/// Objective returning f(x); fills `grad` when it is non-null. Infeasible
/// points return +infinity (minimisation convention).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct Options {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;  // on the infinity norm of the gradient
  double value_tolerance = 1e-14;    // relative change in f between iterations
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

/// BFGS with a backtracking Armijo line search that treats +infinity as a
/// barrier. Falls back to steepest descent when the update loses positive
/// definiteness.
Result bfgs(const Objective& f, Eigen::VectorXd x0, const Options& options = {});

/// Derivative-free Nelder-Mead simplex; `step` sets the initial simplex size.
Result nelder_mead(const Objective& f, Eigen::VectorXd x0, double step = 0.1,
                   int max_evaluations = 4000, double tolerance = 1e-12);

}  // namespace gevr::opt
