#include "gevr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gevr::opt {
namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Result bfgs(const Objective& f, Eigen::VectorXd x0, const Options& options) {
  const auto dim = x0.size();
  Result res;
  res.x = std::move(x0);
  res.gradient = Eigen::VectorXd::Zero(dim);
  res.value = f(res.x, &res.gradient);
  if (!finite(res.value) || !res.gradient.allFinite()) return res;

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd grad_new(dim);
  int stalls = 0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    res.iterations = iter + 1;
    if (res.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd direction = -inv_hessian * res.gradient;
    double slope = direction.dot(res.gradient);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      direction = -res.gradient;
      slope = direction.dot(res.gradient);
    }

    // Backtracking; +infinity (support violation) just shrinks the step.
    double step = 1.0;
    double value_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new(dim);
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      x_new = res.x + step * direction;
      value_new = f(x_new, &grad_new);
      if (finite(value_new) && grad_new.allFinite() &&
          value_new <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= (finite(value_new) ? 0.5 : 0.25);
    }
    if (!accepted) {
      // Direction exhausted: retry once from steepest descent, then give up.
      if (inv_hessian.isIdentity()) break;
      inv_hessian.setIdentity();
      continue;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = grad_new - res.gradient;
    const double sy = s.dot(y);
    const double change = std::abs(res.value - value_new);
    res.x = x_new;
    res.value = value_new;
    res.gradient = grad_new;

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (iter == 0) inv_hessian *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
      inv_hessian = (eye - rho * s * y.transpose()) * inv_hessian * (eye - rho * y * s.transpose()) +
                    rho * s * s.transpose();
    }

    if (change <= options.value_tolerance * (std::abs(res.value) + 1e-10)) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }
  res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
  return res;
}

Result nelder_mead(const Objective& f, Eigen::VectorXd x0, double step, int max_evaluations,
                   double tolerance) {
  const auto dim = static_cast<std::size_t>(x0.size());
  std::vector<Eigen::VectorXd> simplex(dim + 1, x0);
  std::vector<double> values(dim + 1);
  int evaluations = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    const double v = f(x, nullptr);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (std::size_t i = 0; i < dim; ++i)
    simplex[i + 1][static_cast<Eigen::Index>(i)] += step;
  for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  Result res;
  while (evaluations < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1];
    if (std::isfinite(values[worst]) &&
        std::abs(values[worst] - values[best]) <= tolerance * (std::abs(values[best]) + 1e-10))
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i <= dim; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const bool outside = fr < values[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = eval(contracted);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= dim; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = eval(simplex[i]);
        }
      }
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<std::size_t>(best_it - values.begin());
  res.x = simplex[best];
  res.value = values[best];
  res.iterations = evaluations;
  res.converged = std::isfinite(res.value) && evaluations < max_evaluations;
  return res;
}

}  // namespace gevr::opt
