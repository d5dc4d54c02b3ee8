#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "gevr/distributions.hpp"
#include "gevr/error.hpp"
#include "gevr/inference.hpp"
#include "gevr/optimize.hpp"
#include "gevr/stats.hpp"

namespace gevr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maximise l(z_t - sigma q(xi), sigma, xi) over (log sigma, xi) from `start`.
double maximise_profile(const RLargestSample& sample, double t, double z_t, GevParams& start) {
  const double n = static_cast<double>(sample.n());
  const opt::Objective objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    const double sigma = std::exp(p(0));
    const double xi = p(1);
    if (!(xi > -1.0) || !(xi < 10.0) || !std::isfinite(sigma) || !(sigma > 0.0)) return kInf;
    GevParams theta{0.0, sigma, xi};
    const Vec3 dz = return_level_gradient(theta, t);  // (1, q, sigma q')
    theta.mu = z_t - sigma * dz(1);
    Vec3 s;
    const double ll = log_likelihood_and_score(sample, theta, grad ? &s : nullptr);
    if (!std::isfinite(ll)) return kInf;
    if (grad) {
      grad->resize(2);
      (*grad)(0) = -(s(1) - s(0) * dz(1)) * sigma / n;
      (*grad)(1) = -(s(2) - s(0) * dz(2)) / n;
    }
    return -ll / n;
  };
  Eigen::VectorXd p0(2);
  p0 << std::log(start.sigma), start.xi;
  opt::Options options;
  options.gradient_tolerance = 1e-9;
  options.max_iterations = 400;
  opt::Result res = opt::bfgs(objective, p0, options);
  if (!std::isfinite(res.value)) {
    res = opt::nelder_mead(objective, p0, 0.1, 3000, 1e-13);
    if (!std::isfinite(res.value)) return -kInf;
  }
  const double sigma = std::exp(res.x(0));
  GevParams theta{0.0, sigma, res.x(1)};
  theta.mu = z_t - sigma * return_level_gradient(theta, t)(1);
  start = theta;
  return -res.value * n;
}

}  // namespace

double profile_log_likelihood(const RLargestSample& sample, double t, double z_t, GevParams& warm) {
  if (!(t > 1.0)) throw DomainError("profile_log_likelihood: t must exceed 1");
  return maximise_profile(sample, t, z_t, warm);
}

ReturnLevelEstimate profile_ci_return_level(const RLargestSample& sample, double t, double level,
                                            const std::optional<FitResult>& fit) {
  if (!(t > 1.0)) throw DomainError("profile_ci_return_level: t must exceed 1");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("profile_ci_return_level: level must be in (0, 1)");
  const FitResult f = fit ? *fit : fit_gevr(sample);
  if (!f.converged) throw NumericError("profile_ci_return_level: no converged fit: " + f.message);

  const GevParams theta_hat = f.theta_hat;
  const double z_hat = return_level(theta_hat, t);
  const Vec3 grad = return_level_gradient(theta_hat, t);
  double se = std::sqrt(grad.dot(f.covariance() * grad));
  if (!std::isfinite(se) || !(se > 0.0)) se = 0.1 * std::max(std::abs(z_hat), theta_hat.sigma);
  const double threshold = chi_squared_quantile(level, 1.0);

  GevParams warm = theta_hat;
  const auto deviance_excess = [&](double z) {
    GevParams from_hat = theta_hat;
    double lp = maximise_profile(sample, t, z, from_hat);
    GevParams from_warm = warm;
    const double lp_warm = maximise_profile(sample, t, z, from_warm);
    GevParams best = from_hat;
    if (lp_warm > lp) {
      lp = lp_warm;
      best = from_warm;
    }
    if (lp > -kInf) warm = best;
    const double dev = lp > -kInf ? 2.0 * (f.loglik - lp) : kInf;
    // Capped so the root finder sees finite values; only the sign matters far out.
    return std::min(dev - threshold, 1e6);
  };

  ReturnLevelEstimate out;
  out.t = t;
  out.estimate = z_hat;
  out.level = level;

  for (int side : {-1, 1}) {
    warm = theta_hat;
    double inner = z_hat;
    double dist = 8.0 * se;
    double outer = z_hat + side * dist;
    bool bracketed = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      if (deviance_excess(outer) > 0.0) {
        bracketed = true;
        break;
      }
      inner = outer;
      dist *= 2.0;
      outer = z_hat + side * dist;
    }
    if (!bracketed)
      throw BracketExhaustedError("profile likelihood never reached the chi-square threshold",
                                  side < 0 ? outer : z_hat, side < 0 ? z_hat : outer);
    warm = theta_hat;
    double lo = std::min(inner, outer);
    double hi = std::max(inner, outer);
    double f_lo = deviance_excess(lo);
    double f_hi = deviance_excess(hi);
    if (f_lo * f_hi > 0.0) {
      // Numerical noise at the profile maximum; the bound sits at the estimate.
      (side < 0 ? out.ci_low : out.ci_high) = z_hat;
      continue;
    }
    std::uintmax_t max_iter = 100;
    const auto tol = boost::math::tools::eps_tolerance<double>(40);
    const auto root = boost::math::tools::toms748_solve(deviance_excess, lo, hi, f_lo, f_hi, tol, max_iter);
    const double bound = 0.5 * (root.first + root.second);
    (side < 0 ? out.ci_low : out.ci_high) = bound;
  }
  out.ci_low = std::min(out.ci_low, z_hat);
  out.ci_high = std::max(out.ci_high, z_hat);
  return out;
}

}  // namespace gevr
