#include "gevr/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "detail.hpp"
#include "gevr/distributions.hpp"
#include "gevr/error.hpp"
#include "gevr/optimize.hpp"

namespace gevr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 total_score_or_throw(const RLargestSample& sample, const GevParams& theta) {
  Vec3 s;
  if (log_likelihood_and_score(sample, theta, &s) == -kInf)
    throw DomainError("score evaluated outside the support of the sample");
  return s;
}

// Hessian of the total log-likelihood by central differences of the analytic
// score. Returns false if a probe point leaves the support.
bool numeric_hessian(const RLargestSample& sample, const GevParams& theta, Mat3& hessian) {
  const std::array<double, 3> base_steps = {1e-5 * theta.sigma, 1e-5 * theta.sigma, 1e-5};
  for (int k = 0; k < 3; ++k) {
    double h = base_steps[static_cast<std::size_t>(k)];
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt, h *= 0.1) {
      GevParams plus = theta;
      GevParams minus = theta;
      double* pp = k == 0 ? &plus.mu : (k == 1 ? &plus.sigma : &plus.xi);
      double* pm = k == 0 ? &minus.mu : (k == 1 ? &minus.sigma : &minus.xi);
      *pp += h;
      *pm -= h;
      Vec3 sp;
      Vec3 sm;
      if (log_likelihood_and_score(sample, plus, &sp) == -kInf) continue;
      if (log_likelihood_and_score(sample, minus, &sm) == -kInf) continue;
      hessian.col(k) = (sp - sm) / (2.0 * h);
      ok = true;
    }
    if (!ok) return false;
  }
  hessian = 0.5 * (hessian + hessian.transpose()).eval();
  return true;
}

std::array<double, 3> eigenvalues_of(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(m, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

bool positive_definite(const Mat3& m) {
  if (!m.allFinite()) return false;
  Eigen::LLT<Mat3> llt(m);
  return llt.info() == Eigen::Success;
}

// Optimisation coordinates: (mu, log sigma, xi), objective -l / n.
opt::Objective make_objective(const RLargestSample& sample) {
  const double n = static_cast<double>(sample.n());
  return [&sample, n](const Eigen::VectorXd& p, Eigen::VectorXd* grad) -> double {
    const GevParams theta{p(0), std::exp(p(1)), p(2)};
    if (!(theta.xi > -1.0) || !(theta.xi < 10.0) || !theta.valid()) return kInf;
    Vec3 s;
    const double ll = log_likelihood_and_score(sample, theta, grad ? &s : nullptr);
    if (ll == -kInf || !std::isfinite(ll)) return kInf;
    if (grad) {
      grad->resize(3);
      (*grad)(0) = -s(0) / n;
      (*grad)(1) = -s(1) * theta.sigma / n;
      (*grad)(2) = -s(2) / n;
    }
    return -ll / n;
  };
}

double scaled_score_norm(const Vec3& s, double sigma) {
  return std::max({std::abs(s(0)) * sigma, std::abs(s(1)) * sigma, std::abs(s(2))});
}

struct Candidate {
  GevParams theta;
  double loglik = -kInf;
  bool stationary = false;
  int iterations = 0;
};

// Newton steps on the natural parameters using the numeric Hessian, accepted
// only when the log-likelihood does not decrease.
Candidate newton_polish(const RLargestSample& sample, Candidate c) {
  const double n = static_cast<double>(sample.n());
  for (int iter = 0; iter < 12; ++iter) {
    Vec3 s;
    const double ll = log_likelihood_and_score(sample, c.theta, &s);
    if (ll == -kInf) return c;
    c.loglik = ll;
    if (scaled_score_norm(s, c.theta.sigma) <= 1e-9 * n) break;
    Mat3 h;
    if (!numeric_hessian(sample, c.theta, h)) break;
    const Mat3 neg = -h;
    if (!positive_definite(neg)) break;
    const Vec3 delta = neg.llt().solve(s);
    double step = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, step *= 0.5) {
      GevParams next{c.theta.mu + step * delta(0), c.theta.sigma + step * delta(1),
                     c.theta.xi + step * delta(2)};
      if (!next.valid() || !(next.xi > -1.0)) continue;
      const double ll_next = total_log_likelihood(sample, next);
      if (ll_next >= ll - 1e-12 * std::abs(ll)) {
        c.theta = next;
        c.loglik = ll_next;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  Vec3 s;
  c.loglik = log_likelihood_and_score(sample, c.theta, &s);
  c.stationary = c.loglik != -kInf && scaled_score_norm(s, c.theta.sigma) <= 1e-6 * n;
  return c;
}

Candidate run_from(const RLargestSample& sample, const opt::Objective& objective, GevParams start) {
  Candidate out;
  Eigen::VectorXd p0(3);
  p0 << start.mu, std::log(start.sigma), start.xi;
  opt::Options options;
  options.gradient_tolerance = 1e-7;
  options.max_iterations = 300;
  const opt::Result res = opt::bfgs(objective, p0, options);
  if (!std::isfinite(res.value)) return out;
  out.theta = GevParams{res.x(0), std::exp(res.x(1)), res.x(2)};
  out.iterations = res.iterations;
  return newton_polish(sample, out);
}

std::vector<GevParams> default_starts(const RLargestSample& sample) {
  std::vector<double> maxima(sample.n());
  for (std::size_t i = 0; i < sample.n(); ++i) maxima[i] = sample(i, 0);
  double mean = 0.0;
  for (double v : maxima) mean += v;
  mean /= static_cast<double>(maxima.size());
  double ss = 0.0;
  for (double v : maxima) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(1, maxima.size() - 1)));
  if (!(sd > 0.0)) sd = 1e-3 * std::max(1.0, std::abs(mean));
  std::nth_element(maxima.begin(), maxima.begin() + static_cast<long>(maxima.size() / 2),
                   maxima.end());
  const double median = maxima[maxima.size() / 2];

  const double sigma0 = std::sqrt(6.0) * sd / M_PI;
  constexpr double kEuler = 0.57721566490153286;
  const double mu_dispersion = mean - kEuler * sigma0;
  const double mu_median = median + sigma0 * std::log(std::log(2.0));

  std::vector<GevParams> starts;
  for (double xi0 : {0.1, 0.0, -0.1}) {
    starts.push_back({mu_dispersion, sigma0, xi0});
    starts.push_back({mu_median, sigma0, xi0});
  }
  return starts;
}

// Widen sigma until every observation lies inside the support.
bool make_feasible(const RLargestSample& sample, GevParams& theta) {
  for (int k = 0; k < 40; ++k) {
    if (total_log_likelihood(sample, theta) > -kInf) return true;
    theta.sigma *= 2.0;
  }
  return false;
}

}  // namespace

std::string to_string(InfoKind kind) {
  return kind == InfoKind::Observed ? "observed" : "expected";
}

Vec3 block_score(std::span<const double> block, const GevParams& theta) {
  for (std::size_t j = 1; j < block.size(); ++j)
    if (!(block[j] < block[j - 1]))
      throw DomainError("block_score: block is not strictly decreasing");
  if (block.empty()) throw DomainError("block_score: empty block");
  if (!theta.valid()) throw DomainError("block_score: invalid parameters");
  double ll = 0.0;
  Vec3 s;
  if (!detail::block_ll_score(block, theta, ll, &s))
    throw DomainError("block_score: parameters violate the support of the block");
  return s;
}

ScoreMatrix block_scores(const RLargestSample& sample, const GevParams& theta) {
  if (!theta.valid()) throw DomainError("block_scores: invalid parameters");
  ScoreMatrix out(static_cast<Eigen::Index>(sample.n()), 3);
  for (std::size_t i = 0; i < sample.n(); ++i) {
    double ll = 0.0;
    Vec3 s;
    if (!detail::block_ll_score(sample.row(i), theta, ll, &s))
      throw DomainError("block_scores: parameters violate the support of block " +
                        std::to_string(i + 1));
    out.row(static_cast<Eigen::Index>(i)) = s.transpose();
  }
  return out;
}

double log_likelihood_and_score(const RLargestSample& sample, const GevParams& theta,
                                Vec3* score) {
  if (!theta.valid()) return -kInf;
  double total = 0.0;
  Vec3 acc = Vec3::Zero();
  Vec3 s;
  for (std::size_t i = 0; i < sample.n(); ++i) {
    double ll = 0.0;
    if (!detail::block_ll_score(sample.row(i), theta, ll, score ? &s : nullptr)) return -kInf;
    total += ll;
    if (score) acc += s;
  }
  if (score) *score = acc;
  return total;
}

Mat3 information(const RLargestSample& sample, const GevParams& theta, InfoKind kind) {
  Mat3 info;
  if (kind == InfoKind::Expected) {
    if (!theta.estimable())
      throw DomainError("expected information requires xi > -0.5");
    info = expected_information(sample.r(), theta);
  } else {
    if (total_log_likelihood(sample, theta) == -kInf)
      throw DomainError("information: parameters violate the support of the sample");
    Mat3 h;
    if (!numeric_hessian(sample, theta, h))
      throw ConditioningError("information: Hessian probes left the support",
                              {kInf, kInf, kInf});
    info = -h / static_cast<double>(sample.n());
  }
  if (!positive_definite(info))
    throw ConditioningError("information matrix is not positive definite", eigenvalues_of(info));
  return info;
}

Mat3 FitResult::covariance() const {
  return (static_cast<double>(n) * info).inverse();
}

FitResult fit_gevr(const RLargestSample& sample, std::optional<GevParams> start,
                   const FitOptions& options) {
  if (sample.n() < 5)
    throw DomainError("fit_gevr: at least 5 blocks are required, got " +
                      std::to_string(sample.n()));
  const opt::Objective objective = make_objective(sample);

  std::vector<GevParams> starts;
  if (start && start->valid()) starts.push_back(*start);
  for (const auto& s : default_starts(sample)) starts.push_back(s);

  Candidate best;
  bool any_feasible = false;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    GevParams s = starts[k];
    if (!make_feasible(sample, s)) continue;
    any_feasible = true;
    Candidate c = run_from(sample, objective, s);
    if (c.loglik == -kInf) continue;
    const bool better = (c.stationary && !best.stationary) ||
                        (c.stationary == best.stationary && c.loglik > best.loglik);
    if (better) best = c;
    const bool warm = start.has_value() && k == 0;
    if (best.stationary && (warm || !options.exhaustive_starts)) break;
  }
  if (!any_feasible)
    throw UnfittableDataError("fit_gevr: no starting point has finite likelihood");

  if (!best.stationary) {
    // Derivative-free fallback from the best point seen (or the first start).
    GevParams s = best.loglik > -kInf ? best.theta : starts.front();
    make_feasible(sample, s);
    Eigen::VectorXd p0(3);
    p0 << s.mu, std::log(s.sigma), s.xi;
    const opt::Result nm = opt::nelder_mead(objective, p0, 0.1, 6000, 1e-14);
    if (std::isfinite(nm.value)) {
      Candidate c;
      c.theta = GevParams{nm.x(0), std::exp(nm.x(1)), nm.x(2)};
      c.iterations = nm.iterations;
      c = newton_polish(sample, c);
      if ((c.stationary && !best.stationary) || c.loglik > best.loglik) best = c;
    }
  }

  FitResult fit;
  fit.n = sample.n();
  fit.r = sample.r();
  fit.info_kind = options.info_kind;
  fit.iterations = best.iterations;
  if (best.loglik == -kInf) {
    fit.message = "optimizer never reached a finite likelihood";
    return fit;
  }
  fit.theta_hat = best.theta;
  fit.loglik = best.loglik;
  fit.score_at_mle = total_score_or_throw(sample, best.theta);
  fit.converged = best.stationary;
  if (!fit.converged) fit.message = "optimizer stalled before reaching a stationary point";

  try {
    InfoKind kind = options.info_kind;
    if (kind == InfoKind::Expected && !best.theta.estimable()) kind = InfoKind::Observed;
    fit.info = information(sample, best.theta, kind);
    fit.info_kind = kind;
    const Mat3 cov = fit.covariance();
    fit.se = cov.diagonal().cwiseSqrt();
  } catch (const NumericError& e) {
    fit.converged = false;
    fit.message = e.what();
  } catch (const DomainError& e) {
    fit.converged = false;
    fit.message = e.what();
  }
  return fit;
}

double return_level(const GevParams& theta, double t) {
  if (!(t > 1.0)) throw DomainError("return_level: t must exceed 1");
  return gev_quantile(1.0 - 1.0 / t, theta);
}

Vec3 return_level_gradient(const GevParams& theta, double t) {
  if (!(t > 1.0)) throw DomainError("return_level_gradient: t must exceed 1");
  const double log_y = std::log(-std::log1p(-1.0 / t));
  const double xi = theta.xi;
  double q = 0.0;
  double dq = 0.0;
  if (std::abs(xi * log_y) < 0.1) {
    // q(xi) = sum_{k>=1} c_k xi^{k-1}, c_k = (-L)^k / k!
    double c = 1.0;
    double xi_pow_km2 = 1.0;  // xi^{k-2} for k >= 2
    for (int k = 1; k < 25; ++k) {
      c *= -log_y / k;
      if (k == 1) {
        q += c;
        continue;
      }
      dq += (k - 1) * c * xi_pow_km2;
      q += c * xi_pow_km2 * xi;
      xi_pow_km2 *= xi;
    }
  } else {
    const double y_neg_xi = std::exp(-xi * log_y);
    q = std::expm1(-xi * log_y) / xi;
    dq = (-log_y * y_neg_xi * xi - (y_neg_xi - 1.0)) / (xi * xi);
  }
  return Vec3(1.0, q, theta.sigma * dq);
}

}  // namespace gevr
