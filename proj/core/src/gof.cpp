#include "gevr/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "detail.hpp"
#include "gevr/distributions.hpp"
#include "gevr/error.hpp"
#include "gevr/stats.hpp"

namespace gevr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Row3 = Eigen::RowVector3d;

// t = (1 + xi z)^{-1/xi} and its gradient in (mu, sigma, xi).
struct TailTerm {
  double t = 0.0;
  Row3 grad = Row3::Zero();
};

TailTerm tail_term(double x, const GevParams& theta) {
  const double z = (x - theta.mu) / theta.sigma;
  const double u = detail::is_gumbel(theta.xi) ? 1.0 : 1.0 + theta.xi * z;
  if (!(u > 0.0)) throw DomainError("parameters violate the support of the sample");
  TailTerm out;
  out.t = std::exp(-detail::scaled_log(z, theta.xi));
  const double kernel = detail::is_gumbel(theta.xi) ? 0.5 * z * z : detail::xi_kernel(z, theta.xi);
  out.grad << out.t / (theta.sigma * u), out.t * z / (theta.sigma * u), out.t * kernel;
  return out;
}

const FitResult& require_converged(const FitResult& fit) {
  if (!fit.converged)
    throw NumericError("maximum likelihood fit did not converge: " + fit.message);
  return fit;
}

FitResult fit_or_use(const RLargestSample& sample, const std::optional<FitResult>& fit) {
  if (fit) return require_converged(*fit);
  FitResult f = fit_gevr(sample);
  return require_converged(f);
}

double bootstrap_pvalue(double observed, const std::vector<double>& replicates, bool add_one,
                        std::size_t& used) {
  std::size_t exceed = 0;
  used = 0;
  for (double v : replicates) {
    if (std::isnan(v)) continue;
    ++used;
    if (v > observed) ++exceed;
  }
  if (used == 0) return kNaN;
  if (add_one) return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(used) + 1.0);
  return static_cast<double>(exceed) / static_cast<double>(used);
}

unsigned worker_count(const BootstrapOptions& options) {
  return options.threads == 0 ? default_thread_count() : options.threads;
}

}  // namespace

std::string to_string(TestMethod method) {
  switch (method) {
    case TestMethod::PbScore:
      return "pb-score";
    case TestMethod::MbScore:
      return "mb-score";
    case TestMethod::Ed:
      return "ed";
  }
  return "unknown";
}

TestMethod parse_test_method(const std::string& name) {
  if (name == "pb-score") return TestMethod::PbScore;
  if (name == "mb-score") return TestMethod::MbScore;
  if (name == "ed") return TestMethod::Ed;
  throw DomainError("unknown test method '" + name + "' (expected pb-score, mb-score or ed)");
}

double score_statistic(const RLargestSample& sample, const GevParams& theta, const Mat3& info) {
  Eigen::LLT<Mat3> llt(info);
  if (!info.allFinite() || llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(info, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    throw ConditioningError("score statistic: information is not positive definite",
                            {ev(0), ev(1), ev(2)});
  }
  Vec3 s;
  if (log_likelihood_and_score(sample, theta, &s) == -std::numeric_limits<double>::infinity())
    throw DomainError("score statistic: parameters violate the support of the sample");
  return s.dot(llt.solve(s)) / static_cast<double>(sample.n());
}

double score_statistic(const RLargestSample& sample, const FitResult& fit) {
  return score_statistic(sample, fit.theta_hat, fit.info);
}

ShapeScore shape_score(const RLargestSample& sample, const FitResult& fit) {
  const GevParams& theta = fit.theta_hat;
  const std::size_t n = sample.n();
  const std::size_t r = sample.r();
  const auto rows = static_cast<Eigen::Index>(n);

  Eigen::Matrix<double, Eigen::Dynamic, 2> g(rows, 2);
  Eigen::Matrix<double, 2, 3> dg_sum = Eigen::Matrix<double, 2, 3>::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const TailTerm last = tail_term(sample(i, r - 1), theta);
    double log_h = -last.t;
    Row3 dlog_h = -last.grad;
    if (r >= 2) {
      const TailTerm prev = tail_term(sample(i, r - 2), theta);
      log_h += prev.t;
      dlog_h += prev.grad;
    }
    const double one_minus_h = -std::expm1(log_h);
    if (!(one_minus_h > 0.0) || !std::isfinite(log_h))
      throw DegenerateStatisticError("shape score: conditional probability hit the boundary");
    const double h = std::exp(log_h);
    const auto ii = static_cast<Eigen::Index>(i);
    g(ii, 0) = 1.0 + log_h;
    g(ii, 1) = 1.0 + std::log(one_minus_h);
    dg_sum.row(0) += dlog_h;
    dg_sum.row(1) += -(h / one_minus_h) * dlog_h;
  }

  const ScoreMatrix scores = block_scores(sample, theta);
  const Eigen::Matrix<double, 2, 3> cross = -dg_sum / static_cast<double>(n);
  Eigen::LLT<Mat3> llt(fit.info);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("shape score: information is not positive definite",
                            {kNaN, kNaN, kNaN});
  const Eigen::Matrix<double, 3, 2> projection = llt.solve(cross.transpose());
  const Eigen::Matrix<double, Eigen::Dynamic, 2> psi_full = g - scores * projection;

  const Eigen::Index first = r == 1 ? 1 : 0;
  const Eigen::Index m = 2 - first;
  const Eigen::MatrixXd psi = psi_full.rightCols(m);
  const Eigen::RowVectorXd mean = psi.colwise().mean();
  const Eigen::MatrixXd centred = psi.rowwise() - mean;
  ShapeScore out;
  out.covariance = centred.transpose() * centred / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.covariance);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (!(ev(0) > 1e-12 * std::max(ev(m - 1), 1e-300)))
    throw DegenerateStatisticError("shape score: influence covariance is singular");
  const Eigen::MatrixXd inv_sqrt =
      es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  out.phi = psi * inv_sqrt;  // inv_sqrt is symmetric
  out.total = g.colwise().sum().transpose().tail(m);
  const Eigen::VectorXd whitened = inv_sqrt * out.total;
  out.statistic = whitened.squaredNorm() / static_cast<double>(n);
  return out;
}

double multiplier_replicate(const ShapeScore& score, std::span<const double> multipliers) {
  const auto n = score.phi.rows();
  if (static_cast<Eigen::Index>(multipliers.size()) != n)
    throw DomainError("multiplier_replicate: one multiplier per block is required");
  double zbar = 0.0;
  for (double z : multipliers) zbar += z;
  zbar /= static_cast<double>(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(score.phi.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    w += (multipliers[static_cast<std::size_t>(i)] - zbar) * score.phi.row(i).transpose();
  w /= std::sqrt(static_cast<double>(n));
  return w.squaredNorm();
}

TestResult pb_score_test(const RLargestSample& sample, const RngStream& rng,
                         const BootstrapOptions& options, const std::optional<FitResult>& fit) {
  if (options.L < 1) throw DomainError("pb_score_test: L must be >= 1");
  TestResult res;
  res.r = sample.r();
  res.method = TestMethod::PbScore;
  res.L = options.L;
  res.seed = rng.seed();
  res.fit = fit_or_use(sample, fit);
  res.statistic = shape_score(sample, res.fit).statistic;

  const GevParams theta = res.fit.theta_hat;
  const std::size_t n = sample.n();
  const std::size_t r = sample.r();
  std::vector<double> replicates(options.L, kNaN);
  parallel_for(options.L, worker_count(options), [&](std::size_t k) {
    try {
      const RLargestSample boot = sample_gevr(n, r, theta, rng.substream(k));
      FitOptions fo;
      fo.exhaustive_starts = false;
      const FitResult refit = fit_gevr(boot, theta, fo);
      if (!refit.converged) return;
      replicates[k] = shape_score(boot, refit).statistic;
    } catch (const NumericError&) {
    } catch (const DomainError&) {
    }
  });

  res.p_value = bootstrap_pvalue(res.statistic, replicates, options.add_one, res.L_used);
  res.dropped = options.L - res.L_used;
  const double failure_rate = static_cast<double>(res.dropped) / static_cast<double>(options.L);
  if (failure_rate > options.max_failure_rate)
    throw ReliabilityError("pb_score_test: " + std::to_string(res.dropped) + " of " +
                               std::to_string(options.L) + " bootstrap refits failed",
                           failure_rate);
  return res;
}

TestResult mb_score_test(const RLargestSample& sample, const RngStream& rng,
                         const BootstrapOptions& options, const std::optional<FitResult>& fit) {
  if (options.L < 1) throw DomainError("mb_score_test: L must be >= 1");
  TestResult res;
  res.r = sample.r();
  res.method = TestMethod::MbScore;
  res.L = options.L;
  res.seed = rng.seed();
  res.fit = fit_or_use(sample, fit);
  const ShapeScore score = shape_score(sample, res.fit);
  res.statistic = score.statistic;

  std::vector<double> replicates(options.L);
  std::vector<double> z(sample.n());
  for (std::size_t k = 0; k < options.L; ++k) {
    RngStream stream = rng.substream(k);
    for (double& v : z) v = stream.normal();
    replicates[k] = multiplier_replicate(score, z);
  }
  res.p_value = bootstrap_pvalue(res.statistic, replicates, options.add_one, res.L_used);
  return res;
}

double ed_mean(std::size_t r, const GevParams& theta) {
  if (r < 1) throw DomainError("ed_mean: r must be >= 1");
  return -std::log(theta.sigma) - 1.0 + (1.0 + theta.xi) * digamma(static_cast<double>(r));
}

Eigen::VectorXd entropy_difference_terms(const RLargestSample& sample, const GevParams& theta) {
  if (!theta.valid()) throw DomainError("entropy_difference_terms: invalid parameters");
  const std::size_t r = sample.r();
  const double log_sigma = std::log(theta.sigma);
  Eigen::VectorXd y(static_cast<Eigen::Index>(sample.n()));
  for (std::size_t i = 0; i < sample.n(); ++i) {
    const double z_r = (sample(i, r - 1) - theta.mu) / theta.sigma;
    const double a_r = detail::scaled_log(z_r, theta.xi);  // log(u_r) / xi
    if (std::isnan(a_r))
      throw DomainError("entropy_difference_terms: parameters violate the support of block " +
                        std::to_string(i + 1));
    double value = -log_sigma - std::exp(-a_r) - (1.0 + theta.xi) * a_r;
    if (r >= 2) {
      const double z_prev = (sample(i, r - 2) - theta.mu) / theta.sigma;
      value += std::exp(-detail::scaled_log(z_prev, theta.xi));
    }
    y(static_cast<Eigen::Index>(i)) = value;
  }
  return y;
}

namespace {

Eigen::VectorXd centred_terms(const RLargestSample& sample, const GevParams& theta) {
  return entropy_difference_terms(sample, theta).array() - ed_mean(sample.r(), theta);
}

// Influence terms of mean(D) at theta_hat; see EdVariance::Corrected.
Eigen::VectorXd ed_influence(const RLargestSample& sample, const FitResult& fit,
                             const Eigen::VectorXd& d) {
  const GevParams& t = fit.theta_hat;
  Vec3 g;
  const double step[3] = {1e-5 * t.sigma, 1e-5 * t.sigma, 1e-5};
  for (int k = 0; k < 3; ++k) {
    GevParams up = t, down = t;
    double* u[3] = {&up.mu, &up.sigma, &up.xi};
    double* w[3] = {&down.mu, &down.sigma, &down.xi};
    *u[k] += step[k];
    *w[k] -= step[k];
    try {
      g(k) = (centred_terms(sample, up).mean() - centred_terms(sample, down).mean()) / (2.0 * step[k]);
    } catch (const DomainError&) {
      throw DegenerateStatisticError("entropy-difference gradient crosses the support boundary");
    }
  }
  Mat3 info = fit.info;
  if (t.xi > -0.5) {
    const Mat3 expected = expected_information(sample.r(), t);
    if (Eigen::LLT<Mat3>(expected).info() == Eigen::Success) info = expected;
  }
  const Eigen::LLT<Mat3> llt(info);
  if (!info.allFinite() || llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(info, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    throw ConditioningError("entropy difference: information is not positive definite",
                            {ev(0), ev(1), ev(2)});
  }
  const Vec3 w = llt.solve(g);
  const ScoreMatrix scores = block_scores(sample, t);
  return d + scores * w;
}

}  // namespace

double ed_statistic(const RLargestSample& sample, const FitResult& fit, EdVariance variance) {
  if (sample.r() < 2)
    throw UnsupportedError("the entropy-difference test needs r >= 2; test r = 1 with a score test");
  require_converged(fit);
  const Eigen::VectorXd d = centred_terms(sample, fit.theta_hat);
  const Eigen::VectorXd spread =
      variance == EdVariance::Plain ? d : ed_influence(sample, fit, d);
  const MeanVar mv =
      mean_var(std::span<const double>(spread.data(), static_cast<std::size_t>(spread.size())));
  if (!(mv.variance > 0.0))
    throw DegenerateStatisticError("entropy-difference terms have zero sample variance");
  return std::sqrt(static_cast<double>(sample.n())) * d.mean() / std::sqrt(mv.variance);
}

TestResult ed_test(const RLargestSample& sample, const std::optional<FitResult>& fit,
                   EdVariance variance) {
  if (sample.r() < 2)
    throw UnsupportedError("the entropy-difference test needs r >= 2; test r = 1 with a score test");
  TestResult res;
  res.r = sample.r();
  res.method = TestMethod::Ed;
  res.fit = fit_or_use(sample, fit);
  res.statistic = ed_statistic(sample, res.fit, variance);
  res.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(res.statistic)));
  return res;
}

TestResult run_test(TestMethod method, const RLargestSample& sample, const RngStream& rng,
                    const BootstrapOptions& options, const std::optional<FitResult>& fit) {
  switch (method) {
    case TestMethod::PbScore:
      return pb_score_test(sample, rng, options, fit);
    case TestMethod::MbScore:
      return mb_score_test(sample, rng, options, fit);
    case TestMethod::Ed:
      return ed_test(sample, fit);
  }
  throw DomainError("unknown test method");
}

}  // namespace gevr
