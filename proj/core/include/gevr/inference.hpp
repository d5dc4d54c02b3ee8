#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "gevr/params.hpp"

namespace gevr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// n x 3 matrix of per-block scores, columns (mu, sigma, xi).
using ScoreMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

enum class InfoKind { Observed, Expected };

std::string to_string(InfoKind kind);

// ---------------------------------------------------------------------------
// Score and information

/// Analytic gradient of gevr_log_likelihood with respect to (mu, sigma, xi).
/// Throws DomainError when theta violates the support of the block.
Vec3 block_score(std::span<const double> block, const GevParams& theta);

ScoreMatrix block_scores(const RLargestSample& sample, const GevParams& theta);

/// Total log-likelihood and, optionally, its gradient in one pass.
/// Returns -infinity (and leaves `score` untouched) on a support violation.
double log_likelihood_and_score(const RLargestSample& sample, const GevParams& theta,
                                Vec3* score);

/// Per-block information matrix. `Observed` is minus the Hessian of the total
/// log-likelihood divided by n (central differences of the analytic score);
/// `Expected` is the closed form assembled from expected_moment_h and ignores
/// the data values. Throws ConditioningError if the result is not positive
/// definite, DomainError if `Expected` is requested with xi <= -0.5.
Mat3 information(const RLargestSample& sample, const GevParams& theta, InfoKind kind);

/// Expected per-block information of GEV_r(theta); depends on r, sigma and xi.
/// Not checked for definiteness.
Mat3 expected_information(std::size_t r, const GevParams& theta);

/// c-th derivative of the gamma function, c in 0..4.
double gamma_derivative(int c, double x);

/// E[Z_j^a (1 + xi Z_j)^{-(1/xi + b)} log^c(1 + xi Z_j)] for the j-th order
/// statistic of GEV_r(theta), Z_j standardised. At xi == 0 the value is 0 for
/// c >= 1 and otherwise the average of the two evaluations at xi = +-1e-5.
double expected_moment_h(int j, const GevParams& theta, int a, double b, int c);

// ---------------------------------------------------------------------------
// Maximum likelihood

struct FitResult {
  GevParams theta_hat;
  double loglik = 0.0;
  Vec3 score_at_mle = Vec3::Zero();
  Mat3 info = Mat3::Zero();
  InfoKind info_kind = InfoKind::Observed;
  Vec3 se = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  bool converged = false;
  std::size_t n = 0;
  std::size_t r = 0;
  int iterations = 0;
  std::string message;

  /// Inverse of the total information n * info (asymptotic covariance).
  [[nodiscard]] Mat3 covariance() const;
};

struct FitOptions {
  InfoKind info_kind = InfoKind::Observed;
  /// Run every default start and keep the best; otherwise stop at the first
  /// converged start (bootstrap refits use this with a warm start).
  bool exhaustive_starts = true;
};

/// MLE of GEV_r on all r columns. Non-convergence is reported through
/// FitResult::converged, never by returning unconverged values as converged.
/// Throws DomainError when n < 5, UnfittableDataError when no start point has
/// finite likelihood.
FitResult fit_gevr(const RLargestSample& sample, std::optional<GevParams> start = std::nullopt,
                   const FitOptions& options = {});

// ---------------------------------------------------------------------------
// Return levels

/// Level exceeded on average once every t blocks: gev_quantile(1 - 1/t).
double return_level(const GevParams& theta, double t);

/// Gradient of return_level with respect to (mu, sigma, xi).
Vec3 return_level_gradient(const GevParams& theta, double t);

struct ReturnLevelEstimate {
  double t = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
};

/// Profile-likelihood interval for z_t: all z with
/// 2 [l(theta_hat) - l_prof(z)] <= chi^2_1(level). Uses `fit` when given,
/// otherwise fits the sample. Throws NumericError when no converged fit is
/// available and BracketExhaustedError when the deviance never reaches the
/// threshold inside the search bracket.
ReturnLevelEstimate profile_ci_return_level(const RLargestSample& sample, double t, double level,
                                            const std::optional<FitResult>& fit = std::nullopt);

/// Profile log-likelihood at a fixed return level z_t, maximised over
/// (sigma, xi); `warm` is updated to the maximiser when finite.
double profile_log_likelihood(const RLargestSample& sample, double t, double z_t,
                              GevParams& warm);

}  // namespace gevr
