#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "gevr/inference.hpp"
#include "gevr/params.hpp"
#include "gevr/rng.hpp"

namespace gevr {

enum class TestMethod { PbScore, MbScore, Ed };

std::string to_string(TestMethod method);
/// Accepts "pb-score", "mb-score", "ed". Throws DomainError otherwise.
TestMethod parse_test_method(const std::string& name);

struct TestResult {
  std::size_t r = 0;
  TestMethod method = TestMethod::Ed;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t L = 0;         // requested bootstrap replicates (0 for ed)
  std::size_t L_used = 0;    // replicates that entered the p-value
  std::size_t dropped = 0;   // parametric-bootstrap refits that did not converge
  std::uint64_t seed = 0;
  FitResult fit;
};

struct BootstrapOptions {
  std::size_t L = 500;
  /// Use (1 + #{V_k > V}) / (L + 1) instead of #{V_k > V} / L.
  bool add_one = false;
  /// 0 selects default_thread_count().
  unsigned threads = 0;
  /// Parametric bootstrap aborts when more than this fraction of refits fail.
  double max_failure_rate = 0.10;
};

// ---------------------------------------------------------------------------
// Score statistics

/// (1/n) S(theta)' info^{-1} S(theta), with S the total score of `sample`.
/// Throws ConditioningError when `info` is not positive definite.
double score_statistic(const RLargestSample& sample, const GevParams& theta, const Mat3& info);

/// Same quadratic form at the fitted parameters with the fit's information.
double score_statistic(const RLargestSample& sample, const FitResult& fit);

/// Score of the r-th order statistic's conditional law against a
/// Kumaraswamy-type deformation 1 - (1 - H^a)^b of H = G(x_r) / G(x_{r-1}),
/// evaluated at a = b = 1 and corrected for estimation of theta. For r = 1,
/// G^a stays inside the GEV family, so only the b direction is used.
struct ShapeScore {
  Eigen::VectorXd total;       // sum_i g_i at theta_hat
  Eigen::MatrixXd phi;         // n x m standardised influence terms
  Eigen::MatrixXd covariance;  // m x m
  double statistic = 0.0;      // (1/n) total' covariance^{-1} total
};

/// Builds the shape score at a converged fit. Throws DegenerateStatisticError
/// when the influence covariance is singular.
ShapeScore shape_score(const RLargestSample& sample, const FitResult& fit);

/// |n^{-1/2} sum_i (Z_i - Zbar) phi_i|^2 for one set of multipliers.
double multiplier_replicate(const ShapeScore& score, std::span<const double> multipliers);

/// Parametric bootstrap: refits on L samples simulated from the fitted model.
/// Replicate k uses rng.substream(k). Throws ReliabilityError when too many
/// refits fail and NumericError when the fit of `sample` did not converge.
TestResult pb_score_test(const RLargestSample& sample, const RngStream& rng,
                         const BootstrapOptions& options = {},
                         const std::optional<FitResult>& fit = std::nullopt);

/// Multiplier bootstrap with standard normal multipliers; one fit only.
TestResult mb_score_test(const RLargestSample& sample, const RngStream& rng,
                         const BootstrapOptions& options = {},
                         const std::optional<FitResult>& fit = std::nullopt);

// ---------------------------------------------------------------------------
// Entropy difference

/// Null mean of Y_r: -log sigma - 1 + (1 + xi) psi(r).
double ed_mean(std::size_t r, const GevParams& theta);

/// Per-block Y_ir = l^{(r)} - l^{(r-1)} on the sample's r columns (r >= 1;
/// l^{(0)} = 0). Throws DomainError on a support violation.
Eigen::VectorXd entropy_difference_terms(const RLargestSample& sample, const GevParams& theta);

/// How the denominator of the ED statistic is estimated.
///  Plain:     sample standard deviation of Y_i(theta_hat).
///  Corrected: sample standard deviation of the influence terms
///             D_i + g' I^{-1} S_i, where D_i = Y_i - eta_r, g = mean dD_i/dtheta,
///             S_i the block score and I the expected per-block information
///             (observed when the expected one is unavailable). This accounts
///             for theta_hat being fitted to the same r columns.
enum class EdVariance { Corrected, Plain };

/// sqrt(n) (mean Y - eta_r) / sd at the fitted parameters. Throws
/// UnsupportedError for r = 1 and DegenerateStatisticError for zero variance.
double ed_statistic(const RLargestSample& sample, const FitResult& fit,
                    EdVariance variance = EdVariance::Corrected);

/// Two-sided normal test on ed_statistic.
TestResult ed_test(const RLargestSample& sample, const std::optional<FitResult>& fit = std::nullopt,
                   EdVariance variance = EdVariance::Corrected);

/// Dispatch on method; `rng` is ignored for ed.
TestResult run_test(TestMethod method, const RLargestSample& sample, const RngStream& rng,
                    const BootstrapOptions& options = {},
                    const std::optional<FitResult>& fit = std::nullopt);

}  // namespace gevr
