#pragma once

#include <cstddef>
#include <span>

#include "gevr/params.hpp"
#include "gevr/rng.hpp"

namespace gevr {

/// |xi| below this switches every formula to its Gumbel limit.
inline constexpr double kGumbelThreshold = 1e-8;

/// GEV distribution function; 0 or 1 outside the support.
double gev_cdf(double x, const GevParams& theta) noexcept;

/// Inverse of gev_cdf for p in (0,1). Throws DomainError otherwise.
double gev_quantile(double p, const GevParams& theta);

/// log of the GEV density (equivalently the GEV_r log-likelihood with r = 1).
double gev_log_density(double x, const GevParams& theta) noexcept;

/// Log-likelihood contribution of one block x_1 > ... > x_r.
/// Returns -infinity outside the support or for sigma <= 0; throws
/// DomainError when the block is not strictly decreasing.
double gevr_log_likelihood(std::span<const double> block, const GevParams& theta);

/// Sum of gevr_log_likelihood over all blocks (ordering already validated).
double total_log_likelihood(const RLargestSample& sample, const GevParams& theta) noexcept;

/// n draws from GEV_r(theta). Block i draws from rng.substream(i), so a
/// sample is a pure function of (n, r, theta, rng seed/stream).
RLargestSample sample_gevr(std::size_t n, std::size_t r, const GevParams& theta,
                           const RngStream& rng);

/// Fill one row (length r) from a caller-owned stream.
void sample_gevr_block(std::span<double> out, const GevParams& theta, RngStream& rng);

/// CDF of the univariate KumGEV law.
double kumgev_cdf(double x, const KumGevParams& kappa) noexcept;

/// One draw from univariate KumGEV conditioned on X <= upper, by inversion.
/// Throws DomainError when F(upper) == 0.
double sample_truncated_kumgev(double upper, const KumGevParams& kappa, RngStream& rng);

}  // namespace gevr
