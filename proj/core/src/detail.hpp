#pragma once

// Shared per-block kernels for the likelihood, score and test statistics.

#include <cmath>
#include <span>

#include "gevr/distributions.hpp"
#include "gevr/inference.hpp"

namespace gevr::detail {

inline bool is_gumbel(double xi) noexcept { return std::abs(xi) < kGumbelThreshold; }

/// log(1 + xi z) / xi, with the limit z at xi = 0. NaN outside the support.
inline double scaled_log(double z, double xi) noexcept {
  if (is_gumbel(xi)) return z;
  const double arg = xi * z;
  if (arg <= -1.0) return std::numeric_limits<double>::quiet_NaN();
  return std::log1p(arg) / xi;
}

/// log(1 + xi z) / xi^2 - z / (xi (1 + xi z)), the xi-derivative kernel of
/// (1 + xi z)^{-1/xi}. Series in w = xi z when |w| is small.
inline double xi_kernel(double z, double xi) noexcept {
  const double w = xi * z;
  if (std::abs(w) < 0.05) {
    // sum_{k>=2} (-1)^k (k-1)/k w^{k-2} z^2
    double sum = 0.0;
    double wp = 1.0;
    for (int k = 2; k < 16; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1.0) / k * wp;
      wp *= w;
    }
    return sum * z * z;
  }
  return std::log1p(w) / (xi * xi) - z / (xi * (1.0 + w));
}

/// Log-likelihood of one (already validated) block and optional gradient.
/// Returns false on a support violation.
inline bool block_ll_score(std::span<const double> block, const GevParams& theta, double& ll,
                           Vec3* score) noexcept {
  const double sigma = theta.sigma;
  const double xi = theta.xi;
  const double r = static_cast<double>(block.size());
  if (is_gumbel(xi)) {
    double sum_z = 0.0;
    double sum_kernel = 0.0;
    for (double x : block) {
      const double z = (x - theta.mu) / sigma;
      sum_z += z;
      sum_kernel += 0.5 * z * z - z;
    }
    const double z_r = (block.back() - theta.mu) / sigma;
    const double t_r = std::exp(-z_r);
    ll = -r * std::log(sigma) - t_r - sum_z;
    if (score) {
      (*score)(0) = (r - t_r) / sigma;
      (*score)(1) = (-r - t_r * z_r + sum_z) / sigma;
      (*score)(2) = -t_r * 0.5 * z_r * z_r + sum_kernel;
    }
    return std::isfinite(ll);
  }
  double sum_scaled_log = 0.0;
  double sum_inv_u = 0.0;
  double sum_z_over_u = 0.0;
  double sum_kernel = 0.0;
  double z_r = 0.0;
  double u_r = 1.0;
  double scaled_log_r = 0.0;
  for (double x : block) {
    const double z = (x - theta.mu) / sigma;
    const double w = xi * z;
    if (!(w > -1.0)) return false;
    const double u = 1.0 + w;
    scaled_log_r = std::log1p(w) / xi;
    sum_scaled_log += scaled_log_r;
    z_r = z;
    u_r = u;
    if (score) {
      sum_inv_u += 1.0 / u;
      sum_z_over_u += z / u;
      sum_kernel += xi_kernel(z, xi);
    }
  }
  const double t_r = std::exp(-scaled_log_r);
  ll = -r * std::log(sigma) - t_r - (1.0 + xi) * sum_scaled_log;
  if (score) {
    (*score)(0) = (-t_r / u_r + (1.0 + xi) * sum_inv_u) / sigma;
    (*score)(1) = (-r - t_r * z_r / u_r + (1.0 + xi) * sum_z_over_u) / sigma;
    (*score)(2) = -t_r * xi_kernel(z_r, xi) + sum_kernel - sum_z_over_u;
  }
  return std::isfinite(ll);
}

}  // namespace gevr::detail
