#include "gevr/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gevr/error.hpp"

namespace gevr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool gumbel(double xi) noexcept { return std::abs(xi) < kGumbelThreshold; }

// Quantile written in terms of y = -log p, so products of many uniforms never
// underflow.
double quantile_from_neglog(double y, const GevParams& theta) noexcept {
  if (gumbel(theta.xi)) return theta.mu - theta.sigma * std::log(y);
  return theta.mu + theta.sigma * std::expm1(-theta.xi * std::log(y)) / theta.xi;
}

}  // namespace

double gev_cdf(double x, const GevParams& theta) noexcept {
  const double z = (x - theta.mu) / theta.sigma;
  if (gumbel(theta.xi)) return std::exp(-std::exp(-z));
  const double arg = theta.xi * z;
  if (arg <= -1.0) return theta.xi > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(arg) / theta.xi));
}

double gev_quantile(double p, const GevParams& theta) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("gev_quantile: p=" + std::to_string(p) + " outside (0,1)");
  return quantile_from_neglog(-std::log(p), theta);
}

double gev_log_density(double x, const GevParams& theta) noexcept {
  const double block[1] = {x};
  return gevr_log_likelihood(block, theta);
}

double gevr_log_likelihood(std::span<const double> block, const GevParams& theta) {
  for (std::size_t j = 1; j < block.size(); ++j)
    if (!(block[j] < block[j - 1]))
      throw DomainError("gevr_log_likelihood: block is not strictly decreasing");
  if (block.empty()) throw DomainError("gevr_log_likelihood: empty block");
  if (!(theta.sigma > 0.0)) return -kInf;

  const double r = static_cast<double>(block.size());
  const double log_sigma = std::log(theta.sigma);
  if (gumbel(theta.xi)) {
    double sum_z = 0.0;
    for (double x : block) sum_z += (x - theta.mu) / theta.sigma;
    const double z_r = (block.back() - theta.mu) / theta.sigma;
    return -r * log_sigma - std::exp(-z_r) - sum_z;
  }
  // sum of log(1 + xi z_j) / xi, kept in that form so small xi stays accurate.
  double sum_scaled_log = 0.0;
  double scaled_log_r = 0.0;
  for (double x : block) {
    const double arg = theta.xi * (x - theta.mu) / theta.sigma;
    if (arg <= -1.0) return -kInf;
    scaled_log_r = std::log1p(arg) / theta.xi;
    sum_scaled_log += scaled_log_r;
  }
  return -r * log_sigma - std::exp(-scaled_log_r) - (1.0 + theta.xi) * sum_scaled_log;
}

double total_log_likelihood(const RLargestSample& sample, const GevParams& theta) noexcept {
  if (!(theta.sigma > 0.0) || !std::isfinite(theta.mu) || !std::isfinite(theta.xi)) return -kInf;
  double total = 0.0;
  for (std::size_t i = 0; i < sample.n(); ++i) {
    const double l = gevr_log_likelihood(sample.row(i), theta);
    if (l == -kInf) return -kInf;
    total += l;
  }
  return total;
}

void sample_gevr_block(std::span<double> out, const GevParams& theta, RngStream& rng) {
  // -log of the running product of uniforms is the running sum of Exp(1)
  // variables: the GEV_r points are quantiles at the Poisson arrival times.
  double y = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    double x = 0.0;
    do {
      const double y_next = y - std::log(rng.uniform());
      x = quantile_from_neglog(y_next, theta);
      if (j == 0 || x < out[j - 1]) {
        y = y_next;
        break;
      }
    } while (true);
    out[j] = x;
  }
}

RLargestSample sample_gevr(std::size_t n, std::size_t r, const GevParams& theta,
                           const RngStream& rng) {
  if (n < 1 || r < 1) throw DomainError("sample_gevr: need n >= 1 and r >= 1");
  if (!theta.valid()) throw DomainError("sample_gevr: invalid parameters");
  std::vector<double> values(n * r);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream block_rng = rng.substream(i);
    sample_gevr_block(std::span<double>(values.data() + i * r, r), theta, block_rng);
  }
  return RLargestSample(n, r, std::move(values));
}

double kumgev_cdf(double x, const KumGevParams& kappa) noexcept {
  const double g = gev_cdf(x, kappa.base);
  if (g <= 0.0) return 0.0;
  if (g >= 1.0) return 1.0;
  return -std::expm1(kappa.b * std::log1p(-std::pow(g, kappa.a)));
}

double sample_truncated_kumgev(double upper, const KumGevParams& kappa, RngStream& rng) {
  const double f_upper = kumgev_cdf(upper, kappa);
  if (!(f_upper > 0.0))
    throw DomainError("sample_truncated_kumgev: truncation point has zero probability");
  for (;;) {
    const double u = rng.uniform() * f_upper;
    // G(x) = [1 - (1 - u)^{1/b}]^{1/a}
    const double inner = -std::expm1(std::log1p(-u) / kappa.b);
    const double g = std::exp(std::log(inner) / kappa.a);
    if (!(g > 0.0 && g < 1.0)) continue;
    const double x = gev_quantile(g, kappa.base);
    if (x <= upper) return x;
  }
}

}  // namespace gevr
