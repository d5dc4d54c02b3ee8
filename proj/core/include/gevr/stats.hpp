#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace gevr {

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x);
double normal_quantile(double p);
double chi_squared_quantile(double p, double df);
double digamma(double x);

/// Two-sided Kolmogorov-Smirnov distance sup |F_n - F| of `data` against `cdf`.
double ks_statistic(std::span<const double> data, const std::function<double(double)>& cdf);
/// Asymptotic p-value of a one-sample KS distance with Stephens' small-n correction.
double ks_pvalue(double distance, std::size_t n);

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, n - 1 denominator
};
MeanVar mean_var(std::span<const double> xs);

/// Worker count from GEVR_THREADS, else hardware concurrency (at least 1).
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots; scheduling never affects them.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace gevr
