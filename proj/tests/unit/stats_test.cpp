#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <vector>

#include "gevr/error.hpp"
#include "gevr/stats.hpp"

TEST(Stats, NormalTails) {
  EXPECT_NEAR(gevr::normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_NEAR(gevr::normal_sf(1.959963984540054), 0.025, 1e-12);
  EXPECT_NEAR(gevr::normal_quantile(0.975), 1.959963984540054, 1e-10);
  EXPECT_GT(gevr::normal_sf(30.0), 0.0);
  EXPECT_NEAR(gevr::normal_sf(30.0) / 4.906713927148187e-198, 1.0, 1e-8);
}

TEST(Stats, ChiSquaredOneDegree) {
  // chi^2_1 quantile is the squared normal quantile.
  const double z = gevr::normal_quantile(0.975);
  EXPECT_NEAR(gevr::chi_squared_quantile(0.95, 1.0), z * z, 1e-10);
  EXPECT_THROW(gevr::chi_squared_quantile(1.0, 1.0), gevr::DomainError);
}

TEST(Stats, DigammaAtOneIsMinusEuler) {
  EXPECT_NEAR(gevr::digamma(1.0), -std::numbers::egamma, 1e-14);
  EXPECT_NEAR(gevr::digamma(5.0), 1 + 0.5 + 1.0 / 3 + 0.25 - std::numbers::egamma, 1e-13);
}

TEST(Stats, KsStatisticOnHandExample) {
  // Uniform cdf, points 0.1, 0.5, 0.6: D+ = max(1/3-0.1, 2/3-0.5, 1-0.6) = 0.4.
  const std::vector<double> xs = {0.6, 0.1, 0.5};
  EXPECT_NEAR(gevr::ks_statistic(xs, [](double x) { return x; }), 0.4, 1e-15);
}

TEST(Stats, KsPvalueMonotone) {
  EXPECT_GT(gevr::ks_pvalue(0.01, 1000), 0.99);
  EXPECT_LT(gevr::ks_pvalue(0.2, 1000), 1e-10);
  EXPECT_GT(gevr::ks_pvalue(0.03, 1000), gevr::ks_pvalue(0.05, 1000));
}

TEST(Stats, MeanVarUnbiased) {
  const std::vector<double> xs = {1, 2, 3, 4};
  const auto mv = gevr::mean_var(xs);
  EXPECT_DOUBLE_EQ(mv.mean, 2.5);
  EXPECT_DOUBLE_EQ(mv.variance, 5.0 / 3.0);
}

TEST(Stats, ParallelForVisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  gevr::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}
