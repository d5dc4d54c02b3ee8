#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gevr/distributions.hpp"
#include "gevr/error.hpp"
#include "gevr/gof.hpp"
#include "gevr/inference.hpp"
#include "gevr/stats.hpp"

using gevr::GevParams;
using gevr::Mat3;

TEST(ExpectedInformation, GumbelBlockMaximaClosedForms) {
  // Location-scale entries of the Gumbel information in closed form. xi = 0
  // sits inside the interpolation window, good to a few 1e-5.
  const double g = std::numbers::egamma;
  const double sigma = 2.0;
  const Mat3 info = gevr::expected_information(1, {0.5, sigma, 0.0});
  EXPECT_NEAR(info(0, 0), 1.0 / (sigma * sigma), 5e-5);
  EXPECT_NEAR(info(0, 1), -(1.0 - g) / (sigma * sigma), 5e-5);
  EXPECT_NEAR(info(1, 1), (std::numbers::pi * std::numbers::pi / 6 + (1 - g) * (1 - g)) / (sigma * sigma), 5e-5);
}

TEST(ExpectedInformation, MatchesQuadratureOfScoreOuterProduct) {
  // E[S S'] for r = 1 by integrating over u = G(x) on (0, 1).
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (double xi : {-0.2, 0.0, 0.3}) {
    const GevParams t{0.0, 1.5, xi};
    Mat3 quad;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        quad(a, b) = Quad::integrate(
            [&](double u) {
              if (u <= 0.0 || u >= 1.0) return 0.0;
              const double x[1] = {gevr::gev_quantile(u, t)};
              const gevr::Vec3 s = gevr::block_score(x, t);
              return s(a) * s(b);
            },
            0.0, 1.0, 20, 1e-12);
        quad(b, a) = quad(a, b);
      }
    const Mat3 ex = gevr::expected_information(1, t);
    const double scale = ex.diagonal().cwiseAbs().maxCoeff();
    EXPECT_LE((quad - ex).cwiseAbs().maxCoeff(), 1e-4 * scale) << "xi=" << xi << "\n"
                                                               << quad << "\n" << ex;
  }
}

TEST(ExpectedInformation, ObservedAgreesAtLargeN) {
  const GevParams t{0, 1, 0.25};
  const auto s = gevr::sample_gevr(40000, 2, t, gevr::RngStream(33));
  const Mat3 obs = gevr::information(s, t, gevr::InfoKind::Observed);
  const Mat3 ex = gevr::information(s, t, gevr::InfoKind::Expected);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(obs(i, j) / ex(i, j) - 1.0), 0.05) << i << "," << j;
}

TEST(ExpectedInformation, LocationInvariantAndScaleCovariant) {
  const Mat3 a = gevr::expected_information(4, {0.0, 1.0, 0.2});
  const Mat3 b = gevr::expected_information(4, {5.0, 1.0, 0.2});
  const Mat3 c = gevr::expected_information(4, {0.0, 3.0, 0.2});
  EXPECT_LE((a - b).norm(), 1e-12);
  EXPECT_NEAR(c(0, 0), a(0, 0) / 9.0, 1e-12);
  EXPECT_NEAR(c(2, 2), a(2, 2), 1e-12);
}

TEST(ExpectedInformation, MoreColumnsMoreInformation) {
  for (double xi : {-0.25, 0.0, 0.25}) {
    const Mat3 d = gevr::expected_information(2, {0, 1, xi}) - gevr::expected_information(1, {0, 1, xi});
    Eigen::SelfAdjointEigenSolver<Mat3> es(d);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9) << xi;
  }
}

TEST(ExpectedInformation, PositiveDefiniteOnValidRange) {
  for (std::size_t r : {1u, 2u, 5u, 10u})
    for (double xi : {-0.45, -0.25, -0.04, -1e-3, 0.0, 1e-3, 0.04, 0.25, 0.5, 0.9}) {
      const Mat3 m = gevr::expected_information(r, {0, 1, xi});
      EXPECT_LE((m - m.transpose()).norm(), 1e-10);
      Eigen::SelfAdjointEigenSolver<Mat3> es(m);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << "r=" << r << " xi=" << xi;
    }
}

TEST(ExpectedInformation, ContinuousThroughInterpolationWindow) {
  for (double xi : {-0.06, -0.05, -0.03, 0.0, 0.03, 0.05, 0.06}) {
    const Mat3 lo = gevr::expected_information(3, {0, 1, xi - 1e-4});
    const Mat3 hi = gevr::expected_information(3, {0, 1, xi + 1e-4});
    EXPECT_LE((lo - hi).cwiseAbs().maxCoeff(), 1e-2) << xi;
  }
}

TEST(ExpectedInformation, RejectsIrregularShape) {
  const auto s = gevr::sample_gevr(20, 2, {0, 1, 0}, gevr::RngStream(34));
  EXPECT_THROW(gevr::information(s, {0, 1, -0.6}, gevr::InfoKind::Expected), gevr::DomainError);
}

TEST(MomentH, ZeroExponentsGiveIndex) {
  for (int j : {1, 2, 5})
    for (double xi : {-0.2, 0.0, 0.25}) EXPECT_NEAR(gevr::expected_moment_h(j, {0, 1, xi}, 0, 0.0, 0), j, 1e-8);
}

TEST(MomentH, LogFactorVanishesAtGumbel) {
  EXPECT_EQ(gevr::expected_moment_h(1, {0, 1, 0.0}, 2, 0.5, 2), 0.0);
  EXPECT_EQ(gevr::expected_moment_h(3, {0, 1, 0.0}, 0, 1.0, 1), 0.0);
}

TEST(MomentH, SecondMomentTermMatchesMonteCarlo) {
  const double xi = 0.25;
  const GevParams t{0, 1, xi};
  const auto s = gevr::sample_gevr(100000, 3, t, gevr::RngStream(35));
  std::vector<double> v(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) v[i] = std::pow(1.0 + xi * s(i, 2), -2.0 / xi);
  const auto mv = gevr::mean_var(v);
  const double h = gevr::expected_moment_h(3, t, 0, 1.0 / xi, 0);
  EXPECT_LE(std::abs(mv.mean - h), 3 * std::sqrt(mv.variance / v.size()));
  EXPECT_NEAR(h, 12.0, 1e-10);  // Gamma(5)/Gamma(3)
}

TEST(MomentH, MixedTermsMatchMonteCarlo) {
  struct Case { int j, a; double b; int c; double xi; };
  for (const Case& k : {Case{2, 1, 1.0, 0, 0.2}, Case{3, 2, 0.0, 1, -0.2}, Case{1, 1, 1.0, 1, 0.1},
                        Case{4, 0, 1.0, 2, 0.3}, Case{2, 1, 0.0, 0, 0.0}}) {
    const GevParams t{0, 1, k.xi};
    const auto s = gevr::sample_gevr(100000, static_cast<std::size_t>(k.j), t, gevr::RngStream(36 + k.j));
    std::vector<double> v(s.n());
    for (std::size_t i = 0; i < s.n(); ++i) {
      const double z = s(i, k.j - 1);
      const double lu = std::log1p(k.xi * z);
      const double power = k.xi == 0.0 ? std::exp(-z) : std::exp(-(1.0 / k.xi + k.b) * lu);
      v[i] = std::pow(z, k.a) * power * std::pow(lu, k.c);
    }
    const auto mv = gevr::mean_var(v);
    const double h = gevr::expected_moment_h(k.j, t, k.a, k.b, k.c);
    EXPECT_LE(std::abs(mv.mean - h), 3.5 * std::sqrt(mv.variance / v.size()))
        << "j=" << k.j << " a=" << k.a << " b=" << k.b << " c=" << k.c << " xi=" << k.xi << " h=" << h
        << " mc=" << mv.mean;
  }
}

TEST(MomentH, AssemblesFirstMomentOfEntropyDifference) {
  for (double xi : {-0.2, 0.15, 0.3})
    for (std::size_t r : {1u, 2u, 5u}) {
      const GevParams t{0.4, 1.7, xi};
      const double e_log_u = gevr::expected_moment_h(static_cast<int>(r), t, 0, -1.0 / xi, 1);
      const double assembled = -std::log(t.sigma) - 1.0 - (1.0 + 1.0 / xi) * e_log_u;
      EXPECT_NEAR(assembled, gevr::ed_mean(r, t), 1e-9) << "r=" << r << " xi=" << xi;
    }
}

TEST(MomentH, PoleRaisesDomainError) {
  EXPECT_THROW(gevr::expected_moment_h(1, {0, 1, 0.5}, 0, -4.0, 0), gevr::DomainError);
}
