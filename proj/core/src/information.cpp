#include <array>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "gevr/error.hpp"
#include "gevr/inference.hpp"

namespace gevr {
namespace {

bool is_pole(double x) { return x <= 0.0 && x == std::floor(x); }

// P_c(x) with Gamma^{(c)} = Gamma * P_c.
double gamma_derivative_factor(int c, double x) {
  if (c == 0) return 1.0;
  const double p0 = boost::math::digamma(x);
  if (c == 1) return p0;
  const double p1 = boost::math::trigamma(x);
  if (c == 2) return p0 * p0 + p1;
  const double p2 = boost::math::polygamma(2, x);
  if (c == 3) return p0 * p0 * p0 + 3.0 * p0 * p1 + p2;
  const double p3 = boost::math::polygamma(3, x);
  return p0 * p0 * p0 * p0 + 6.0 * p0 * p0 * p1 + 4.0 * p0 * p2 + 3.0 * p1 * p1 + p3;
}

// Gamma^{(c)}(x) / Gamma(j).
double gamma_derivative_ratio(int c, double x, int j) {
  if (is_pole(x)) throw DomainError("gamma derivative evaluated at a pole");
  const double ratio = x > 0.0 ? boost::math::tgamma_ratio(x, static_cast<double>(j))
                               : boost::math::tgamma(x) / boost::math::tgamma(static_cast<double>(j));
  return ratio * gamma_derivative_factor(c, x);
}

// E[W^{-alpha xi} ...] expansion shared by h and the information terms:
// (-xi)^{c-a} / Gamma(j) sum_alpha (-1)^alpha C(a, alpha) Gamma^{(c)}(j + s - alpha xi)
// where W ~ Gamma(j, 1) and s is the W-exponent of the monomial.
double w_moment(int j, double xi, int a, double s, int c) {
  double sum = 0.0;
  for (int alpha = 0; alpha <= a; ++alpha) {
    const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
    const double binom = boost::math::binomial_coefficient<double>(static_cast<unsigned>(a),
                                                                    static_cast<unsigned>(alpha));
    sum += sign * binom * gamma_derivative_ratio(c, j + s - alpha * xi, j);
  }
  return std::pow(-xi, c - a) * sum;
}

// Monomial coef * z^a u^{-k} B^m log^c(u), with u = 1 + xi z and B = u^{-1/xi}.
struct Term {
  double coef;
  int a;
  int k;
  int m;
  int c;
};
using Poly = std::vector<Term>;

Poly operator*(const Poly& p, const Poly& q) {
  Poly out;
  out.reserve(p.size() * q.size());
  for (const Term& s : p)
    for (const Term& t : q) out.push_back({s.coef * t.coef, s.a + t.a, s.k + t.k, s.m + t.m, s.c + t.c});
  return out;
}

Poly operator+(Poly p, const Poly& q) {
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

Poly scale(Poly p, double f) {
  for (Term& t : p) t.coef *= f;
  return p;
}

// Expectation under the j-th standardised order statistic. In W-space
// z^a u^{-k} B^m log^c u has W-exponent k xi + m.
double expect(const Poly& p, int j, double xi) {
  double total = 0.0;
  for (const Term& t : p) total += t.coef * w_moment(j, xi, t.a, t.k * xi + t.m, t.c);
  return total;
}

Mat3 expected_information_direct(std::size_t r, double sigma, double xi) {
  const double s = sigma;
  const double x = xi;
  const double s2 = s * s;
  const double cx = (1.0 + x) / x;

  // First and second derivatives of A = log u, ordered (mu, sigma, xi).
  const Poly A = {{1.0, 0, 0, 0, 1}};
  const std::array<Poly, 3> dA = {Poly{{-x / s, 0, 1, 0, 0}}, Poly{{-x / s, 1, 1, 0, 0}},
                                  Poly{{1.0, 1, 1, 0, 0}}};
  std::array<std::array<Poly, 3>, 3> d2A;
  d2A[0][0] = {{-x * x / s2, 0, 2, 0, 0}};
  d2A[0][1] = {{x / s2, 0, 1, 0, 0}, {-x * x / s2, 1, 2, 0, 0}};
  d2A[0][2] = {{-1.0 / s, 0, 2, 0, 0}};
  d2A[1][1] = {{2.0 * x / s2, 1, 1, 0, 0}, {-x * x / s2, 2, 2, 0, 0}};
  d2A[1][2] = {{-1.0 / s, 1, 2, 0, 0}};
  d2A[2][2] = {{-1.0, 2, 2, 0, 0}};

  // Derivatives of L = log B = -A / xi.
  const std::array<Poly, 3> dL = {
      Poly{{1.0 / s, 0, 1, 0, 0}}, Poly{{1.0 / s, 1, 1, 0, 0}},
      Poly{{1.0 / (x * x), 0, 0, 0, 1}, {-1.0 / x, 1, 1, 0, 0}}};
  std::array<std::array<Poly, 3>, 3> d2L;
  d2L[0][0] = {{x / s2, 0, 2, 0, 0}};
  d2L[0][1] = {{-1.0 / s2, 0, 1, 0, 0}, {x / s2, 1, 2, 0, 0}};
  d2L[0][2] = {{-1.0 / s, 1, 2, 0, 0}};
  d2L[1][1] = {{-2.0 / s2, 1, 1, 0, 0}, {x / s2, 2, 2, 0, 0}};
  d2L[1][2] = {{-1.0 / s, 2, 2, 0, 0}};
  d2L[2][2] = {{2.0 / (x * x), 1, 1, 0, 0}, {-2.0 / (x * x * x), 0, 0, 0, 1}, {1.0 / x, 2, 2, 0, 0}};

  const Poly B = {{1.0, 0, 0, 1, 0}};
  const int rr = static_cast<int>(r);
  Mat3 info = Mat3::Zero();
  for (int p = 0; p < 3; ++p) {
    for (int q = p; q < 3; ++q) {
      const auto up = static_cast<std::size_t>(p);
      const auto uq = static_cast<std::size_t>(q);
      const Poly b2 = B * (d2L[up][uq] + dL[up] * dL[uq]);
      Poly d2;
      if (q < 2) {
        d2 = scale(d2A[up][uq], cx);
      } else if (p < 2) {
        d2 = scale(dA[up], -1.0 / (x * x)) + scale(d2A[up][2], cx);
      } else {
        d2 = scale(A, 2.0 / (x * x * x)) + scale(dA[2], -2.0 / (x * x)) + scale(d2A[2][2], cx);
      }
      double value = expect(b2, rr, x);
      for (int j = 1; j <= rr; ++j) value += expect(d2, j, x);
      info(p, q) = value;
      info(q, p) = value;
    }
  }
  info(1, 1) -= static_cast<double>(r) / s2;
  return info;
}

}  // namespace

double gamma_derivative(int c, double x) {
  if (c < 0 || c > 4) throw DomainError("gamma_derivative: order must be in 0..4");
  if (is_pole(x)) throw DomainError("gamma_derivative: argument is a pole of the gamma function");
  return boost::math::tgamma(x) * gamma_derivative_factor(c, x);
}

double expected_moment_h(int j, const GevParams& theta, int a, double b, int c) {
  if (j < 1) throw DomainError("expected_moment_h: j must be >= 1");
  if (a < 0 || c < 0 || c > 4) throw DomainError("expected_moment_h: a >= 0 and c in 0..4");
  const double xi = theta.xi;
  if (xi == 0.0) {
    if (c > 0) return 0.0;  // log(1 + xi z) vanishes identically
    const double eps = 1e-5;
    return 0.5 * (w_moment(j, eps, a, 1.0 + b * eps, c) + w_moment(j, -eps, a, 1.0 - b * eps, c));
  }
  return w_moment(j, xi, a, 1.0 + b * xi, c);
}

Mat3 expected_information(std::size_t r, const GevParams& theta) {
  if (r < 1) throw DomainError("expected_information: r must be >= 1");
  if (!(theta.sigma > 0.0) || !(theta.xi > -0.5))
    throw DomainError("expected_information requires sigma > 0 and xi > -0.5");
  constexpr double kBand = 0.05;
  if (std::abs(theta.xi) >= kBand) return expected_information_direct(r, theta.sigma, theta.xi);

  // The closed form cancels catastrophically near xi = 0; interpolate in xi
  // from nodes outside the band.
  static constexpr std::array<double, 6> nodes = {-0.15, -0.10, -0.05, 0.05, 0.10, 0.15};
  Mat3 out = Mat3::Zero();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double weight = 1.0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (k != i) weight *= (theta.xi - nodes[k]) / (nodes[i] - nodes[k]);
    out += weight * expected_information_direct(r, theta.sigma, nodes[i]);
  }
  return out;
}

}  // namespace gevr
