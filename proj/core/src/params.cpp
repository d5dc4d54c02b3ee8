#include "gevr/params.hpp"

#include <cmath>
#include <string>

#include "gevr/error.hpp"

namespace gevr {

bool GevParams::valid() const noexcept {
  return std::isfinite(mu) && std::isfinite(sigma) && std::isfinite(xi) && sigma > 0.0;
}

KumGevParams::KumGevParams(GevParams base_params, double a_, double b_)
    : base(base_params), a(a_), b(b_) {
  if (!base.valid()) throw DomainError("KumGEV: invalid base GEV parameters");
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("KumGEV: a and b must be positive");
}

RLargestSample::RLargestSample(std::size_t n, std::size_t r, std::vector<double> values,
                               std::vector<std::string> labels)
    : n_(n), r_(r), values_(std::move(values)), labels_(std::move(labels)) {
  if (n_ < 1 || r_ < 1) throw DomainError("RLargestSample: need n >= 1 and r >= 1");
  if (values_.size() != n_ * r_)
    throw DomainError("RLargestSample: expected " + std::to_string(n_ * r_) + " values, got " +
                      std::to_string(values_.size()));
  if (!labels_.empty() && labels_.size() != n_)
    throw DomainError("RLargestSample: label count does not match block count");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < r_; ++j) {
      const double v = values_[i * r_ + j];
      if (!std::isfinite(v))
        throw DomainError("RLargestSample: non-finite value in block " + std::to_string(i + 1));
      if (j > 0 && !(v < values_[i * r_ + j - 1]))
        throw DomainError("RLargestSample: block " + std::to_string(i + 1) +
                          " is not strictly decreasing at position " + std::to_string(j + 1) +
                          " (ties are not allowed)");
    }
  }
}

RLargestSample RLargestSample::leading(std::size_t r) const {
  if (r < 1 || r > r_)
    throw DomainError("RLargestSample::leading: r=" + std::to_string(r) + " outside 1.." +
                      std::to_string(r_));
  std::vector<double> out;
  out.reserve(n_ * r);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < r; ++j) out.push_back(values_[i * r_ + j]);
  return RLargestSample(n_, r, std::move(out), labels_);
}

RLargestSample RLargestSample::affine(double a, double b) const {
  if (!(a > 0.0)) throw DomainError("RLargestSample::affine: scale must be positive");
  std::vector<double> out(values_);
  for (double& v : out) v = a * v + b;
  return RLargestSample(n_, r_, std::move(out), labels_);
}

}  // namespace gevr
