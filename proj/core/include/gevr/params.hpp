#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gevr {

/// Location, scale and shape of a GEV / GEV_r law.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  /// sigma > 0 and every field finite.
  [[nodiscard]] bool valid() const noexcept;
  /// xi > -0.5: the region where maximum likelihood behaves regularly.
  [[nodiscard]] bool estimable() const noexcept { return xi > -0.5; }

  friend bool operator==(const GevParams&, const GevParams&) = default;
};

/// Kumaraswamy-generalised GEV: F = 1 - (1 - G^a)^b.
struct KumGevParams {
  GevParams base;
  double a = 1.0;
  double b = 1.0;

  /// Throws DomainError unless a > 0, b > 0 and base is valid.
  KumGevParams(GevParams base_params, double a_, double b_);
};

// n blocks by r order statistics, stored row-major. Every row is strictly
// decreasing; construction rejects ties.
class RLargestSample {
 public:
  RLargestSample() = default;
  /// `values` is row-major n x r. Throws DomainError on bad shape, non-finite
  /// entries or rows that are not strictly decreasing.
  RLargestSample(std::size_t n, std::size_t r, std::vector<double> values,
                 std::vector<std::string> labels = {});

  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t r() const noexcept { return r_; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * r_, r_};
  }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[i * r_ + j];
  }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  /// Block labels (e.g. years); empty when the sample was simulated.
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Sample restricted to the leftmost (largest) `r` columns.
  [[nodiscard]] RLargestSample leading(std::size_t r) const;
  /// Affine image a*x + b with a > 0.
  [[nodiscard]] RLargestSample affine(double a, double b) const;

 private:
  std::size_t n_ = 0;
  std::size_t r_ = 0;
  std::vector<double> values_;
  std::vector<std::string> labels_;
};

}  // namespace gevr
