#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gevr/gof.hpp"
#include "gevr/inference.hpp"
#include "gevr/params.hpp"
#include "gevr/rng.hpp"

namespace gevr {

enum class StopRule { ForwardStop, StrongStop, None };

std::string to_string(StopRule rule);
/// Accepts "forwardstop", "strongstop", "none".
StopRule parse_stop_rule(const std::string& name);

/// Largest k with -(1/k) sum_{i<=k} log(1 - p_i) <= alpha, or 0. An entry
/// p_i = 1 transforms to +infinity. alpha <= 0 gives 0.
std::size_t forward_stop(std::span<const double> p, double alpha);

/// Largest k with exp(sum_{j>=k} log(p_j) / j) <= alpha k / m, or 0.
/// p_j = 0 makes every k <= j qualify. alpha <= 0 gives 0.
std::size_t strong_stop(std::span<const double> p, double alpha);

struct Decision {
  std::size_t k_hat = 0;
  std::size_t r_hat = 0;
};

/// Applies `rule` to p-values indexed by r = 1..R (p_by_r[0] is H0^(1)).
/// ForwardStop and StrongStop consume the reversed sequence H0^(R)..H0^(1);
/// None scans upward and stops at the first p < alpha.
Decision decide(std::span<const double> p_by_r, StopRule rule, double alpha);

struct SelectionOptions {
  TestMethod method = TestMethod::Ed;
  StopRule rule = StopRule::ForwardStop;
  double alpha = 0.05;
  BootstrapOptions bootstrap;
  /// Test used for H0^(1) when method is ed (which cannot test r = 1).
  TestMethod first_method = TestMethod::PbScore;
  /// When false and method is ed, H0^(1) is not tested and gets p = 1.
  bool test_first = true;
};

struct SelectionResult {
  std::size_t R = 0;
  TestMethod method = TestMethod::Ed;
  StopRule rule = StopRule::ForwardStop;
  double alpha = 0.05;
  std::vector<double> p_by_r;        // index r - 1
  std::vector<TestResult> tests;     // index r - 1; empty fit when untested
  std::size_t k_hat = 0;
  std::size_t r_hat = 0;
  /// Tests on nested column sets of one sample are dependent; the rules are
  /// applied without adjustment for it.
  std::string note;
};

/// Tests H0^(1)..H0^(R) on the leftmost r columns and applies the rule.
/// H0^(r) uses rng.substream(r). Failures are rethrown naming r.
SelectionResult select_r(const RLargestSample& sample, std::size_t R, const RngStream& rng,
                         const SelectionOptions& options = {});

}  // namespace gevr
