#include "gevr/selection.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "gevr/error.hpp"

namespace gevr {
namespace {

void check_pvalues(std::span<const double> p) {
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("p-values must lie in [0, 1]");
}

}  // namespace

std::string to_string(StopRule rule) {
  switch (rule) {
    case StopRule::ForwardStop:
      return "forwardstop";
    case StopRule::StrongStop:
      return "strongstop";
    case StopRule::None:
      return "none";
  }
  return "unknown";
}

StopRule parse_stop_rule(const std::string& name) {
  if (name == "forwardstop") return StopRule::ForwardStop;
  if (name == "strongstop") return StopRule::StrongStop;
  if (name == "none") return StopRule::None;
  throw DomainError("unknown stopping rule '" + name + "' (expected forwardstop, strongstop or none)");
}

std::size_t forward_stop(std::span<const double> p, double alpha) {
  check_pvalues(p);
  if (!(alpha > 0.0)) return 0;
  std::size_t k_hat = 0;
  double sum = 0.0;
  for (std::size_t k = 1; k <= p.size(); ++k) {
    const double v = p[k - 1];
    sum += v >= 1.0 ? std::numeric_limits<double>::infinity() : -std::log1p(-v);
    if (sum / static_cast<double>(k) <= alpha) k_hat = k;
  }
  return k_hat;
}

std::size_t strong_stop(std::span<const double> p, double alpha) {
  check_pvalues(p);
  if (!(alpha > 0.0)) return 0;
  const std::size_t m = p.size();
  double tail = 0.0;  // sum_{j>=k} log(p_j) / j
  for (std::size_t k = m; k >= 1; --k) {
    tail += std::log(p[k - 1]) / static_cast<double>(k);
    if (std::exp(tail) <= alpha * static_cast<double>(k) / static_cast<double>(m)) return k;
  }
  return 0;
}

Decision decide(std::span<const double> p_by_r, StopRule rule, double alpha) {
  check_pvalues(p_by_r);
  const std::size_t R = p_by_r.size();
  Decision d;
  if (rule == StopRule::None) {
    d.r_hat = R;
    if (alpha > 0.0) {
      for (std::size_t r = 1; r <= R; ++r) {
        if (p_by_r[r - 1] < alpha) {
          d.r_hat = r - 1;
          break;
        }
      }
    }
    d.k_hat = R - d.r_hat;
    return d;
  }
  const std::vector<double> reversed(p_by_r.rbegin(), p_by_r.rend());
  d.k_hat = rule == StopRule::ForwardStop ? forward_stop(reversed, alpha) : strong_stop(reversed, alpha);
  d.r_hat = R - d.k_hat;
  return d;
}

SelectionResult select_r(const RLargestSample& sample, std::size_t R, const RngStream& rng,
                         const SelectionOptions& options) {
  if (R < 1) throw DomainError("select_r: R must be >= 1");
  if (sample.r() < R)
    throw DomainError("select_r: sample has " + std::to_string(sample.r()) +
                      " columns, fewer than R = " + std::to_string(R));
  SelectionResult out;
  out.R = R;
  out.method = options.method;
  out.rule = options.rule;
  out.alpha = options.alpha;
  out.note =
      "p-values of the sequential tests are dependent; the stopping rule is applied without "
      "adjustment for dependence";
  out.p_by_r.assign(R, 1.0);
  out.tests.resize(R);

  for (std::size_t r = 1; r <= R; ++r) {
    TestMethod method = options.method;
    if (method == TestMethod::Ed && r == 1) {
      if (!options.test_first) {
        out.tests[0].r = 1;
        out.tests[0].method = TestMethod::Ed;
        continue;
      }
      method = options.first_method;
    }
    const RLargestSample sub = sample.leading(r);
    const std::string where = "H0 at r = " + std::to_string(r) + ": ";
    try {
      out.tests[r - 1] = run_test(method, sub, rng.substream(r), options.bootstrap);
    } catch (const ReliabilityError& e) {
      throw ReliabilityError(where + e.what(), e.failure_rate());
    } catch (const NumericError& e) {
      throw NumericError(where + e.what());
    } catch (const DomainError& e) {
      throw DomainError(where + e.what());
    }
    out.p_by_r[r - 1] = out.tests[r - 1].p_value;
  }
  const Decision d = decide(out.p_by_r, options.rule, options.alpha);
  out.k_hat = d.k_hat;
  out.r_hat = d.r_hat;
  return out;
}

}  // namespace gevr
