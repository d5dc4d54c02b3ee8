#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gevr/gof.hpp"
#include "gevr/params.hpp"
#include "gevr/rng.hpp"
#include "gevr/selection.hpp"

namespace gevr {

enum class Scenario { Size, PowerKumGev, PowerMixture, ErrorControl, RChoice };

std::string to_string(Scenario s);
/// "size", "power-kumgev", "power-mixture", "error-control", "r-choice".
Scenario parse_scenario(const std::string& name);

/// Data designs for the sequential studies.
enum class Design {
  AllNull,       // GEV_R blocks, every H0^(r) true
  Misspecified,  // GEV_7 blocks with the 5th and 6th values mixed; H0^(r) true for r <= 4
};

struct SimConfig {
  Scenario scenario = Scenario::Size;
  std::vector<TestMethod> methods = {TestMethod::Ed};
  std::vector<double> xi = {0.0};
  std::vector<std::size_t> n = {100};
  /// Size study: the r values tested. Power studies always test the top 5.
  std::vector<std::size_t> r = {5};
  /// Sequential studies: hypotheses H0^(1)..H0^(R).
  std::size_t R = 10;
  std::vector<double> alpha = {0.05};
  /// a = b for power-kumgev, mixing rate p (probability of keeping the true
  /// 5th value) for power-mixture.
  std::vector<double> scheme;
  Design design = Design::AllNull;
  std::vector<StopRule> rules = {StopRule::StrongStop, StopRule::None};
  std::size_t replicates = 200;
  std::size_t L = 500;
  std::uint64_t seed = 1;
  /// Sequential studies with ed: test H0^(1) with this method, or leave it
  /// untested (p = 1) when `ed_first_untested`.
  bool ed_first_untested = true;
  TestMethod ed_first_method = TestMethod::PbScore;
  /// Cells whose failure rate exceeds this are flagged.
  double flag_failure_rate = 0.10;
  /// 0 selects default_thread_count().
  unsigned threads = 0;

  /// Applies scenario defaults for fields absent from the document.
  static SimConfig from_json(const std::string& text);
  [[nodiscard]] std::string to_json() const;
  /// Throws DomainError on out-of-range values.
  void validate() const;
};

struct SimCell {
  std::string scenario;
  std::string method;
  std::string rule;    // empty for single-test studies
  std::string metric;  // rejection | fwer | fdr | r_hat=k
  double xi = 0.0;
  std::size_t n = 0;
  std::size_t r = 0;   // tested r, or R for sequential studies
  double param = 0.0;  // a = b or p; NaN when not applicable
  double alpha = 0.0;
  double successes = 0.0;       // count (or summed proportion for fdr)
  std::size_t replicates = 0;   // replicates that entered the estimate
  std::size_t failures = 0;
  double percent = 0.0;
  double mc_se = 0.0;           // percent units, sqrt(p(1-p)/replicates)
  bool flagged = false;
};

struct SimTable {
  SimConfig config;
  std::vector<SimCell> cells;
  std::vector<std::string> notes;

  /// Long format, one row per cell.
  void write_csv(std::ostream& out) const;
  /// {"metadata": {...}, "cells": [...]}
  [[nodiscard]] std::string to_json() const;
};

/// One block for each generator. Rows are strictly decreasing.
void kumgev_block(std::span<double> out5, const GevParams& theta, double ab, RngStream& rng);
void mixture_block(std::span<double> out5, const GevParams& theta, double p, RngStream& rng);
void misspecified_block(std::span<double> out6, const GevParams& theta, RngStream& rng);

/// n blocks of the named design; block i uses rng.substream(i).
RLargestSample simulate_kumgev(std::size_t n, const GevParams& theta, double ab, const RngStream& rng);
RLargestSample simulate_mixture(std::size_t n, const GevParams& theta, double p, const RngStream& rng);
RLargestSample simulate_misspecified(std::size_t n, const GevParams& theta, const RngStream& rng);

SimTable run_size_study(const SimConfig& config);
SimTable run_power_study(const SimConfig& config);
SimTable run_error_control_study(const SimConfig& config);
/// Dispatch on config.scenario.
SimTable run_study(const SimConfig& config);

}  // namespace gevr
