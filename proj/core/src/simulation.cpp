#include "gevr/simulation.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gevr/distributions.hpp"
#include "gevr/error.hpp"
#include "gevr/ingest.hpp"
#include "gevr/stats.hpp"
#include "gevr/version.hpp"

namespace gevr {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Number of leading hypotheses that hold in each design.
std::size_t true_nulls(const SimConfig& c) { return c.design == Design::Misspecified ? 4 : c.R; }

std::string design_name(Design d) { return d == Design::Misspecified ? "misspecified" : "all-null"; }

Design parse_design(const std::string& s) {
  if (s == "all-null") return Design::AllNull;
  if (s == "misspecified") return Design::Misspecified;
  throw DomainError("unknown design '" + s + "' (expected all-null or misspecified)");
}

unsigned workers(const SimConfig& c) { return c.threads == 0 ? default_thread_count() : c.threads; }

BootstrapOptions bootstrap_options(const SimConfig& c) {
  BootstrapOptions b;
  b.L = c.L;
  b.threads = 1;  // replicates already run in parallel
  return b;
}

void fill_rate(SimCell& cell, double successes, std::size_t used, std::size_t failures,
               double flag_rate) {
  cell.successes = successes;
  cell.replicates = used;
  cell.failures = failures;
  const double p = used > 0 ? successes / static_cast<double>(used) : kNaN;
  cell.percent = 100.0 * p;
  cell.mc_se = used > 0 ? 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(used)) : kNaN;
  const std::size_t total = used + failures;
  cell.flagged = total == 0 || static_cast<double>(failures) / static_cast<double>(total) > flag_rate;
}

// p-value of one test, NaN when the fit or the test failed.
double safe_pvalue(TestMethod method, const RLargestSample& sample, const RngStream& rng,
                   const BootstrapOptions& options) {
  try {
    return run_test(method, sample, rng, options).p_value;
  } catch (const NumericError&) {
    return kNaN;
  } catch (const DomainError&) {
    return kNaN;
  }
}

struct GridPoint {
  double xi;
  std::size_t n;
  std::size_t r;
  double param;
};

// Single-test studies share one loop: every replicate draws one data set and
// runs every configured method on it.
SimTable run_single_test_study(const SimConfig& config, const std::vector<GridPoint>& grid,
                               const std::function<RLargestSample(const GridPoint&, const RngStream&)>& make) {
  config.validate();
  SimTable table;
  table.config = config;
  const RngStream root(config.seed);
  const BootstrapOptions boot = bootstrap_options(config);
  const std::size_t m = config.methods.size();

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GridPoint& pt = grid[g];
    std::vector<double> pvals(config.replicates * m, kNaN);
    parallel_for(config.replicates, workers(config), [&](std::size_t k) {
      RLargestSample data;
      try {
        data = make(pt, root.substream({g, k, 0}));
      } catch (const DomainError&) {
        return;
      }
      for (std::size_t j = 0; j < m; ++j)
        pvals[k * m + j] = safe_pvalue(config.methods[j], data, root.substream({g, k, 1 + j}), boot);
    });
    for (std::size_t j = 0; j < m; ++j) {
      for (double a : config.alpha) {
        SimCell cell;
        cell.scenario = to_string(config.scenario);
        cell.method = to_string(config.methods[j]);
        cell.metric = "rejection";
        cell.xi = pt.xi;
        cell.n = pt.n;
        cell.r = pt.r;
        cell.param = pt.param;
        cell.alpha = a;
        std::size_t used = 0;
        double rejected = 0.0;
        for (std::size_t k = 0; k < config.replicates; ++k) {
          const double p = pvals[k * m + j];
          if (std::isnan(p)) continue;
          ++used;
          if (p < a) rejected += 1.0;
        }
        fill_rate(cell, rejected, used, config.replicates - used, config.flag_failure_rate);
        table.cells.push_back(cell);
      }
    }
  }
  return table;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Size:
      return "size";
    case Scenario::PowerKumGev:
      return "power-kumgev";
    case Scenario::PowerMixture:
      return "power-mixture";
    case Scenario::ErrorControl:
      return "error-control";
    case Scenario::RChoice:
      return "r-choice";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "size") return Scenario::Size;
  if (name == "power-kumgev") return Scenario::PowerKumGev;
  if (name == "power-mixture") return Scenario::PowerMixture;
  if (name == "error-control") return Scenario::ErrorControl;
  if (name == "r-choice") return Scenario::RChoice;
  throw DomainError("unknown scenario '" + name + "'");
}

SimConfig SimConfig::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("simulation config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("simulation config must be a JSON object");
  SimConfig c;
  try {
    c.scenario = parse_scenario(doc.at("scenario").get<std::string>());
    switch (c.scenario) {
      case Scenario::PowerKumGev:
        c.scheme = {1.0};
        break;
      case Scenario::PowerMixture:
        c.scheme = {1.0};
        break;
      case Scenario::ErrorControl:
        c.alpha = {0.05, 0.1, 0.2};
        break;
      case Scenario::RChoice:
        c.design = Design::Misspecified;
        c.R = 6;
        c.xi = {0.25};
        c.rules = {StopRule::None, StopRule::ForwardStop, StopRule::StrongStop};
        break;
      case Scenario::Size:
        break;
    }
    if (doc.contains("methods")) {
      c.methods.clear();
      for (const auto& m : doc["methods"]) c.methods.push_back(parse_test_method(m.get<std::string>()));
    }
    if (doc.contains("xi")) c.xi = doc["xi"].get<std::vector<double>>();
    if (doc.contains("n")) c.n = doc["n"].get<std::vector<std::size_t>>();
    if (doc.contains("r")) c.r = doc["r"].get<std::vector<std::size_t>>();
    if (doc.contains("R")) c.R = doc["R"].get<std::size_t>();
    if (doc.contains("alpha")) c.alpha = doc["alpha"].get<std::vector<double>>();
    if (doc.contains("ab")) c.scheme = doc["ab"].get<std::vector<double>>();
    if (doc.contains("p")) c.scheme = doc["p"].get<std::vector<double>>();
    if (doc.contains("design")) c.design = parse_design(doc["design"].get<std::string>());
    if (doc.contains("rules")) {
      c.rules.clear();
      for (const auto& r : doc["rules"]) c.rules.push_back(parse_stop_rule(r.get<std::string>()));
    }
    if (doc.value("full_scale", false)) {
      c.replicates = 1000;
      c.L = 1000;
    }
    if (doc.contains("replicates")) c.replicates = doc["replicates"].get<std::size_t>();
    if (doc.contains("L")) c.L = doc["L"].get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("ed_first")) {
      const auto first = doc["ed_first"].get<std::string>();
      c.ed_first_untested = first == "untested";
      if (!c.ed_first_untested) c.ed_first_method = parse_test_method(first);
    }
    if (doc.contains("flag_failure_rate")) c.flag_failure_rate = doc["flag_failure_rate"].get<double>();
    if (doc.contains("threads")) c.threads = doc["threads"].get<unsigned>();
  } catch (const json::exception& e) {
    throw DataError(std::string("simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string SimConfig::to_json() const {
  json doc;
  doc["scenario"] = gevr::to_string(scenario);
  json methods_json = json::array();
  for (TestMethod m : methods) methods_json.push_back(gevr::to_string(m));
  doc["methods"] = methods_json;
  doc["xi"] = xi;
  doc["n"] = n;
  doc["alpha"] = alpha;
  doc["replicates"] = replicates;
  doc["L"] = L;
  doc["seed"] = seed;
  switch (scenario) {
    case Scenario::Size:
      doc["r"] = r;
      break;
    case Scenario::PowerKumGev:
      doc["ab"] = scheme;
      break;
    case Scenario::PowerMixture:
      doc["p"] = scheme;
      break;
    case Scenario::ErrorControl:
    case Scenario::RChoice: {
      doc["R"] = R;
      doc["design"] = design_name(design);
      json rules_json = json::array();
      for (StopRule rule : rules) rules_json.push_back(gevr::to_string(rule));
      doc["rules"] = rules_json;
      doc["ed_first"] = ed_first_untested ? std::string("untested") : gevr::to_string(ed_first_method);
      break;
    }
  }
  doc["flag_failure_rate"] = flag_failure_rate;
  return doc.dump(2);
}

void SimConfig::validate() const {
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (methods.empty()) throw DomainError("at least one test method is required");
  if (alpha.empty()) throw DomainError("at least one nominal level is required");
  for (double a : alpha)
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("nominal levels must lie in [0, 1)");
  for (double x : xi)
    if (!(x > -0.5 && x < 1.0)) throw DomainError("xi values must lie in (-0.5, 1)");
  for (std::size_t v : n)
    if (v < 5) throw DomainError("sample sizes must be >= 5");
  if (xi.empty() || n.empty()) throw DomainError("xi and n grids must be non-empty");
  const bool bootstrap = std::any_of(methods.begin(), methods.end(),
                                     [](TestMethod m) { return m != TestMethod::Ed; });
  if (bootstrap && L < 1) throw DomainError("L must be >= 1 for bootstrap methods");
  switch (scenario) {
    case Scenario::Size:
      if (r.empty()) throw DomainError("size study needs r values");
      for (std::size_t v : r) {
        if (v < 1) throw DomainError("r values must be >= 1");
      }
      break;
    case Scenario::PowerKumGev:
      if (scheme.empty()) throw DomainError("power-kumgev needs a = b values");
      for (double v : scheme)
        if (!(v > 0.0)) throw DomainError("a = b must be positive");
      break;
    case Scenario::PowerMixture:
      if (scheme.empty()) throw DomainError("power-mixture needs mixing rates p");
      for (double v : scheme)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("mixing rates must lie in [0, 1]");
      break;
    case Scenario::ErrorControl:
    case Scenario::RChoice:
      if (R < 1) throw DomainError("R must be >= 1");
      if (design == Design::Misspecified && R > 6)
        throw DomainError("the misspecified design supports R <= 6");
      if (rules.empty()) throw DomainError("at least one stopping rule is required");
      break;
  }
}

void SimTable::write_csv(std::ostream& out) const {
  out << "scenario,method,rule,metric,xi,n,r,param,alpha,successes,replicates,failures,percent,mc_se,flagged\n";
  for (const SimCell& c : cells) {
    out << c.scenario << ',' << c.method << ',' << c.rule << ',' << c.metric << ',' << format_double(c.xi)
        << ',' << c.n << ',' << c.r << ',' << (std::isnan(c.param) ? std::string() : format_double(c.param))
        << ',' << format_double(c.alpha) << ',' << format_double(c.successes) << ',' << c.replicates << ','
        << c.failures << ',' << format_double(c.percent) << ',' << format_double(c.mc_se) << ','
        << (c.flagged ? 1 : 0) << '\n';
  }
}

std::string SimTable::to_json() const {
  json doc;
  doc["metadata"] = {{"version", kVersion},
                     {"seed", config.seed},
                     {"config", json::parse(config.to_json())},
                     {"notes", notes}};
  json rows = json::array();
  for (const SimCell& c : cells) {
    json row = {{"scenario", c.scenario}, {"method", c.method},     {"rule", c.rule},
                {"metric", c.metric},     {"xi", c.xi},             {"n", c.n},
                {"r", c.r},               {"alpha", c.alpha},       {"successes", c.successes},
                {"replicates", c.replicates}, {"failures", c.failures}, {"flagged", c.flagged}};
    row["param"] = std::isnan(c.param) ? json(nullptr) : json(c.param);
    row["percent"] = std::isnan(c.percent) ? json(nullptr) : json(c.percent);
    row["mc_se"] = std::isnan(c.mc_se) ? json(nullptr) : json(c.mc_se);
    rows.push_back(row);
  }
  doc["cells"] = rows;
  return doc.dump(2);
}

void kumgev_block(std::span<double> out5, const GevParams& theta, double ab, RngStream& rng) {
  sample_gevr_block(out5.first(4), theta, rng);
  const KumGevParams kappa(theta, ab, ab);
  double x5 = out5[3];
  while (!(x5 < out5[3])) x5 = sample_truncated_kumgev(out5[3], kappa, rng);
  out5[4] = x5;
}

void mixture_block(std::span<double> out5, const GevParams& theta, double p, RngStream& rng) {
  std::array<double, 6> full{};
  sample_gevr_block(full, theta, rng);
  for (std::size_t j = 0; j < 4; ++j) out5[j] = full[j];
  out5[4] = rng.uniform() < p ? full[4] : full[5];
}

void misspecified_block(std::span<double> out6, const GevParams& theta, RngStream& rng) {
  std::array<double, 7> full{};
  sample_gevr_block(full, theta, rng);
  for (std::size_t j = 0; j < 4; ++j) out6[j] = full[j];
  const bool fifth_from_sixth = rng.uniform() >= 0.5;
  out6[4] = fifth_from_sixth ? full[5] : full[4];
  const bool sixth_from_seventh = rng.uniform() >= 0.5;
  // When the 5th already took the 6th value the 6th must take the 7th to keep
  // the row strictly decreasing.
  out6[5] = (sixth_from_seventh || fifth_from_sixth) ? full[6] : full[5];
}

namespace {

template <typename Fill>
RLargestSample simulate_rows(std::size_t n, std::size_t width, const RngStream& rng, Fill fill) {
  std::vector<double> values(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream stream = rng.substream(i);
    fill(std::span<double>(values.data() + i * width, width), stream);
  }
  return RLargestSample(n, width, std::move(values));
}

}  // namespace

RLargestSample simulate_kumgev(std::size_t n, const GevParams& theta, double ab, const RngStream& rng) {
  return simulate_rows(n, 5, rng, [&](std::span<double> row, RngStream& s) { kumgev_block(row, theta, ab, s); });
}

RLargestSample simulate_mixture(std::size_t n, const GevParams& theta, double p, const RngStream& rng) {
  return simulate_rows(n, 5, rng, [&](std::span<double> row, RngStream& s) { mixture_block(row, theta, p, s); });
}

RLargestSample simulate_misspecified(std::size_t n, const GevParams& theta, const RngStream& rng) {
  return simulate_rows(n, 6, rng, [&](std::span<double> row, RngStream& s) { misspecified_block(row, theta, s); });
}

SimTable run_size_study(const SimConfig& config) {
  if (config.scenario != Scenario::Size) throw DomainError("run_size_study needs scenario size");
  std::vector<GridPoint> grid;
  for (double xi : config.xi)
    for (std::size_t n : config.n)
      for (std::size_t r : config.r) grid.push_back({xi, n, r, kNaN});
  return run_single_test_study(config, grid, [](const GridPoint& pt, const RngStream& rng) {
    return sample_gevr(pt.n, pt.r, GevParams{0.0, 1.0, pt.xi}, rng);
  });
}

SimTable run_power_study(const SimConfig& config) {
  const bool kum = config.scenario == Scenario::PowerKumGev;
  if (!kum && config.scenario != Scenario::PowerMixture)
    throw DomainError("run_power_study needs scenario power-kumgev or power-mixture");
  std::vector<GridPoint> grid;
  for (double xi : config.xi)
    for (std::size_t n : config.n)
      for (double v : config.scheme) grid.push_back({xi, n, 5, v});
  SimTable table = run_single_test_study(config, grid, [kum](const GridPoint& pt, const RngStream& rng) {
    const GevParams theta{0.0, 1.0, pt.xi};
    return kum ? simulate_kumgev(pt.n, theta, pt.param, rng) : simulate_mixture(pt.n, theta, pt.param, rng);
  });
  if (kum)
    table.notes.push_back(
        "5th value drawn from the univariate KumGEV law right-truncated at the 4th value");
  else
    table.notes.push_back("param is the probability of keeping the true 5th value; otherwise the 6th is used");
  return table;
}

SimTable run_error_control_study(const SimConfig& config) {
  if (config.scenario != Scenario::ErrorControl && config.scenario != Scenario::RChoice)
    throw DomainError("run_error_control_study needs scenario error-control or r-choice");
  config.validate();
  SimTable table;
  table.config = config;
  const RngStream root(config.seed);
  const BootstrapOptions boot = bootstrap_options(config);
  const std::size_t m = config.methods.size();
  const std::size_t R = config.R;
  const std::size_t k0 = true_nulls(config);

  std::size_t g = 0;
  for (double xi : config.xi) {
    for (std::size_t n : config.n) {
      const GevParams theta{0.0, 1.0, xi};
      // p-values per (replicate, method, r); NaN marks a failed replicate.
      std::vector<double> pvals(config.replicates * m * R, kNaN);
      parallel_for(config.replicates, workers(config), [&](std::size_t k) {
        const RngStream data_rng = root.substream({g, k, 0});
        const RLargestSample data = config.design == Design::Misspecified
                                        ? simulate_misspecified(n, theta, data_rng)
                                        : sample_gevr(n, R, theta, data_rng);
        for (std::size_t j = 0; j < m; ++j) {
          const RngStream test_rng = root.substream({g, k, 1 + j});
          std::vector<double> p(R, 1.0);
          bool ok = true;
          for (std::size_t r = 1; r <= R && ok; ++r) {
            TestMethod method = config.methods[j];
            if (method == TestMethod::Ed && r == 1) {
              if (config.ed_first_untested) continue;
              method = config.ed_first_method;
            }
            p[r - 1] = safe_pvalue(method, data.leading(r), test_rng.substream(r), boot);
            ok = !std::isnan(p[r - 1]);
          }
          if (!ok) continue;
          std::copy(p.begin(), p.end(), pvals.begin() + static_cast<long>((k * m + j) * R));
        }
      });

      for (std::size_t j = 0; j < m; ++j) {
        for (StopRule rule : config.rules) {
          for (double a : config.alpha) {
            std::size_t used = 0;
            double fwer = 0.0;
            double fdr = 0.0;
            std::vector<double> r_hat_counts(R + 1, 0.0);
            for (std::size_t k = 0; k < config.replicates; ++k) {
              const double* p = pvals.data() + (k * m + j) * R;
              if (std::isnan(p[0])) continue;
              ++used;
              const Decision d = decide(std::span<const double>(p, R), rule, a);
              const std::size_t false_rejections = d.r_hat < k0 ? k0 - d.r_hat : 0;
              if (false_rejections > 0) fwer += 1.0;
              if (d.k_hat > 0) fdr += static_cast<double>(false_rejections) / static_cast<double>(d.k_hat);
              r_hat_counts[d.r_hat] += 1.0;
            }
            const auto base = [&](const std::string& metric) {
              SimCell cell;
              cell.scenario = to_string(config.scenario);
              cell.method = to_string(config.methods[j]);
              cell.rule = to_string(rule);
              cell.metric = metric;
              cell.xi = xi;
              cell.n = n;
              cell.r = R;
              cell.param = kNaN;
              cell.alpha = a;
              return cell;
            };
            const std::size_t failures = config.replicates - used;
            if (config.scenario == Scenario::ErrorControl) {
              SimCell c1 = base("fwer");
              fill_rate(c1, fwer, used, failures, config.flag_failure_rate);
              table.cells.push_back(c1);
              SimCell c2 = base("fdr");
              fill_rate(c2, fdr, used, failures, config.flag_failure_rate);
              table.cells.push_back(c2);
            } else {
              for (std::size_t v = 0; v <= R; ++v) {
                SimCell c = base("r_hat=" + std::to_string(v));
                fill_rate(c, r_hat_counts[v], used, failures, config.flag_failure_rate);
                table.cells.push_back(c);
              }
            }
          }
        }
      }
      ++g;
    }
  }
  table.notes.push_back("design: " + design_name(config.design));
  table.notes.push_back(
      "p-values of the sequential tests are dependent; rules are applied without adjustment");
  if (std::find(config.methods.begin(), config.methods.end(), TestMethod::Ed) != config.methods.end())
    table.notes.push_back(config.ed_first_untested
                              ? "ed: H0 at r = 1 is not tested (p = 1)"
                              : "ed: H0 at r = 1 tested with " + to_string(config.ed_first_method));
  if (config.design == Design::Misspecified)
    table.notes.push_back(
        "misspecified design: 5th = 50/50 mix of 5th/6th, 6th = 50/50 mix of 6th/7th, 6th forced to the 7th "
        "when the 5th took the 6th");
  return table;
}

SimTable run_study(const SimConfig& config) {
  switch (config.scenario) {
    case Scenario::Size:
      return run_size_study(config);
    case Scenario::PowerKumGev:
    case Scenario::PowerMixture:
      return run_power_study(config);
    case Scenario::ErrorControl:
    case Scenario::RChoice:
      return run_error_control_study(config);
  }
  throw DomainError("unknown scenario");
}

}  // namespace gevr
