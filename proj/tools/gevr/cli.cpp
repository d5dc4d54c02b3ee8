#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gevr/error.hpp"
#include "gevr/ingest.hpp"
#include "gevr/inference.hpp"
#include "gevr/selection.hpp"
#include "gevr/simulation.hpp"
#include "gevr/version.hpp"
#include "manifest.hpp"

namespace gevr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write output file '" + path.string() + "'");
  out << content;
}

// Writes `content` to --out (plus manifest) or to stdout.
void emit(const std::string& content, const std::string& out_path, Manifest manifest, std::ostream& out) {
  if (out_path.empty()) {
    out << content;
    return;
  }
  write_file(out_path, content);
  manifest.outputs.push_back(out_path);
  manifest.write(out_path);
}

json params_json(const GevParams& p) { return {{"mu", p.mu}, {"sigma", p.sigma}, {"xi", p.xi}}; }

json fit_json(const FitResult& f) {
  json info = json::array();
  for (int i = 0; i < 3; ++i) info.push_back({f.info(i, 0), f.info(i, 1), f.info(i, 2)});
  json doc = {{"theta_hat", params_json(f.theta_hat)},
              {"se", {{"mu", f.se(0)}, {"sigma", f.se(1)}, {"xi", f.se(2)}}},
              {"loglik", f.loglik},
              {"n", f.n},
              {"r", f.r},
              {"converged", f.converged},
              {"info_kind", to_string(f.info_kind)},
              {"info", info}};
  if (!f.message.empty()) doc["message"] = f.message;
  return doc;
}

struct DeclusterArgs {
  std::string input;
  std::string format = "table";
  std::string tau;
  std::size_t r = 0;
  double completeness = 0.9;
  std::string element = "PRCP";
  std::string time_column = "time";
  std::string value_column = "value";
  std::string delimiter = ",";
  std::string out;
};

struct FitArgs {
  std::string input;
  std::size_t r = 0;
  std::vector<double> return_levels;
  double ci_level = 0.95;
  std::string info = "observed";
  std::string out;
};

struct SelectArgs {
  std::string input;
  std::size_t R = 0;
  std::string method = "ed";
  std::string rule = "forwardstop";
  double alpha = 0.05;
  std::size_t L = 500;
  std::uint64_t seed = 1;
  std::string first_test = "pb-score";
  bool add_one = false;
  std::string out;
};

struct SimulateArgs {
  std::string scenario;
  std::string config;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> L;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;
  std::string out;
};

int cmd_decluster(const DeclusterArgs& a, const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  Manifest manifest;
  manifest.command = "decluster";
  manifest.args = args;
  BlockSpec spec;
  spec.tau = Tau::parse(a.tau);
  spec.completeness = a.completeness;
  if (a.r < 1) throw UsageError("--r must be >= 1");
  if (a.delimiter.size() != 1) throw UsageError("--delimiter must be a single character");

  ObservationSeries series;
  if (a.format == "ghcn") {
    series = parse_ghcn_daily(fs::path(a.input), a.element);
  } else if (a.format == "table") {
    TableOptions opts;
    opts.time_column = a.time_column;
    opts.value_column = a.value_column;
    opts.delimiter = a.delimiter[0];
    series = parse_table(fs::path(a.input), opts);
  } else {
    throw UsageError("--format must be ghcn or table");
  }
  manifest.inputs.push_back(a.input);

  const DeclusterResult res = decluster(series, spec, a.r);
  for (const auto& d : res.dropped) err << "dropped year " << d.year << ": " << d.reason << '\n';
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';
  std::ostringstream body;
  write_sample(body, res.sample);
  emit(body.str(), a.out, manifest, out);
  return kOk;
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest;
  manifest.command = "fit";
  manifest.args = args;
  RLargestSample sample = read_sample(fs::path(a.input));
  manifest.inputs.push_back(a.input);
  if (a.r > sample.r())
    throw UsageError("--r " + std::to_string(a.r) + " exceeds the " + std::to_string(sample.r()) +
                     " columns of the input");
  if (a.r >= 1) sample = sample.leading(a.r);
  if (!(a.ci_level > 0.0 && a.ci_level < 1.0)) throw UsageError("--ci-level must be in (0, 1)");
  FitOptions fo;
  if (a.info == "expected") fo.info_kind = InfoKind::Expected;
  else if (a.info != "observed") throw UsageError("--info must be observed or expected");

  const FitResult fit = fit_gevr(sample, std::nullopt, fo);
  if (!fit.converged) throw NumericError("fit did not converge: " + fit.message);
  json doc = fit_json(fit);
  json levels = json::array();
  for (double t : a.return_levels) {
    if (!(t > 1.0)) throw UsageError("return periods must exceed 1");
    json entry = {{"t", t}, {"estimate", return_level(fit.theta_hat, t)}, {"level", a.ci_level}};
    try {
      const ReturnLevelEstimate ci = profile_ci_return_level(sample, t, a.ci_level, fit);
      entry["ci_low"] = ci.ci_low;
      entry["ci_high"] = ci.ci_high;
    } catch (const BracketExhaustedError& e) {
      entry["ci_low"] = nullptr;
      entry["ci_high"] = nullptr;
      entry["ci_error"] = e.what();
    }
    levels.push_back(entry);
  }
  doc["return_levels"] = levels;
  emit(doc.dump(2) + "\n", a.out, manifest, out);
  return kOk;
}

int cmd_select(const SelectArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest;
  manifest.command = "select";
  manifest.args = args;
  manifest.seed = a.seed;
  const RLargestSample sample = read_sample(fs::path(a.input));
  manifest.inputs.push_back(a.input);
  if (a.R < 1 || a.R > sample.r())
    throw UsageError("--R must be between 1 and the " + std::to_string(sample.r()) + " columns of the input");
  SelectionOptions opts;
  opts.method = parse_test_method(a.method);
  opts.rule = parse_stop_rule(a.rule);
  opts.alpha = a.alpha;
  opts.bootstrap.L = a.L;
  opts.bootstrap.add_one = a.add_one;
  if (a.first_test == "none") opts.test_first = false;
  else opts.first_method = parse_test_method(a.first_test);
  if (opts.first_method == TestMethod::Ed) throw UsageError("--first-test cannot be ed");

  const SelectionResult res = select_r(sample, a.R, RngStream(a.seed), opts);
  json tests = json::array();
  for (std::size_t r = 1; r <= a.R; ++r) {
    const TestResult& t = res.tests[r - 1];
    const bool tested = t.fit.n > 0;
    json entry = {{"r", r}, {"p_value", res.p_by_r[r - 1]}, {"tested", tested}};
    if (tested) {
      entry["method"] = to_string(t.method);
      entry["statistic"] = t.statistic;
      entry["L_used"] = t.L_used;
      entry["dropped"] = t.dropped;
      entry["fit"] = {{"theta_hat", params_json(t.fit.theta_hat)},
                      {"loglik", t.fit.loglik},
                      {"converged", t.fit.converged}};
    }
    tests.push_back(entry);
  }
  std::vector<std::size_t> rejected;
  for (std::size_t r = res.r_hat + 1; r <= a.R; ++r) rejected.push_back(r);
  json doc = {{"R", res.R},          {"method", to_string(res.method)}, {"rule", to_string(res.rule)},
              {"alpha", res.alpha},  {"L", a.L},                        {"seed", a.seed},
              {"p_by_r", res.p_by_r}, {"k_hat", res.k_hat},             {"r_hat", res.r_hat},
              {"rejected", rejected}, {"tests", tests},                 {"note", res.note}};
  emit(doc.dump(2) + "\n", a.out, manifest, out);
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest;
  manifest.command = "simulate";
  manifest.args = args;
  json doc = json::object();
  if (!a.config.empty()) {
    const std::string text = read_file(a.config);
    manifest.inputs.push_back(a.config);
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (!a.scenario.empty()) {
    if (doc.contains("scenario") && doc["scenario"] != a.scenario)
      throw UsageError("--scenario disagrees with the config file");
    doc["scenario"] = a.scenario;
  }
  if (!doc.contains("scenario")) throw UsageError("--scenario or a config with a scenario is required");
  if (a.full_scale) doc["full_scale"] = true;
  if (a.replicates) doc["replicates"] = *a.replicates;
  if (a.L) doc["L"] = *a.L;
  if (a.seed) doc["seed"] = *a.seed;

  const SimConfig config = SimConfig::from_json(doc.dump());
  manifest.seed = config.seed;
  const SimTable table = run_study(config);
  std::ostringstream csv;
  table.write_csv(csv);
  if (a.out.empty()) {
    out << csv.str();
    return kOk;
  }
  const fs::path csv_path = a.out + ".csv";
  const fs::path json_path = a.out + ".json";
  write_file(csv_path, csv.str());
  write_file(json_path, table.to_json() + "\n");
  manifest.outputs = {csv_path, json_path};
  manifest.write(a.out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit, test and select r-largest order statistic models"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: GEVR_THREADS or all cores)");

  DeclusterArgs dec;
  auto* c_dec = app.add_subcommand("decluster", "Extract the r largest independent events per year");
  c_dec->add_option("input", dec.input, "Observation file")->required();
  c_dec->add_option("--format", dec.format, "ghcn or table")->capture_default_str();
  c_dec->add_option("--tau", dec.tau, "Storm length with unit: obs, s, min, h, d (e.g. 2d)")->required();
  c_dec->add_option("--r", dec.r, "Events per year")->required();
  c_dec->add_option("--completeness", dec.completeness, "Minimum fraction of readings per year")
      ->capture_default_str();
  c_dec->add_option("--element", dec.element, "GHCN-Daily element")->capture_default_str();
  c_dec->add_option("--time-column", dec.time_column)->capture_default_str();
  c_dec->add_option("--value-column", dec.value_column)->capture_default_str();
  c_dec->add_option("--delimiter", dec.delimiter)->capture_default_str();
  c_dec->add_option("--out", dec.out, "Output file (default stdout)");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Maximum likelihood fit and return levels");
  c_fit->add_option("input", fit.input, "Sample file (block,x1,...,xr)")->required();
  c_fit->add_option("--r", fit.r, "Use the leftmost r columns (default all)");
  c_fit->add_option("--return-levels", fit.return_levels, "Return periods, comma separated")->delimiter(',');
  c_fit->add_option("--ci-level", fit.ci_level)->capture_default_str();
  c_fit->add_option("--info", fit.info, "observed or expected")->capture_default_str();
  c_fit->add_option("--out", fit.out, "Output JSON (default stdout)");

  SelectArgs sel;
  auto* c_sel = app.add_subcommand("select", "Sequential goodness-of-fit tests and choice of r");
  c_sel->add_option("input", sel.input, "Sample file (block,x1,...,xR)")->required();
  c_sel->add_option("--R", sel.R, "Largest r tested")->required();
  c_sel->add_option("--method", sel.method, "ed, pb-score or mb-score")->capture_default_str();
  c_sel->add_option("--rule", sel.rule, "forwardstop, strongstop or none")->capture_default_str();
  c_sel->add_option("--alpha", sel.alpha)->capture_default_str();
  c_sel->add_option("--L", sel.L, "Bootstrap replicates")->capture_default_str();
  c_sel->add_option("--seed", sel.seed)->capture_default_str();
  c_sel->add_option("--first-test", sel.first_test, "Test for r = 1 under ed: pb-score, mb-score or none")
      ->capture_default_str();
  c_sel->add_flag("--add-one", sel.add_one, "Use (1 + count) / (L + 1) bootstrap p-values");
  c_sel->add_option("--out", sel.out, "Output JSON (default stdout)");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo size, power and error-control studies");
  c_sim->add_option("--scenario", sim.scenario, "size, power-kumgev, power-mixture, error-control, r-choice");
  c_sim->add_option("--config", sim.config, "JSON study configuration");
  c_sim->add_option("--replicates", sim.replicates);
  c_sim->add_option("--L", sim.L);
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_flag("--full-scale", sim.full_scale, "1000 replicates and L = 1000 unless overridden");
  c_sim->add_option("--out", sim.out, "Output base path: writes <out>.csv, <out>.json");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("gevr");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "gevr: " << e.what() << '\n';
    return kUsage;
  }

  if (threads > 0) setenv("GEVR_THREADS", std::to_string(threads).c_str(), 1);

  try {
    if (*c_dec) return cmd_decluster(dec, args, out, err);
    if (*c_fit) return cmd_fit(fit, args, out);
    if (*c_sel) return cmd_select(sel, args, out);
    if (*c_sim) return cmd_simulate(sim, args, out);
  } catch (const UsageError& e) {
    err << "gevr: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "gevr: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "gevr: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "gevr: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "gevr: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

}  // namespace gevr::cli
