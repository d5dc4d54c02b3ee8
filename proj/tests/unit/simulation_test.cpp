#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "gevr/error.hpp"
#include "gevr/simulation.hpp"

using gevr::SimConfig;

namespace {

std::string csv_of(const gevr::SimTable& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

}  // namespace

TEST(Generators, RowsStrictlyDecreasing) {
  const gevr::GevParams t{0, 1, 0.25};
  for (const auto& s : {gevr::simulate_kumgev(300, t, 0.6, gevr::RngStream(1)),
                        gevr::simulate_mixture(300, t, 0.5, gevr::RngStream(2)),
                        gevr::simulate_misspecified(300, t, gevr::RngStream(3))}) {
    for (std::size_t i = 0; i < s.n(); ++i)
      for (std::size_t j = 1; j < s.r(); ++j) ASSERT_LT(s(i, j), s(i, j - 1));
  }
  EXPECT_EQ(gevr::simulate_kumgev(5, t, 1.0, gevr::RngStream(4)).r(), 5u);
  EXPECT_EQ(gevr::simulate_mixture(5, t, 1.0, gevr::RngStream(4)).r(), 5u);
  EXPECT_EQ(gevr::simulate_misspecified(5, t, gevr::RngStream(4)).r(), 6u);
}

TEST(Generators, MixtureAtOneKeepsTheFifthValue) {
  // p = 1 never swaps, so the top five equal a plain GEV_6 draw's top five.
  const auto a = gevr::simulate_mixture(50, {0, 1, 0}, 1.0, gevr::RngStream(5));
  const auto b = gevr::simulate_mixture(50, {0, 1, 0}, 0.0, gevr::RngStream(5));
  int differ = 0;
  for (std::size_t i = 0; i < a.n(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) ASSERT_EQ(a(i, j), b(i, j));
    differ += a(i, 4) != b(i, 4);
    ASSERT_GT(a(i, 4), b(i, 4));
  }
  EXPECT_EQ(differ, 50);
}

TEST(SimConfig, ScenarioDefaultsAndRoundTrip) {
  const auto c = SimConfig::from_json(R"({"scenario": "r-choice"})");
  EXPECT_EQ(c.R, 6u);
  EXPECT_EQ(c.design, gevr::Design::Misspecified);
  EXPECT_EQ(c.rules.size(), 3u);
  const auto back = SimConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  const auto p = SimConfig::from_json(R"({"scenario": "size", "full_scale": true})");
  EXPECT_EQ(p.replicates, 1000u);
  EXPECT_EQ(p.L, 1000u);
}

TEST(SimConfig, Validation) {
  EXPECT_THROW(SimConfig::from_json(R"({"scenario": "size", "replicates": 0})"), gevr::DomainError);
  EXPECT_THROW(SimConfig::from_json(R"({"scenario": "size", "xi": [-0.7]})"), gevr::DomainError);
  EXPECT_THROW(SimConfig::from_json(R"({"scenario": "warp"})"), gevr::DomainError);
  EXPECT_THROW(SimConfig::from_json("{"), gevr::DataError);
  EXPECT_THROW(SimConfig::from_json(R"({"scenario": "size", "n": "many"})"), gevr::DataError);
}

TEST(SizeStudy, SingleReplicateCellsAreDegenerate) {
  auto c = SimConfig::from_json(R"({"scenario": "size", "methods": ["ed", "mb-score"], "r": [2], "replicates": 1, "L": 20})");
  const auto t = gevr::run_study(c);
  ASSERT_EQ(t.cells.size(), 2u);
  for (const auto& cell : t.cells) {
    EXPECT_TRUE(cell.percent == 0.0 || cell.percent == 100.0);
    EXPECT_EQ(cell.mc_se, 0.0);
  }
}

TEST(SizeStudy, IndependentOfWorkerCount) {
  auto c = SimConfig::from_json(R"({"scenario": "size", "methods": ["ed", "mb-score"], "r": [2, 3], "replicates": 30, "L": 50})");
  c.threads = 1;
  const std::string one = csv_of(gevr::run_study(c));
  c.threads = 3;
  EXPECT_EQ(csv_of(gevr::run_study(c)), one);
}

TEST(SizeStudy, StandardErrorFormula) {
  auto c = SimConfig::from_json(R"({"scenario": "size", "r": [3], "replicates": 60, "alpha": [0.2]})");
  for (const auto& cell : gevr::run_study(c).cells) {
    const double p = cell.percent / 100.0;
    EXPECT_NEAR(cell.mc_se, 100.0 * std::sqrt(p * (1 - p) / cell.replicates), 1e-12);
    EXPECT_GE(cell.percent, 0.0);
    EXPECT_LE(cell.percent, 100.0);
  }
}

TEST(ErrorControl, ZeroLevelNeverRejects) {
  auto c = SimConfig::from_json(R"({"scenario": "r-choice", "alpha": [0.0], "replicates": 10})");
  const auto t = gevr::run_study(c);
  for (const auto& cell : t.cells) {
    if (cell.metric == "r_hat=6") EXPECT_EQ(cell.percent, 100.0) << cell.rule;
    else if (cell.metric.rfind("r_hat=", 0) == 0) EXPECT_EQ(cell.percent, 0.0) << cell.metric;
  }
}

TEST(ErrorControl, ReportsFwerAndFdr) {
  auto c = SimConfig::from_json(R"({"scenario": "error-control", "R": 4, "alpha": [0.1], "replicates": 20, "rules": ["strongstop", "forwardstop"]})");
  const auto t = gevr::run_study(c);
  std::map<std::string, int> metrics;
  for (const auto& cell : t.cells) metrics[cell.metric]++;
  EXPECT_GT(metrics["fwer"], 0);
  EXPECT_GT(metrics["fdr"], 0);
  EXPECT_FALSE(t.notes.empty());
}

TEST(PowerStudy, MixturePowerDecreasesTowardsNull) {
  auto c = SimConfig::from_json(
      R"({"scenario": "power-mixture", "methods": ["ed", "mb-score"], "p": [0.25, 0.5, 0.75, 1.0], "replicates": 200, "L": 200})");
  const auto t = gevr::run_study(c);
  std::map<std::string, std::vector<const gevr::SimCell*>> by_method;
  for (const auto& cell : t.cells) by_method[cell.method].push_back(&cell);
  for (const auto& [method, cells] : by_method) {
    ASSERT_EQ(cells.size(), 4u);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      ASSERT_LT(cells[k - 1]->param, cells[k]->param);
      const double se = std::hypot(cells[k - 1]->mc_se, cells[k]->mc_se);
      EXPECT_LE(cells[k]->percent, cells[k - 1]->percent + 3 * se) << method << " p=" << cells[k]->param;
    }
  }
}

TEST(SimTable, JsonCarriesMetadata) {
  auto c = SimConfig::from_json(R"({"scenario": "size", "r": [2], "replicates": 3, "seed": 17})");
  const std::string doc = gevr::run_study(c).to_json();
  EXPECT_NE(doc.find("\"metadata\""), std::string::npos);
  EXPECT_NE(doc.find("\"seed\": 17"), std::string::npos);
  EXPECT_NE(doc.find("\"cells\""), std::string::npos);
}
