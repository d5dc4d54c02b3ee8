#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "gevr/distributions.hpp"
#include "gevr/ingest.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = GEVR_FIXTURES;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run gevr_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = gevr::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gevr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_sample(const std::string& name, const gevr::RLargestSample& s) {
    const fs::path p = dir_ / name;
    std::ofstream out(p);
    gevr::write_sample(out, s);
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, DeclusterHandTrace) {
  const auto r = gevr_cli({"decluster", kFixtures + "/storm.csv", "--tau", "2obs", "--r", "2", "--completeness", "1e-9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "block,x1,x2\n1970,9,6\n");
}

TEST_F(CliTest, DeclusterBlockMaxima) {
  const auto r = gevr_cli({"decluster", kFixtures + "/storm.csv", "--tau", "0", "--r", "1", "--completeness", "1e-9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "block,x1\n1970,9\n");
}

TEST_F(CliTest, DeclusterGhcnWithManifest) {
  const std::string out = path("ac.csv");
  const auto r = gevr_cli({"decluster", kFixtures + "/ghcn_small.dly", "--format", "ghcn", "--tau", "1d", "--r", "2",
                           "--completeness", "0.001", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out), "block,x1,x2\n2001,2.54,1\n");
  const json m = json::parse(slurp(out + ".manifest.json"));
  EXPECT_EQ(m["command"], "decluster");
  EXPECT_EQ(m["outputs"][0]["sha256"], gevr::cli::sha256_file(out));
  EXPECT_EQ(m["inputs"][0]["sha256"], gevr::cli::sha256_file(kFixtures + "/ghcn_small.dly"));
}

TEST_F(CliTest, MissingInputIsDataError) {
  const auto r = gevr_cli({"decluster", "/no/such/file.csv", "--tau", "1h", "--r", "1"});
  EXPECT_EQ(r.code, gevr::cli::kData);
  EXPECT_NE(r.err.find("/no/such/file.csv"), std::string::npos);
}

TEST_F(CliTest, UnitlessTauIsUsageError) {
  EXPECT_EQ(gevr_cli({"decluster", kFixtures + "/storm.csv", "--tau", "60", "--r", "1"}).code, gevr::cli::kUsage);
}

TEST_F(CliTest, FitRecoversParameters) {
  const auto s = gevr::sample_gevr(5000, 5, {0, 1, 0.25}, gevr::RngStream(90));
  const auto r = gevr_cli({"fit", write_sample("g5.csv", s)});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_TRUE(doc["converged"].get<bool>());
  EXPECT_LE(std::abs(doc["theta_hat"]["mu"].get<double>() - 0.0), 3 * doc["se"]["mu"].get<double>());
  EXPECT_LE(std::abs(doc["theta_hat"]["sigma"].get<double>() - 1.0), 3 * doc["se"]["sigma"].get<double>());
  EXPECT_LE(std::abs(doc["theta_hat"]["xi"].get<double>() - 0.25), 3 * doc["se"]["xi"].get<double>());
}

TEST_F(CliTest, FitReturnLevelsOnGumbelData) {
  const auto s = gevr::sample_gevr(2000, 5, {0, 1, 0}, gevr::RngStream(91));
  const auto r = gevr_cli({"fit", write_sample("g.csv", s), "--return-levels", "50,100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc["return_levels"].size(), 2u);
  const json& z100 = doc["return_levels"][1];
  EXPECT_EQ(z100["t"].get<double>(), 100.0);
  EXPECT_LE(z100["ci_low"].get<double>(), 4.60015);
  EXPECT_GE(z100["ci_high"].get<double>(), 4.60015);
  EXPECT_NEAR(z100["estimate"].get<double>(), 4.60015, 0.3);
}

TEST_F(CliTest, FitRBeyondColumnsIsUsageError) {
  const auto s = gevr::sample_gevr(50, 3, {0, 1, 0}, gevr::RngStream(92));
  EXPECT_EQ(gevr_cli({"fit", write_sample("g.csv", s), "--r", "4"}).code, gevr::cli::kUsage);
}

TEST_F(CliTest, SelectNullDataTinyAlphaKeepsR) {
  const auto s = gevr::sample_gevr(100, 5, {0, 1, 0.1}, gevr::RngStream(93));
  const auto r = gevr_cli({"select", write_sample("g.csv", s), "--R", "5", "--rule", "none", "--alpha", "1e-12", "--L", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["r_hat"].get<int>(), 5);
  EXPECT_EQ(doc["p_by_r"].size(), 5u);
  EXPECT_TRUE(doc["rejected"].empty());
}

TEST_F(CliTest, SelectIsByteReproducible) {
  const auto s = gevr::sample_gevr(80, 4, {0, 1, 0.1}, gevr::RngStream(94));
  const std::string in = write_sample("g.csv", s);
  const std::vector<std::string> base = {"select", in, "--R", "4", "--method", "mb-score", "--L", "100", "--seed", "7", "--out"};
  auto a = base;
  a.push_back(path("a.json"));
  auto b = base;
  b.push_back(path("b.json"));
  ASSERT_EQ(gevr_cli(a).code, 0);
  ASSERT_EQ(gevr_cli(b).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const json m = json::parse(slurp(path("a.json") + ".manifest.json"));
  EXPECT_EQ(m["seed"].get<int>(), 7);
}

TEST_F(CliTest, SelectBadMethodIsUsageError) {
  const auto s = gevr::sample_gevr(30, 2, {0, 1, 0}, gevr::RngStream(95));
  EXPECT_EQ(gevr_cli({"select", write_sample("g.csv", s), "--R", "2", "--method", "chi2"}).code, gevr::cli::kUsage);
}

TEST_F(CliTest, SimulateWritesTables) {
  const std::string cfg = path("cfg.json");
  std::ofstream(cfg) << R"({"scenario": "size", "r": [2], "replicates": 5})";
  const auto r = gevr_cli({"simulate", "--config", cfg, "--seed", "3", "--out", path("size")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("size.csv"));
  EXPECT_EQ(csv.rfind("scenario,method,rule,metric,", 0), 0u);
  const json doc = json::parse(slurp(path("size.json")));
  EXPECT_EQ(doc["metadata"]["config"]["seed"].get<int>(), 3);
  EXPECT_TRUE(fs::exists(path("size.manifest.json")));
}

TEST_F(CliTest, SimulateScenarioConflict) {
  const std::string cfg = path("cfg.json");
  std::ofstream(cfg) << R"({"scenario": "size"})";
  EXPECT_EQ(gevr_cli({"simulate", "--config", cfg, "--scenario", "r-choice"}).code, gevr::cli::kUsage);
  EXPECT_EQ(gevr_cli({"simulate", "--scenario", "nonsense"}).code, gevr::cli::kUsage);
  EXPECT_EQ(gevr_cli({"simulate", "--config", path("missing.json")}).code, gevr::cli::kData);
}

TEST_F(CliTest, HelpAndUsage) {
  EXPECT_EQ(gevr_cli({"--help"}).code, 0);
  EXPECT_EQ(gevr_cli({}).code, gevr::cli::kUsage);
  EXPECT_EQ(gevr_cli({"fit"}).code, gevr::cli::kUsage);
  EXPECT_EQ(gevr_cli({"frobnicate"}).code, gevr::cli::kUsage);
}

TEST(Sha256, KnownDigest) {
  const fs::path p = fs::temp_directory_path() / "gevr_sha_abc.txt";
  std::ofstream(p, std::ios::binary) << "abc";
  EXPECT_EQ(gevr::cli::sha256_file(p), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove(p);
}
