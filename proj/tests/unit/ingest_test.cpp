#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gevr/error.hpp"
#include "gevr/ingest.hpp"
#include "gevr/rng.hpp"

using gevr::BlockSpec;
using gevr::ObservationSeries;
using gevr::Tau;

namespace {

const std::string kFixtures = GEVR_FIXTURES;

ObservationSeries series_of(const std::vector<std::pair<std::int64_t, double>>& points, std::int64_t cadence = 1) {
  ObservationSeries s;
  for (const auto& [t, v] : points) s.records.push_back({t, v});
  s.cadence = cadence;
  return s;
}

BlockSpec loose(const std::string& tau) {
  BlockSpec spec;
  spec.completeness = 1e-9;
  spec.tau = Tau::parse(tau);
  return spec;
}

std::vector<double> row(const gevr::RLargestSample& s, std::size_t i) {
  const auto r = s.row(i);
  return {r.begin(), r.end()};
}

}  // namespace

TEST(Decluster, HandTrace) {
  const auto s = series_of({{1, 5}, {2, 9}, {3, 7}, {5, 6}});
  const auto out = gevr::decluster_top_r(s, loose("2obs"), 2);
  ASSERT_EQ(out.n(), 1u);
  EXPECT_EQ(row(out, 0), (std::vector<double>{9, 6}));
}

TEST(Decluster, ZeroStormLengthGivesPlainOrderStatistics) {
  const auto s = series_of({{1, 5}, {2, 9}, {3, 7}, {5, 6}});
  EXPECT_EQ(row(gevr::decluster_top_r(s, loose("0"), 3), 0), (std::vector<double>{9, 7, 6}));
}

TEST(Decluster, SingleEventIsBlockMaximum) {
  const auto s = series_of({{1, 5}, {2, 9}, {3, 7}, {5, 6}});
  for (const char* tau : {"0", "1obs", "10obs", "3d"})
    EXPECT_EQ(row(gevr::decluster_top_r(s, loose(tau), 1), 0), (std::vector<double>{9}));
}

TEST(Decluster, EarliestWinsTiesAndResidualTiesArePerturbed) {
  const auto s = series_of({{1, 4}, {10, 4}, {20, 1}});
  const auto out = gevr::decluster(s, loose("2obs"), 2);
  EXPECT_EQ(out.times[0][0], 1);
  EXPECT_EQ(out.times[0][1], 10);
  EXPECT_LT(out.sample(0, 1), out.sample(0, 0));
  EXPECT_NEAR(out.sample(0, 1), 4.0 - 4e-9, 1e-15);
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Decluster, PerYearBlocksAndDroppedYears) {
  ObservationSeries s;
  s.cadence = 86400;
  const std::int64_t y2000 = gevr::parse_time("2000-01-01");
  const std::int64_t y2001 = gevr::parse_time("2001-01-01");
  const std::int64_t y2002 = gevr::parse_time("2002-01-01");
  for (int d = 0; d < 366; ++d) s.records.push_back({y2000 + d * 86400LL, std::sin(d * 0.7) + d * 1e-3});
  for (int d = 0; d < 100; ++d) s.records.push_back({y2001 + d * 86400LL, 1.0 + d});  // incomplete
  for (int d = 0; d < 365; ++d) s.records.push_back({y2002 + d * 86400LL, std::cos(d * 0.3)});
  BlockSpec spec;
  spec.tau = Tau::parse("2d");
  const auto out = gevr::decluster(s, spec, 3);
  EXPECT_EQ(out.years, (std::vector<int>{2000, 2002}));
  ASSERT_EQ(out.dropped.size(), 1u);
  EXPECT_EQ(out.dropped[0].year, 2001);
  EXPECT_EQ(out.sample.labels(), (std::vector<std::string>{"2000", "2002"}));
}

TEST(Decluster, NothingSurvives) {
  const auto s = series_of({{1, 5}, {2, 9}});
  EXPECT_THROW(gevr::decluster(s, loose("10obs"), 2), gevr::DataError);
}

TEST(Decluster, InvariantsOnRandomSeries) {
  gevr::RngStream rng(81);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::int64_t, double>> pts;
    std::int64_t t = 0;
    for (int k = 0; k < 300; ++k) {
      t += 1 + static_cast<std::int64_t>(rng.uniform() * 3);
      pts.emplace_back(t, std::round(rng.normal() * 100) / 10);
    }
    const auto s = series_of(pts, 2);
    const BlockSpec spec = loose("6obs");
    const double half = spec.tau.half_window_seconds(2);
    const auto out = gevr::decluster(s, spec, 5);
    const auto& times = out.times[0];
    for (std::size_t a = 0; a < times.size(); ++a)
      for (std::size_t b = a + 1; b < times.size(); ++b) ASSERT_GT(std::abs(times[a] - times[b]), half);
    std::vector<double> raw;
    for (const auto& p : pts) raw.push_back(p.second);
    std::sort(raw.rbegin(), raw.rend());
    for (std::size_t k = 0; k < 5; ++k) ASSERT_LE(out.sample(0, k), raw[k]);
    // Re-running on the extracted events returns them unchanged.
    std::vector<std::pair<std::int64_t, double>> events;
    for (std::size_t k = 0; k < 5; ++k) events.emplace_back(times[k], out.sample(0, k));
    std::sort(events.begin(), events.end());
    const auto again = gevr::decluster_top_r(series_of(events, 2), spec, 5);
    ASSERT_EQ(row(again, 0), row(out.sample, 0));
  }
}

TEST(Tau, ParsesUnits) {
  EXPECT_DOUBLE_EQ(Tau::parse("2d").half_window_seconds(3600), 86400.0);
  EXPECT_DOUBLE_EQ(Tau::parse("60min").half_window_seconds(900), 1800.0);
  EXPECT_DOUBLE_EQ(Tau::parse("60obs").half_window_seconds(900), 27000.0);
  EXPECT_DOUBLE_EQ(Tau::parse("3h").half_window_seconds(0), 5400.0);
  EXPECT_DOUBLE_EQ(Tau::parse("10s").half_window_seconds(0), 5.0);
  EXPECT_DOUBLE_EQ(Tau::parse("0").half_window_seconds(0), 0.0);
  EXPECT_THROW(Tau::parse("60"), gevr::DomainError);
  EXPECT_THROW(Tau::parse("-1h"), gevr::DomainError);
  EXPECT_THROW(Tau::parse("2fortnights"), gevr::DomainError);
}

TEST(Ghcn, CsvVariantSkipsMissingSentinel) {
  const auto s = gevr::parse_ghcn_daily(kFixtures + "/ghcn_small.csv");
  ASSERT_EQ(s.records.size(), 2u);
  EXPECT_DOUBLE_EQ(s.records[0].value, 1.25);
  EXPECT_DOUBLE_EQ(s.records[1].value, 0.4);
  EXPECT_EQ(s.records[1].time - s.records[0].time, 2 * 86400);
  EXPECT_EQ(s.units, "cm");
  EXPECT_EQ(s.station, "USW00099999");
}

TEST(Ghcn, FixedWidthLayout) {
  const auto s = gevr::parse_ghcn_daily(kFixtures + "/ghcn_small.dly");
  ASSERT_EQ(s.records.size(), 3u);
  EXPECT_EQ(s.records[0].time, gevr::parse_time("2001-01-01"));
  EXPECT_DOUBLE_EQ(s.records[0].value, 2.54);
  EXPECT_DOUBLE_EQ(s.records[1].value, 0.0);
  EXPECT_EQ(s.records[2].time, gevr::parse_time("2001-02-10"));
  EXPECT_DOUBLE_EQ(s.records[2].value, 1.0);
  EXPECT_EQ(s.excluded, 1u);  // quality-flagged reading
  const auto tmax = gevr::parse_ghcn_daily(kFixtures + "/ghcn_small.dly", "TMAX");
  ASSERT_EQ(tmax.records.size(), 2u);
  EXPECT_DOUBLE_EQ(tmax.records[0].value, -0.5);
  EXPECT_EQ(tmax.units, "degC");
}

TEST(Ghcn, Errors) {
  EXPECT_THROW(gevr::parse_ghcn_daily(kFixtures + "/ghcn_small.dly", "WIND"), gevr::UnsupportedError);
  std::istringstream bad("USW00099999200101PRCP  12x  W\n");
  try {
    gevr::parse_ghcn_daily(bad);
    FAIL() << "expected ParseError";
  } catch (const gevr::ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(gevr::parse_ghcn_daily(kFixtures + "/does_not_exist.dly"), gevr::DataError);
}

TEST(Table, SortsAndSkipsMissing) {
  gevr::TableOptions o;
  o.time_column = "when";
  o.value_column = "level";
  const auto s = gevr::parse_table(kFixtures + "/table_small.csv", o);
  ASSERT_EQ(s.records.size(), 5u);
  for (std::size_t i = 1; i < s.records.size(); ++i) EXPECT_LT(s.records[i - 1].time, s.records[i].time);
  EXPECT_EQ(s.records[0].value, 2.5);  // "2.5e0"
  EXPECT_EQ(s.records[3].value, 0.1);  // "1e-1"
  EXPECT_EQ(s.excluded, 1u);
  EXPECT_EQ(s.cadence, 3600);
}

TEST(Table, DuplicateTimestampNamed) {
  try {
    gevr::parse_table(kFixtures + "/table_duplicate.csv");
    FAIL() << "expected DataError";
  } catch (const gevr::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2020-01-01T01:00:00Z"), std::string::npos) << e.what();
  }
}

TEST(Table, BadCellReportsRowAndColumn) {
  try {
    gevr::parse_table(kFixtures + "/table_bad.csv");
    FAIL() << "expected ParseError";
  } catch (const gevr::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 2u);
  }
}

TEST(Table, MissingColumn) {
  gevr::TableOptions o;
  o.value_column = "nope";
  EXPECT_THROW(gevr::parse_table(kFixtures + "/table_duplicate.csv", o), gevr::DataError);
}

TEST(Table, RoundTripIsBitExact) {
  const auto s = gevr::parse_ghcn_daily(kFixtures + "/ghcn_small.dly");
  ObservationSeries t = s;
  t.records.push_back({t.records.back().time + 86400, 0.1 + 0.2});
  t.records.push_back({t.records.back().time + 86400, 1.0 / 3.0});
  std::stringstream buf;
  gevr::write_table(buf, t);
  const auto back = gevr::parse_table(buf);
  ASSERT_EQ(back.records.size(), t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(back.records[i].time, t.records[i].time);
    EXPECT_EQ(back.records[i].value, t.records[i].value);
  }
}

TEST(SampleFile, RoundTrip) {
  const gevr::RLargestSample s(2, 3, {3.25, 2.0, 1.0 / 3.0, 10.0, -1e-300, -2.5}, {"1999", "2000"});
  std::stringstream buf;
  gevr::write_sample(buf, s);
  const auto back = gevr::read_sample(buf);
  EXPECT_EQ(back.values(), s.values());
  EXPECT_EQ(back.labels(), s.labels());
}

TEST(SampleFile, RejectsTiesAndRaggedRows) {
  std::istringstream tie("block,x1,x2\n1,2,2\n");
  EXPECT_THROW(gevr::read_sample(tie), gevr::DataError);
  std::istringstream ragged("block,x1,x2\n1,2\n");
  EXPECT_THROW(gevr::read_sample(ragged), gevr::ParseError);
}

TEST(Time, FormatParseRoundTrip) {
  for (std::int64_t t : {0LL, 86399LL, 951782400LL, -1LL, 4102444800LL}) EXPECT_EQ(gevr::parse_time(gevr::format_time(t)), t);
  EXPECT_EQ(gevr::parse_time("1970-01-02"), 86400);
  EXPECT_EQ(gevr::parse_time("1970-01-01T01:02"), 3720);
  EXPECT_THROW(gevr::parse_time("2001-02-30"), gevr::DomainError);
}
