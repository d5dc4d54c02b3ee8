#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gevr/params.hpp"

namespace gevr {

/// One reading; `time` is seconds since 1970-01-01T00:00:00Z.
struct Observation {
  std::int64_t time = 0;
  double value = 0.0;
};

struct ObservationSeries {
  std::vector<Observation> records;  // strictly increasing in time
  std::int64_t cadence = 0;          // nominal spacing in seconds (median gap)
  std::string units;
  std::string station;
  std::size_t excluded = 0;          // missing or quality-flagged records skipped

  /// Median positive spacing of the records, 0 with fewer than two.
  [[nodiscard]] std::int64_t median_spacing() const;
};

/// Storm length. Observation counts are scaled by the series cadence.
struct Tau {
  enum class Unit { Observations, Seconds };
  double value = 0.0;
  Unit unit = Unit::Seconds;

  /// Parses "<number><unit>" with unit obs, s, min, h or d. A bare "0" is
  /// accepted; any other unitless value throws DomainError.
  static Tau parse(const std::string& text);
  /// Half-window in seconds for a series with the given cadence.
  [[nodiscard]] double half_window_seconds(std::int64_t cadence) const;
};

struct BlockSpec {
  double completeness = 0.9;  // fraction of expected readings per calendar year
  Tau tau;
};

struct DroppedBlock {
  int year = 0;
  std::string reason;
};

struct DeclusterResult {
  RLargestSample sample;                      // one row per retained year
  std::vector<int> years;
  std::vector<std::vector<std::int64_t>> times;  // event times, same layout as sample
  std::vector<DroppedBlock> dropped;
  std::vector<std::string> warnings;
};

/// Independent-storms extraction per calendar year (UTC): repeatedly take the
/// largest remaining reading (earliest on ties) and delete every reading
/// within tau/2 of it, until r events are found. Years below the
/// completeness threshold or with fewer than r events are dropped.
/// Throws DataError when no year survives.
DeclusterResult decluster(const ObservationSeries& series, const BlockSpec& spec, std::size_t r);

/// decluster(...).sample
RLargestSample decluster_top_r(const ObservationSeries& series, const BlockSpec& spec, std::size_t r);

/// GHCN-Daily station file, fixed-width .dly or the comma-separated layout
/// ID,YYYYMMDD,ELEMENT,VALUE,MFLAG,QFLAG,SFLAG[,OBS-TIME]. Records carrying the
/// -9999 sentinel or a quality flag are excluded. PRCP and SNOW convert to
/// centimetres, SNWD to centimetres, TMAX/TMIN to degrees C.
/// Throws ParseError on malformed lines and UnsupportedError for other elements.
ObservationSeries parse_ghcn_daily(const std::filesystem::path& path, const std::string& element = "PRCP");
ObservationSeries parse_ghcn_daily(std::istream& in, const std::string& element = "PRCP");

struct TableOptions {
  std::string time_column = "time";
  std::string value_column = "value";
  char delimiter = ',';
  std::string units;
};

/// Delimited text with a header row. Timestamps are ISO-8601
/// (YYYY-MM-DD[THH:MM[:SS]][Z]) or integer epoch seconds. Empty, NA and NaN
/// value cells count as missing. Duplicate timestamps throw DataError.
ObservationSeries parse_table(const std::filesystem::path& path, const TableOptions& options = {});
ObservationSeries parse_table(std::istream& in, const TableOptions& options = {});

/// Writes "time,value" with ISO-8601 UTC timestamps and shortest round-trip values.
void write_table(std::ostream& out, const ObservationSeries& series);

/// "block,x1,...,xr" rows.
void write_sample(std::ostream& out, const RLargestSample& sample);
RLargestSample read_sample(std::istream& in);
RLargestSample read_sample(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Epoch seconds to "YYYY-MM-DDTHH:MM:SSZ".
std::string format_time(std::int64_t t);
/// Inverse of format_time; also accepts a date only or integer epoch seconds.
/// Throws DomainError on anything else.
std::int64_t parse_time(const std::string& text);

}  // namespace gevr
