#include "gevr/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include "gevr/error.hpp"

namespace gevr {
namespace {

namespace chr = std::chrono;

constexpr std::int64_t kDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int year_of(std::int64_t t) {
  const chr::sys_days day{chr::days{floor_div(t, kDay)}};
  return static_cast<int>(chr::year_month_day{day}.year());
}

std::int64_t year_start(int y) {
  const chr::sys_days day{chr::year{y} / chr::January / 1};
  return static_cast<std::int64_t>(day.time_since_epoch().count()) * kDay;
}

std::int64_t epoch_seconds(int y, unsigned m, unsigned d, int hh = 0, int mm = 0, int ss = 0) {
  const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  const chr::sys_days day{ymd};
  return static_cast<std::int64_t>(day.time_since_epoch().count()) * kDay + hh * 3600 + mm * 60 + ss;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void finish_series(ObservationSeries& series) {
  std::sort(series.records.begin(), series.records.end(),
            [](const Observation& a, const Observation& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < series.records.size(); ++i)
    if (series.records[i].time == series.records[i - 1].time)
      throw DataError("duplicate timestamp " + format_time(series.records[i].time));
  series.cadence = series.median_spacing();
}

struct ElementInfo {
  double divisor;
  const char* units;
};

ElementInfo element_info(const std::string& element) {
  static const std::map<std::string, ElementInfo> known = {
      {"PRCP", {100.0, "cm"}}, {"SNOW", {10.0, "cm"}}, {"SNWD", {10.0, "cm"}},
      {"TMAX", {10.0, "degC"}}, {"TMIN", {10.0, "degC"}}};
  const auto it = known.find(element);
  if (it == known.end())
    throw UnsupportedError("unsupported GHCN-Daily element '" + element +
                           "' (supported: PRCP, SNOW, SNWD, TMAX, TMIN)");
  return it->second;
}

void parse_dly_line(std::string_view line, std::size_t line_no, const std::string& element,
                    double divisor, ObservationSeries& series) {
  constexpr std::size_t kDays = 31;
  constexpr std::size_t kHeader = 21;
  constexpr std::size_t kWidth = 8;
  if (line.size() < kHeader) throw ParseError("GHCN-Daily line is too short", line_no, line.size() + 1);
  if (line.substr(17, 4) != element) return;
  if (line.size() < kHeader + kDays * kWidth)
    throw ParseError("GHCN-Daily line is too short", line_no, line.size() + 1);
  int year = 0;
  unsigned month = 0;
  if (!parse_number(line.substr(11, 4), year)) throw ParseError("bad year field", line_no, 12);
  if (!parse_number(line.substr(15, 2), month) || month < 1 || month > 12)
    throw ParseError("bad month field", line_no, 16);
  if (series.station.empty()) series.station = std::string(trim(line.substr(0, 11)));
  for (std::size_t d = 0; d < kDays; ++d) {
    const std::size_t off = kHeader + d * kWidth;
    int raw = 0;
    if (!parse_number(line.substr(off, 5), raw)) throw ParseError("bad value field", line_no, off + 1);
    if (raw == -9999) continue;
    const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{static_cast<unsigned>(d + 1)}};
    if (!ymd.ok()) throw ParseError("value recorded on a non-existent date", line_no, off + 1);
    if (line[off + 6] != ' ') {
      ++series.excluded;
      continue;
    }
    series.records.push_back({epoch_seconds(year, month, static_cast<unsigned>(d + 1)), raw / divisor});
  }
}

void parse_ghcn_csv_line(std::string_view line, std::size_t line_no, const std::string& element,
                         double divisor, ObservationSeries& series) {
  const auto fields = split(line, ',');
  if (fields.size() < 4) throw ParseError("GHCN-Daily CSV line has too few fields", line_no, line.size() + 1);
  const std::string_view date = trim(fields[1]);
  if (line_no == 1 && !all_digits(date)) return;  // header
  if (trim(fields[2]) != element) return;
  if (date.size() != 8 || !all_digits(date)) throw ParseError("bad date field", line_no, fields[0].size() + 2);
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  parse_number(date.substr(0, 4), year);
  parse_number(date.substr(4, 2), month);
  parse_number(date.substr(6, 2), day);
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) throw ParseError("invalid calendar date", line_no, fields[0].size() + 2);
  int raw = 0;
  const std::size_t value_col = fields[0].size() + fields[1].size() + fields[2].size() + 4;
  if (!parse_number(fields[3], raw)) throw ParseError("bad value field", line_no, value_col);
  if (series.station.empty()) series.station = std::string(trim(fields[0]));
  if (raw == -9999) return;
  if (fields.size() > 5 && !trim(fields[5]).empty()) {
    ++series.excluded;
    return;
  }
  series.records.push_back({epoch_seconds(year, month, day), raw / divisor});
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path.string() + "'");
  return in;
}

}  // namespace

std::int64_t ObservationSeries::median_spacing() const {
  std::vector<std::int64_t> gaps;
  gaps.reserve(records.size());
  for (std::size_t i = 1; i < records.size(); ++i) {
    const std::int64_t g = records[i].time - records[i - 1].time;
    if (g > 0) gaps.push_back(g);
  }
  if (gaps.empty()) return 0;
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2), gaps.end());
  return gaps[gaps.size() / 2];
}

Tau Tau::parse(const std::string& text) {
  const std::string_view s = trim(text);
  std::size_t split_at = 0;
  while (split_at < s.size() &&
         ((s[split_at] >= '0' && s[split_at] <= '9') || s[split_at] == '.' || s[split_at] == '-' ||
          s[split_at] == '+' || s[split_at] == 'e' || s[split_at] == 'E')) {
    ++split_at;
  }
  Tau tau;
  if (!parse_number(s.substr(0, split_at), tau.value) || !(tau.value >= 0.0) || !std::isfinite(tau.value))
    throw DomainError("invalid storm length '" + text + "'");
  const std::string_view unit = s.substr(split_at);
  if (unit.empty()) {
    if (tau.value == 0.0) return tau;
    throw DomainError("storm length '" + text + "' needs a unit: obs, s, min, h or d");
  }
  if (unit == "obs") {
    tau.unit = Unit::Observations;
    return tau;
  }
  double factor = 0.0;
  if (unit == "s") factor = 1.0;
  else if (unit == "min") factor = 60.0;
  else if (unit == "h") factor = 3600.0;
  else if (unit == "d") factor = 86400.0;
  else throw DomainError("unknown storm length unit '" + std::string(unit) + "' (use obs, s, min, h or d)");
  tau.value *= factor;
  tau.unit = Unit::Seconds;
  return tau;
}

double Tau::half_window_seconds(std::int64_t cadence) const {
  if (unit == Unit::Seconds) return 0.5 * value;
  if (value == 0.0) return 0.0;
  if (cadence <= 0) throw DomainError("storm length in observations needs a series with a cadence");
  return 0.5 * value * static_cast<double>(cadence);
}

DeclusterResult decluster(const ObservationSeries& series, const BlockSpec& spec, std::size_t r) {
  if (r < 1) throw DomainError("decluster: r must be >= 1");
  if (!(spec.completeness > 0.0 && spec.completeness <= 1.0))
    throw DomainError("decluster: completeness must be in (0, 1]");
  if (series.records.empty()) throw DataError("decluster: the series is empty");
  const std::int64_t cadence = series.cadence > 0 ? series.cadence : series.median_spacing();
  const double half = spec.tau.half_window_seconds(cadence);

  double scale = 0.0;
  for (const Observation& o : series.records) scale = std::max(scale, std::abs(o.value));
  const double eps = 1e-9 * (scale > 0.0 ? scale : 1.0);

  DeclusterResult out;
  std::vector<double> values;
  std::vector<std::string> labels;
  std::size_t begin = 0;
  while (begin < series.records.size()) {
    const int year = year_of(series.records[begin].time);
    std::size_t end = begin;
    while (end < series.records.size() && year_of(series.records[end].time) == year) ++end;
    const std::size_t count = end - begin;

    const double span = static_cast<double>(year_start(year + 1) - year_start(year));
    const double expected = cadence > 0 ? span / static_cast<double>(cadence) : 1.0;
    const double fraction = static_cast<double>(count) / expected;
    if (fraction < spec.completeness) {
      std::ostringstream why;
      why << "only " << count << " of ~" << static_cast<long long>(std::llround(expected))
          << " expected readings";
      out.dropped.push_back({year, why.str()});
      begin = end;
      continue;
    }

    std::vector<bool> alive(count, true);
    std::vector<double> row;
    std::vector<std::int64_t> row_times;
    while (row.size() < r) {
      std::size_t best = count;
      for (std::size_t k = 0; k < count; ++k) {
        if (!alive[k]) continue;
        if (best == count || series.records[begin + k].value > series.records[begin + best].value) best = k;
      }
      if (best == count) break;
      const std::int64_t t0 = series.records[begin + best].time;
      row.push_back(series.records[begin + best].value);
      row_times.push_back(t0);
      for (std::size_t k = 0; k < count; ++k)
        if (alive[k] && std::abs(static_cast<double>(series.records[begin + k].time - t0)) <= half)
          alive[k] = false;
      alive[best] = false;
    }
    if (row.size() < r) {
      out.dropped.push_back({year, "only " + std::to_string(row.size()) + " independent events"});
      begin = end;
      continue;
    }
    for (std::size_t j = 1; j < r; ++j) {
      if (row[j] >= row[j - 1]) {
        row[j] = row[j - 1] - eps;
        out.warnings.push_back("year " + std::to_string(year) + ": tied event " + std::to_string(j + 1) +
                               " lowered by " + format_double(eps));
      }
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(std::to_string(year));
    out.years.push_back(year);
    out.times.push_back(std::move(row_times));
    begin = end;
  }
  if (out.years.empty()) throw DataError("decluster: no calendar year survived the completeness and event checks");
  out.sample = RLargestSample(out.years.size(), r, std::move(values), std::move(labels));
  return out;
}

RLargestSample decluster_top_r(const ObservationSeries& series, const BlockSpec& spec, std::size_t r) {
  return decluster(series, spec, r).sample;
}

ObservationSeries parse_ghcn_daily(std::istream& in, const std::string& element) {
  const ElementInfo info = element_info(element);
  ObservationSeries series;
  series.units = info.units;
  std::string line;
  std::size_t line_no = 0;
  bool csv = false;
  bool format_known = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!format_known) {
      csv = view.find(',') != std::string_view::npos;
      format_known = true;
    }
    if (csv) parse_ghcn_csv_line(view, line_no, element, info.divisor, series);
    else parse_dly_line(std::string_view(line).substr(0, line.find_last_not_of('\r') + 1), line_no, element,
                        info.divisor, series);
  }
  finish_series(series);
  return series;
}

ObservationSeries parse_ghcn_daily(const std::filesystem::path& path, const std::string& element) {
  std::ifstream in = open_or_throw(path);
  return parse_ghcn_daily(in, element);
}

ObservationSeries parse_table(std::istream& in, const TableOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : split(line, options.delimiter)) header.emplace_back(unquote(f));
  }
  if (header.empty()) throw DataError("table has no header row");
  const auto find_col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t tcol = find_col(options.time_column);
  const std::size_t vcol = find_col(options.value_column);

  ObservationSeries series;
  series.units = options.units;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, options.delimiter);
    if (fields.size() <= std::max(tcol, vcol))
      throw ParseError("row has " + std::to_string(fields.size()) + " fields", line_no, fields.size() + 1);
    std::int64_t t = 0;
    try {
      t = parse_time(std::string(unquote(fields[tcol])));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no, tcol + 1);
    }
    const std::string_view cell = unquote(fields[vcol]);
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
      ++series.excluded;
      continue;
    }
    double v = 0.0;
    if (!parse_number(cell, v) || !std::isfinite(v))
      throw ParseError("unparseable value '" + std::string(cell) + "'", line_no, vcol + 1);
    series.records.push_back({t, v});
  }
  finish_series(series);
  return series;
}

ObservationSeries parse_table(const std::filesystem::path& path, const TableOptions& options) {
  std::ifstream in = open_or_throw(path);
  return parse_table(in, options);
}

void write_table(std::ostream& out, const ObservationSeries& series) {
  out << "time,value\n";
  for (const Observation& o : series.records) out << format_time(o.time) << ',' << format_double(o.value) << '\n';
}

void write_sample(std::ostream& out, const RLargestSample& sample) {
  out << "block";
  for (std::size_t j = 1; j <= sample.r(); ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t i = 0; i < sample.n(); ++i) {
    out << (sample.labels().empty() ? std::to_string(i + 1) : sample.labels()[i]);
    for (std::size_t j = 0; j < sample.r(); ++j) out << ',' << format_double(sample(i, j));
    out << '\n';
  }
}

RLargestSample read_sample(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (columns == 0 && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto head = split(trim(line), ',');
    if (unquote(head[0]) != "block") throw ParseError("sample header must start with 'block'", line_no, 1);
    columns = head.size();
  }
  if (columns < 2) throw DataError("sample file needs a header 'block,x1,...' with at least one value column");
  const std::size_t r = columns - 1;
  std::vector<double> values;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != columns)
      throw ParseError("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()),
                       line_no, std::min(fields.size(), columns) + 1);
    labels.emplace_back(unquote(fields[0]));
    for (std::size_t j = 1; j < columns; ++j) {
      double v = 0.0;
      if (!parse_number(unquote(fields[j]), v) || !std::isfinite(v))
        throw ParseError("unparseable value '" + std::string(fields[j]) + "'", line_no, j + 1);
      values.push_back(v);
    }
  }
  if (labels.empty()) throw DataError("sample file has no blocks");
  const std::size_t n = labels.size();
  try {
    return RLargestSample(n, r, std::move(values), std::move(labels));
  } catch (const DomainError& e) {
    throw DataError(e.what());
  }
}

RLargestSample read_sample(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  return read_sample(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_time(std::int64_t t) {
  const std::int64_t days = floor_div(t, kDay);
  const std::int64_t secs = t - days * kDay;
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(secs / 3600), static_cast<int>((secs % 3600) / 60), static_cast<int>(secs % 60));
  return buf;
}

std::int64_t parse_time(const std::string& text) {
  std::string_view s = trim(text);
  const std::string_view digits = (!s.empty() && s.front() == '-') ? s.substr(1) : s;
  if (all_digits(digits)) {
    std::int64_t t = 0;
    if (!parse_number(s, t)) throw DomainError("timestamp out of range: '" + text + "'");
    return t;
  }
  const auto bad = [&]() { return DomainError("unrecognised timestamp '" + text + "'"); };
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw bad();
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2))) throw bad();
  parse_number(s.substr(0, 4), y);
  parse_number(s.substr(5, 2), mo);
  parse_number(s.substr(8, 2), d);
  if (!chr::year_month_day{chr::year{y}, chr::month{mo}, chr::day{d}}.ok()) throw bad();
  int hh = 0;
  int mi = 0;
  int ss = 0;
  if (s.size() > 10) {
    if ((s[10] != 'T' && s[10] != ' ') || s.size() < 16 || s[13] != ':') throw bad();
    if (!all_digits(s.substr(11, 2)) || !all_digits(s.substr(14, 2))) throw bad();
    parse_number(s.substr(11, 2), hh);
    parse_number(s.substr(14, 2), mi);
    if (s.size() > 16) {
      if (s.size() != 19 || s[16] != ':' || !all_digits(s.substr(17, 2))) throw bad();
      parse_number(s.substr(17, 2), ss);
    }
    if (hh > 23 || mi > 59 || ss > 60) throw bad();
  }
  return epoch_seconds(y, mo, d, hh, mi, ss);
}

}  // namespace gevr
