#include "ctxeval/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ctxeval/random.hpp"

namespace ctxeval {

using namespace std::chrono;

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Timestamp Timestamp::from_civil(int y, unsigned mo, unsigned d, unsigned h,
                                unsigned mi, unsigned s) {
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw std::invalid_argument("invalid calendar datetime");
  }
  return Timestamp(sys_days{ymd} + hours{h} + minutes{mi} + seconds{s});
}

Timestamp Timestamp::parse(std::string_view text) {
  const auto bad = [&] {
    return std::invalid_argument("unparseable timestamp '" + std::string(text) +
                                 "'");
  };
  std::string_view t = trim(text);
  if (!t.empty() && (t.back() == 'Z' || t.back() == 'z')) t.remove_suffix(1);
  if (t.size() < 10 || t[4] != '-' || t[7] != '-') throw bad();
  unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_uint(t.substr(0, 4), y) || !parse_uint(t.substr(5, 2), mo) ||
      !parse_uint(t.substr(8, 2), d)) {
    throw bad();
  }
  if (t.size() > 10) {
    if (t[10] != ' ' && t[10] != 'T' && t[10] != 't') throw bad();
    std::string_view clock = t.substr(11);
    if (clock.size() != 5 && clock.size() != 8) throw bad();
    if (clock[2] != ':') throw bad();
    if (!parse_uint(clock.substr(0, 2), h) || !parse_uint(clock.substr(3, 2), mi))
      throw bad();
    if (clock.size() == 8 &&
        (clock[5] != ':' || !parse_uint(clock.substr(6, 2), s))) {
      throw bad();
    }
  }
  try {
    return from_civil(static_cast<int>(y), mo, d, h, mi, s);
  } catch (const std::invalid_argument&) {
    throw bad();
  }
}

std::string Timestamp::to_string() const {
  const auto dp = floor<days>(tp_);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{tp_ - dp};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

year_month_day Timestamp::date() const { return year_month_day{floor<days>(tp_)}; }

Timestamp Timestamp::plus_seconds(std::int64_t s) const {
  return Timestamp(tp_ + seconds{s});
}

Timestamp Timestamp::plus_days(std::int64_t d) const {
  return Timestamp(tp_ + days{d});
}

Timestamp Timestamp::plus_months(std::int64_t m) const {
  const auto dp = floor<days>(tp_);
  const auto tod = tp_ - dp;
  year_month_day ymd{dp};
  const year_month ym = year_month{ymd.year(), ymd.month()} + months{m};
  const day last = year_month_day_last{ym.year(), month_day_last{ym.month()}}.day();
  const day d = std::min(ymd.day(), last);
  return Timestamp(sys_days{year_month_day{ym.year(), ym.month(), d}} + tod);
}

Frequency Frequency::parse(std::string_view name) {
  if (name == "10min" || name == "minutes10") return Frequency(FrequencyUnit::minutes10);
  if (name == "hourly" || name == "H" || name == "h") return Frequency(FrequencyUnit::hourly);
  if (name == "daily" || name == "D") return Frequency(FrequencyUnit::daily);
  if (name == "monthly" || name == "MS" || name == "M") return Frequency(FrequencyUnit::monthly);
  throw std::invalid_argument("unknown frequency '" + std::string(name) + "'");
}

std::string_view Frequency::name() const {
  switch (unit_) {
    case FrequencyUnit::minutes10: return "10min";
    case FrequencyUnit::hourly: return "hourly";
    case FrequencyUnit::daily: return "daily";
    case FrequencyUnit::monthly: return "monthly";
  }
  return "daily";
}

Timestamp Frequency::advance(Timestamp start, std::int64_t steps) const {
  switch (unit_) {
    case FrequencyUnit::minutes10: return start.plus_seconds(600 * steps);
    case FrequencyUnit::hourly: return start.plus_seconds(3600 * steps);
    case FrequencyUnit::daily: return start.plus_days(steps);
    case FrequencyUnit::monthly: return start.plus_months(steps);
  }
  return start;
}

std::size_t Frequency::default_period() const {
  switch (unit_) {
    case FrequencyUnit::minutes10: return 144;
    case FrequencyUnit::hourly: return 24;
    case FrequencyUnit::daily: return 7;
    case FrequencyUnit::monthly: return 12;
  }
  return 1;
}

TimeSeriesWindow::TimeSeriesWindow(Timestamp start, Frequency frequency,
                                   std::vector<double> values)
    : start_(start), frequency_(frequency), values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("time series window must be non-empty");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("non-finite value at index " +
                                  std::to_string(i));
    }
  }
}

Timestamp TimeSeriesWindow::timestamp(std::size_t i) const {
  return frequency_.advance(start_, static_cast<std::int64_t>(i));
}

std::vector<Timestamp> TimeSeriesWindow::timestamps() const {
  std::vector<Timestamp> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out.push_back(timestamp(i));
  return out;
}

std::string ContextBlocks::full_text() const {
  std::string out;
  for (const std::string* block : {&background, &scenario, &constraints_text}) {
    if (block->empty()) continue;
    if (!out.empty()) out += '\n';
    out += *block;
  }
  return out;
}

std::pair<TimeSeriesWindow, TimeSeriesWindow> split_window(
    const TimeSeriesWindow& series, std::size_t history_len) {
  if (history_len == 0 || history_len >= series.size()) {
    throw std::invalid_argument("history_len " + std::to_string(history_len) +
                                " out of range for a window of length " +
                                std::to_string(series.size()));
  }
  const auto& v = series.values();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(history_len);
  return {TimeSeriesWindow(series.start(), series.frequency(), {v.begin(), mid}),
          TimeSeriesWindow(series.timestamp(history_len), series.frequency(),
                           {mid, v.end()})};
}

TimeSeriesWindow concat_windows(const TimeSeriesWindow& head,
                                const TimeSeriesWindow& tail) {
  if (head.frequency() != tail.frequency() || head.end() != tail.start()) {
    throw std::invalid_argument("windows are not contiguous");
  }
  std::vector<double> v = head.values();
  v.insert(v.end(), tail.values().begin(), tail.values().end());
  return TimeSeriesWindow(head.start(), head.frequency(), std::move(v));
}

double window_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

TimeSeriesWindow add_gaussian_noise(const TimeSeriesWindow& series,
                                    double relative_sigma,
                                    std::uint64_t rng_seed) {
  if (!(relative_sigma >= 0.0)) {
    throw std::invalid_argument("relative_sigma must be >= 0");
  }
  if (series.size() < 2) {
    throw std::invalid_argument("noise needs at least 2 values (window std)");
  }
  const double sd = relative_sigma * window_std(series.values());
  std::vector<double> out = series.values();
  if (sd > 0.0) {
    Rng rng(rng_seed);
    for (double& x : out) x += sd * rng.normal();
  }
  return TimeSeriesWindow(series.start(), series.frequency(), std::move(out));
}

TimeSeriesWindow shift_dates(const TimeSeriesWindow& series, std::int64_t days) {
  if (series.frequency().unit() == FrequencyUnit::monthly) {
    throw std::invalid_argument("day shifts are not defined for monthly series");
  }
  return TimeSeriesWindow(series.start().plus_days(days), series.frequency(),
                          series.values());
}

TimeSeriesWindow affine_transform(const TimeSeriesWindow& series, double a,
                                  double b) {
  if (a == 0.0) throw std::invalid_argument("affine scale must be non-zero");
  std::vector<double> out = series.values();
  for (double& x : out) x = a * x + b;
  return TimeSeriesWindow(series.start(), series.frequency(), std::move(out));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

TimeSeriesWindow load_csv(const std::filesystem::path& path,
                          std::string_view timestamp_column,
                          std::string_view value_column, Frequency frequency) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file " + path.string());
  const std::string where = path.string();

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(where + ": empty file");
  const auto header = split_csv_line(line);
  const auto col = [&](std::string_view name) {
    const auto it = std::find_if(header.begin(), header.end(), [&](const auto& h) {
      return trim(h) == name;
    });
    if (it == header.end()) {
      throw std::runtime_error(where + ": missing column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ts_col = col(timestamp_column);
  const std::size_t val_col = col(value_column);

  std::vector<double> values;
  Timestamp start;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= std::max(ts_col, val_col)) {
      throw std::runtime_error(where + ": row " + std::to_string(row) +
                               " has too few fields");
    }
    Timestamp ts;
    try {
      ts = Timestamp::parse(fields[ts_col]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": row " + std::to_string(row) + ": " +
                               e.what());
    }
    const std::string_view vtext = trim(fields[val_col]);
    double v = 0.0;
    auto [p, ec] = std::from_chars(vtext.data(), vtext.data() + vtext.size(), v);
    if (ec != std::errc{} || p != vtext.data() + vtext.size() || !std::isfinite(v)) {
      throw std::runtime_error(where + ": row " + std::to_string(row) +
                               ": non-numeric value '" + std::string(vtext) + "'");
    }
    if (values.empty()) {
      start = ts;
    } else {
      const Timestamp expected =
          frequency.advance(start, static_cast<std::int64_t>(values.size()));
      if (ts < expected) {
        throw std::runtime_error(where + ": row " + std::to_string(row) +
                                 ": duplicate or out-of-order timestamp " +
                                 ts.to_string());
      }
      if (ts != expected) {
        throw std::runtime_error(where + ": row " + std::to_string(row) +
                                 ": gap before " + ts.to_string() +
                                 " (missing " + expected.to_string() + ")");
      }
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error(where + ": no data rows");
  return TimeSeriesWindow(start, frequency, std::move(values));
}

}  // namespace ctxeval
