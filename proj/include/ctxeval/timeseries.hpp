#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctxeval {

/// Timezone-naive calendar datetime with second resolution.
class Timestamp {
 public:
  Timestamp() = default;
  explicit Timestamp(std::chrono::sys_seconds tp) : tp_(tp) {}

  static Timestamp from_civil(int year, unsigned month, unsigned day,
                              unsigned hour = 0, unsigned minute = 0,
                              unsigned second = 0);

  /// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" and the RFC 3339 "T"
  /// separator; a trailing "Z" is ignored. Throws std::invalid_argument.
  static Timestamp parse(std::string_view text);

  /// "YYYY-MM-DD HH:MM:SS"
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] std::chrono::sys_seconds time_point() const { return tp_; }
  [[nodiscard]] std::chrono::year_month_day date() const;

  [[nodiscard]] Timestamp plus_seconds(std::int64_t s) const;
  [[nodiscard]] Timestamp plus_days(std::int64_t d) const;
  /// Calendar-month arithmetic; day-of-month is clamped to the target month.
  [[nodiscard]] Timestamp plus_months(std::int64_t m) const;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

 private:
  std::chrono::sys_seconds tp_{};
};

enum class FrequencyUnit { minutes10, hourly, daily, monthly };

class Frequency {
 public:
  constexpr Frequency() = default;
  constexpr explicit Frequency(FrequencyUnit unit) : unit_(unit) {}

  static Frequency parse(std::string_view name);

  [[nodiscard]] constexpr FrequencyUnit unit() const { return unit_; }
  [[nodiscard]] std::string_view name() const;

  /// start advanced by `steps` steps. Monthly steps are computed from `start`
  /// directly so clamping never accumulates (Jan 31 -> Feb 29 -> Mar 31).
  [[nodiscard]] Timestamp advance(Timestamp start, std::int64_t steps) const;

  /// Default seasonal period used by the smoothing baselines.
  [[nodiscard]] std::size_t default_period() const;

  friend constexpr bool operator==(Frequency, Frequency) = default;

 private:
  FrequencyUnit unit_ = FrequencyUnit::daily;
};

/// Evenly spaced, non-empty, finite-valued window.
class TimeSeriesWindow {
 public:
  TimeSeriesWindow(Timestamp start, Frequency frequency,
                   std::vector<double> values);

  [[nodiscard]] Timestamp start() const { return start_; }
  [[nodiscard]] Frequency frequency() const { return frequency_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] Timestamp timestamp(std::size_t i) const;
  /// First timestamp after the window.
  [[nodiscard]] Timestamp end() const { return timestamp(values_.size()); }
  [[nodiscard]] std::vector<Timestamp> timestamps() const;

  friend bool operator==(const TimeSeriesWindow&,
                         const TimeSeriesWindow&) = default;

 private:
  Timestamp start_;
  Frequency frequency_;
  std::vector<double> values_;
};

/// The three verbalized context sections; any may be empty.
struct ContextBlocks {
  std::string background;
  std::string scenario;
  std::string constraints_text;

  [[nodiscard]] bool empty() const {
    return background.empty() && scenario.empty() && constraints_text.empty();
  }
  /// Full natural-language context: the non-empty blocks joined by newlines.
  [[nodiscard]] std::string full_text() const;

  friend bool operator==(const ContextBlocks&, const ContextBlocks&) = default;
};

std::pair<TimeSeriesWindow, TimeSeriesWindow> split_window(
    const TimeSeriesWindow& series, std::size_t history_len);

/// Inverse of split_window; `tail` must start where `head` ends.
TimeSeriesWindow concat_windows(const TimeSeriesWindow& head,
                                const TimeSeriesWindow& tail);

/// Population standard deviation.
double window_std(std::span<const double> values);

/// Adds N(0, (relative_sigma * window_std)^2) noise to every value.
TimeSeriesWindow add_gaussian_noise(const TimeSeriesWindow& series,
                                    double relative_sigma,
                                    std::uint64_t rng_seed);

TimeSeriesWindow shift_dates(const TimeSeriesWindow& series, std::int64_t days);

TimeSeriesWindow affine_transform(const TimeSeriesWindow& series, double a,
                                  double b);

TimeSeriesWindow load_csv(const std::filesystem::path& path,
                          std::string_view timestamp_column,
                          std::string_view value_column, Frequency frequency);

}  // namespace ctxeval
