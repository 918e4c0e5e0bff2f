#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ctxeval/scoring.hpp"
#include "ctxeval/tasks.hpp"
#include "ctxeval/timeseries.hpp"

namespace ctxeval {

/// Additive Holt-Winters in error-correction form:
///   yhat_t = l + b + s_t,  e_t = y_t - yhat_t
///   l <- l + b + alpha e_t,  b <- b + alpha beta e_t,  s_t <- s_t + gamma e_t
/// Values are stored relative to `offset` (the history mean).
struct ExpSmoothingState {
  double offset = 0.0;
  double level = 0.0;
  bool has_trend = false;
  double trend = 0.0;
  /// seasonals[k] applies k+1 steps after the end of the history; empty when
  /// seasonality is disabled.
  std::vector<double> seasonals;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double residual_std = 0.0;
  /// One-step in-sample residuals, used by the bootstrap sampler.
  std::vector<double> residuals;

  [[nodiscard]] std::size_t period() const { return seasonals.size(); }
};

enum class SamplingMethod { gaussian, bootstrap };

/// Fits on the raw values. `period` <= 1 disables seasonality; it is also
/// disabled when the history holds fewer than two full periods. The trend is
/// disabled below 5 observations.
ExpSmoothingState exp_smoothing_fit(std::span<const double> history, std::size_t period);

/// Period from `period_hint` or else the frequency's default.
ExpSmoothingState exp_smoothing_fit(const TimeSeriesWindow& history,
                                    std::optional<std::size_t> period_hint = std::nullopt);

/// Point forecast path (innovations set to zero).
std::vector<double> exp_smoothing_point(const ExpSmoothingState& state, std::size_t horizon);

ForecastEnsemble exp_smoothing_sample(const ExpSmoothingState& state, std::size_t horizon,
                                      std::size_t num_samples, std::uint64_t seed,
                                      SamplingMethod method = SamplingMethod::gaussian);

/// Repeats the last observed period. Spread comes from seasonal differences
/// y_t - y_{t-P}, bootstrapped and accumulated once per elapsed period.
ForecastEnsemble seasonal_naive(const TimeSeriesWindow& history, std::size_t period,
                                std::size_t horizon, std::size_t num_samples,
                                std::uint64_t seed);

/// Applies the instance's machine-readable effect to a context-blind ensemble:
/// clips into the constraint, scales spike steps, and replaces would-be outage
/// steps with the mean of the trajectory's other steps.
ForecastEnsemble context_oracle(const TaskInstance& instance, const ForecastEnsemble& ensemble);

}  // namespace ctxeval
