#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ctxeval/scoring.hpp"
#include "ctxeval/timeseries.hpp"

namespace ctxeval {

enum class ContextType { intemporal, future, historical, covariate, causal };

std::string_view context_type_name(ContextType t);
ContextType parse_context_type(std::string_view name);

/// Machine-readable description of how the context changed the future. Used by
/// reference forecasters that must not read the text.
struct ContextEffect {
  enum class Kind { none, bounded, spike, outage, covariate };

  Kind kind = Kind::none;
  double multiplier = 1.0;           // spike
  std::vector<std::size_t> indices;  // future steps touched by the effect

  friend bool operator==(const ContextEffect&, const ContextEffect&) = default;
};

std::string_view effect_kind_name(ContextEffect::Kind k);
ContextEffect::Kind parse_effect_kind(std::string_view name);

/// One evaluation unit.
struct TaskInstance {
  std::string task_id;
  std::uint64_t instance_seed = 0;
  TimeSeriesWindow history;
  TimeSeriesWindow future;
  ContextBlocks context;
  RegionOfInterest roi;
  ConstraintSpec constraint;
  std::string cluster_id;
  std::set<ContextType> context_types;
  ContextEffect effect;

  /// Checks contiguity, RoI range and that the future satisfies the constraint.
  void validate() const;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

// ---------------------------------------------------------------------------
// Generator parameters

struct SvarSegment {
  std::size_t length = 0;
  double level = 0.0;

  friend bool operator==(const SvarSegment&, const SvarSegment&) = default;
};

/// Bivariate SVAR: X_0 follows a piecewise-constant schedule and
///   X_1(t) = sum_{l=1..lag} a_l X_0(t-l) + b_l X_1(t-l) + eps_t
/// for t >= lag, with X_1(0..lag-1) = initial.
struct SvarParams {
  std::size_t lag = 3;
  double noise_scale = 0.1;
  std::vector<SvarSegment> schedule;  // empty: drawn from the seed
  std::vector<double> a;              // empty: drawn from the seed
  std::vector<double> b;
  std::vector<double> initial;        // empty: zeros

  void validate() const;
};

/// Seasonal synthetic base series: level + trend*t + amplitude*sin(2 pi t/P + phase)
/// plus Gaussian noise, with the phase and noise drawn from the seed.
struct SyntheticBase {
  Frequency frequency{FrequencyUnit::daily};
  double level = 10.0;
  double trend = 0.0;
  double amplitude = 1.0;
  std::size_t period = 7;
  double noise_sd = 0.1;
  int start_year = 2023;
};

struct BoundedParams {
  SyntheticBase base;
  double quantile_lo = 0.1;
  double quantile_hi = 0.9;
};

struct SpikeParams {
  SyntheticBase base;
  std::size_t min_event_len = 2;
  std::size_t max_event_len = 6;
  double multiplier = 5.0;
};

struct OutageParams {
  SyntheticBase base;
  std::size_t period = 14;
  std::size_t outage_len = 7;
  std::size_t history_outage_count = 4;
};

using GeneratorParams = std::variant<SvarParams, BoundedParams, SpikeParams, OutageParams>;

enum class GeneratorKind { svar, bounded, spike, outage };
std::string_view generator_kind_name(GeneratorKind k);

struct TaskDescriptor {
  std::string task_id;
  std::string cluster_id;
  GeneratorParams params;
  std::set<ContextType> context_types;
  std::size_t history_len = 0;
  std::size_t horizon = 0;
  /// Relative std of the memorization noise for base-series tasks; 0 disables.
  double relative_noise = 0.03;
  /// Day shift applied to base-series tasks (ignored for monthly data).
  std::int64_t date_shift_days = 1;

  [[nodiscard]] GeneratorKind kind() const;
  void validate() const;
};

struct InstancePlan {
  std::vector<std::uint64_t> eval_seeds{0, 1, 2, 3, 4};
  std::vector<std::uint64_t> calibration_seeds = default_calibration_seeds();
  std::size_t samples_per_forecast = 25;

  static std::vector<std::uint64_t> default_calibration_seeds();
  void validate() const;
};

// ---------------------------------------------------------------------------
// Generators. The lower-level builders take explicit windows and return an
// instance with task metadata left empty; generate_instance fills it in.

/// X_0 expanded to one value per step over `length` steps.
std::vector<double> expand_schedule(const std::vector<SvarSegment>& schedule,
                                    std::size_t length);

/// X_1 over history_len + horizon steps. `noise` holds eps_t per step and may
/// be empty for a noiseless run.
std::vector<double> svar_simulate(const SvarParams& params, std::size_t length,
                                  const std::vector<double>& noise);

/// `params` must be fully specified (schedule, coefficients).
TaskInstance svar_generate(const SvarParams& params, Timestamp start,
                           std::size_t history_len, std::size_t horizon,
                           std::uint64_t seed);

/// Linear interpolation between order statistics.
double quantile_linear(std::vector<double> values, double q);

TaskInstance bounded_generate(const TimeSeriesWindow& base, std::size_t history_len,
                              double quantile_lo, double quantile_hi);

TaskInstance spike_generate(const TimeSeriesWindow& base, std::size_t history_len,
                            std::size_t event_start_offset, std::size_t event_len,
                            double multiplier);

/// `phase` is the index of the first step of the maintenance schedule; the last
/// `history_outage_count` schedule blocks that start inside the history are
/// zeroed.
TaskInstance outage_generate(const TimeSeriesWindow& base, std::size_t history_len,
                             std::size_t period, std::size_t outage_len,
                             std::size_t history_outage_count, std::size_t phase);

TimeSeriesWindow synthetic_series(const SyntheticBase& base, Timestamp start,
                                  std::size_t length, std::uint64_t seed);

TaskInstance generate_instance(const TaskDescriptor& descriptor, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Registry

/// Shipped task suite.
std::vector<TaskDescriptor> default_registry();

const TaskDescriptor& find_task(const std::vector<TaskDescriptor>& registry,
                                std::string_view task_id);

/// weight(task) = 1 / (K * n_c) with K clusters and n_c tasks in the cluster.
std::map<std::string, double> task_weights(const std::vector<TaskDescriptor>& descriptors);

/// "task_id cluster_id kind types" line used by `list-tasks`.
std::string describe_task(const TaskDescriptor& d);

/// Futures of the calibration instances, for calibrate_alpha.
std::vector<std::vector<double>> calibration_futures(const TaskDescriptor& d,
                                                     const InstancePlan& plan);

}  // namespace ctxeval
