#include "ctxeval/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "ctxeval/random.hpp"

namespace ctxeval {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string date_only(Timestamp t) { return t.to_string().substr(0, 10); }

/// Timestamp wording for context text: dates for daily and monthly data.
std::string when(const TimeSeriesWindow& w, std::size_t i) {
  const auto unit = w.frequency().unit();
  if (unit == FrequencyUnit::daily || unit == FrequencyUnit::monthly) {
    return date_only(w.timestamp(i));
  }
  return w.timestamp(i).to_string();
}

std::string step_word(Frequency f, std::size_t n) {
  const char* word = "";
  switch (f.unit()) {
    case FrequencyUnit::minutes10: word = n == 1 ? "10-minute interval" : "10-minute intervals"; break;
    case FrequencyUnit::hourly: word = n == 1 ? "hour" : "hours"; break;
    case FrequencyUnit::daily: word = n == 1 ? "day" : "days"; break;
    case FrequencyUnit::monthly: word = n == 1 ? "month" : "months"; break;
  }
  return std::to_string(n) + " " + word;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

TaskInstance bare_instance(TimeSeriesWindow history, TimeSeriesWindow future) {
  return TaskInstance{.task_id = {},
                      .instance_seed = 0,
                      .history = std::move(history),
                      .future = std::move(future),
                      .context = {},
                      .roi = {},
                      .constraint = {},
                      .cluster_id = {},
                      .context_types = {},
                      .effect = {}};
}

void check_base(const TimeSeriesWindow& base, std::size_t history_len) {
  if (history_len == 0 || history_len >= base.size()) {
    throw std::invalid_argument("base series must be longer than the history");
  }
}

}  // namespace

std::string_view context_type_name(ContextType t) {
  switch (t) {
    case ContextType::intemporal: return "intemporal";
    case ContextType::future: return "future";
    case ContextType::historical: return "historical";
    case ContextType::covariate: return "covariate";
    case ContextType::causal: return "causal";
  }
  return "";
}

ContextType parse_context_type(std::string_view name) {
  for (auto t : {ContextType::intemporal, ContextType::future, ContextType::historical,
                 ContextType::covariate, ContextType::causal}) {
    if (context_type_name(t) == name) return t;
  }
  throw std::invalid_argument("unknown context type: " + std::string(name));
}

std::string_view effect_kind_name(ContextEffect::Kind k) {
  switch (k) {
    case ContextEffect::Kind::none: return "none";
    case ContextEffect::Kind::bounded: return "bounded";
    case ContextEffect::Kind::spike: return "spike";
    case ContextEffect::Kind::outage: return "outage";
    case ContextEffect::Kind::covariate: return "covariate";
  }
  return "";
}

ContextEffect::Kind parse_effect_kind(std::string_view name) {
  using K = ContextEffect::Kind;
  for (auto k : {K::none, K::bounded, K::spike, K::outage, K::covariate}) {
    if (effect_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown effect kind: " + std::string(name));
}

std::string_view generator_kind_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::svar: return "svar";
    case GeneratorKind::bounded: return "bounded";
    case GeneratorKind::spike: return "spike";
    case GeneratorKind::outage: return "outage";
  }
  return "";
}

void TaskInstance::validate() const {
  if (future.start() != history.end() || future.frequency() != history.frequency()) {
    throw std::invalid_argument(task_id + ": future does not follow the history");
  }
  const std::size_t h = future.size();
  for (std::size_t k = 0; k < roi.size(); ++k) {
    if (roi[k] >= h || (k > 0 && roi[k] <= roi[k - 1])) {
      throw std::invalid_argument(task_id + ": roi must be sorted unique indices < H");
    }
  }
  constraint.validate(h);
  if (constraint_violation(constraint, future.values()) != 0.0) {
    throw std::invalid_argument(task_id + ": ground truth violates its constraint");
  }
}

void SvarParams::validate() const {
  if (lag < 1) throw std::invalid_argument("svar lag must be >= 1");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("svar noise_scale must be >= 0");
  if ((!a.empty() || !b.empty()) && (a.size() != lag || b.size() != lag)) {
    throw std::invalid_argument("svar needs one a and one b coefficient per lag");
  }
  if (!initial.empty() && initial.size() != lag) {
    throw std::invalid_argument("svar initial values must have one entry per lag");
  }
}

GeneratorKind TaskDescriptor::kind() const {
  return static_cast<GeneratorKind>(params.index());
}

void TaskDescriptor::validate() const {
  if (task_id.empty()) throw std::invalid_argument("task_id must be non-empty");
  if (cluster_id.empty()) throw std::invalid_argument(task_id + ": cluster_id must be non-empty");
  if (history_len == 0 || horizon == 0) {
    throw std::invalid_argument(task_id + ": history_len and horizon must be positive");
  }
  if (!(relative_noise >= 0.0)) throw std::invalid_argument(task_id + ": negative noise");
  if (const auto* s = std::get_if<SvarParams>(&params)) s->validate();
  if (const auto* b = std::get_if<BoundedParams>(&params)) {
    if (!(0.0 <= b->quantile_lo && b->quantile_lo < b->quantile_hi && b->quantile_hi <= 1.0)) {
      throw std::invalid_argument(task_id + ": need 0 <= quantile_lo < quantile_hi <= 1");
    }
  }
  if (const auto* s = std::get_if<SpikeParams>(&params)) {
    if (s->min_event_len < 1 || s->min_event_len > s->max_event_len ||
        s->min_event_len > horizon) {
      throw std::invalid_argument(task_id + ": invalid spike event length range");
    }
    if (!(s->multiplier > 0.0)) throw std::invalid_argument(task_id + ": multiplier must be > 0");
  }
  if (const auto* o = std::get_if<OutageParams>(&params)) {
    if (o->period < 2 || o->outage_len < 1 || o->outage_len >= o->period) {
      throw std::invalid_argument(task_id + ": need 1 <= outage_len < period");
    }
  }
}

std::vector<std::uint64_t> InstancePlan::default_calibration_seeds() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 1000; k < 1025; ++k) s.push_back(k);
  return s;
}

void InstancePlan::validate() const {
  if (eval_seeds.empty()) throw std::invalid_argument("plan needs at least one eval seed");
  if (calibration_seeds.empty()) {
    throw std::invalid_argument("plan needs at least one calibration seed");
  }
  for (auto s : eval_seeds) {
    if (std::find(calibration_seeds.begin(), calibration_seeds.end(), s) !=
        calibration_seeds.end()) {
      throw std::invalid_argument("eval and calibration seeds overlap at " + std::to_string(s));
    }
  }
  if (samples_per_forecast < 4) {
    throw std::invalid_argument("samples_per_forecast must be >= 4 for variance estimates");
  }
}

// ---------------------------------------------------------------------------
// SVAR

std::vector<double> expand_schedule(const std::vector<SvarSegment>& schedule,
                                    std::size_t length) {
  std::vector<double> x0;
  x0.reserve(length);
  for (const auto& seg : schedule) {
    for (std::size_t k = 0; k < seg.length && x0.size() < length; ++k) x0.push_back(seg.level);
  }
  if (x0.size() < length) {
    throw std::invalid_argument("svar schedule is shorter than the window");
  }
  return x0;
}

std::vector<double> svar_simulate(const SvarParams& params, std::size_t length,
                                  const std::vector<double>& noise) {
  params.validate();
  if (params.a.size() != params.lag) throw std::invalid_argument("svar coefficients missing");
  if (!noise.empty() && noise.size() != length) {
    throw std::invalid_argument("svar noise must have one value per step");
  }
  const auto x0 = expand_schedule(params.schedule, length);
  std::vector<double> x1(length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    if (t < params.lag) {
      x1[t] = params.initial.empty() ? 0.0 : params.initial[t];
      continue;
    }
    double s = 0.0;
    for (std::size_t l = 1; l <= params.lag; ++l) {
      s += params.a[l - 1] * x0[t - l] + params.b[l - 1] * x1[t - l];
    }
    x1[t] = noise.empty() ? s : s + noise[t];
  }
  return x1;
}

namespace {

/// "v from d1 to d2, ..." for the schedule restricted to [begin, end).
std::string render_levels(const std::vector<double>& x0, const TimeSeriesWindow& dates,
                          std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end;) {
    std::size_t j = i + 1;
    while (j < end && x0[j] == x0[i]) ++j;
    if (!out.empty()) out += ", ";
    out += fmt("%g", x0[i]) + " from " + date_only(dates.timestamp(i)) + " to " +
           date_only(dates.timestamp(j - 1));
    i = j;
  }
  return out;
}

}  // namespace

TaskInstance svar_generate(const SvarParams& params, Timestamp start,
                           std::size_t history_len, std::size_t horizon,
                           std::uint64_t seed) {
  params.validate();
  if (history_len <= params.lag || horizon == 0) {
    throw std::invalid_argument("svar history must be longer than the lag");
  }
  const std::size_t n = history_len + horizon;
  std::vector<double> noise;
  if (params.noise_scale > 0.0) {
    Rng rng(SeedSequence(seed).with("svar-noise").value());
    noise.resize(n);
    for (double& e : noise) e = params.noise_scale * rng.normal();
  }
  const auto x1 = svar_simulate(params, n, noise);
  const auto x0 = expand_schedule(params.schedule, n);
  const TimeSeriesWindow full(start, Frequency(FrequencyUnit::daily), x1);
  auto [history, future] = split_window(full, history_len);
  auto inst = bare_instance(std::move(history), std::move(future));

  inst.context.background =
      "X_0 is an observed covariate and X_1 is the series to forecast. X_1 follows a "
      "linear structural vector autoregression on X_0 and its own past with lag " +
      std::to_string(params.lag) + " and additive Gaussian noise of scale " +
      fmt("%.3g", params.noise_scale) + ". X_0 has no parents.";
  for (std::size_t l = 1; l <= params.lag; ++l) {
    inst.context.background += "\nParents for X_1 at lag " + std::to_string(l) +
                               ": ['X_0', 'X_1'] affect the forecast variable as " +
                               fmt("%.3f", params.a[l - 1]) + " * X_0 + " +
                               fmt("%.3f", params.b[l - 1]) + " * X_1.";
  }
  inst.context.scenario =
      "During the " + std::to_string(history_len) + " days of history, X_0 takes the value " +
      render_levels(x0, full, 0, history_len) + ". During the " + std::to_string(horizon) +
      " forecast days, X_0 takes the value " + render_levels(x0, full, history_len, n) + ".";

  inst.roi.resize(horizon);
  for (std::size_t i = 0; i < horizon; ++i) inst.roi[i] = i;
  inst.effect.kind = ContextEffect::Kind::covariate;
  return inst;
}

namespace {

void draw_svar(SvarParams& p, std::size_t history_len, std::size_t horizon, Rng& rng) {
  if (p.a.empty()) {
    p.a.resize(p.lag);
    p.b.resize(p.lag);
    double abs_b = 0.0;
    for (std::size_t l = 0; l < p.lag; ++l) {
      p.a[l] = rng.uniform(-1.5, 1.5);
      p.b[l] = rng.uniform(-1.0, 1.0);
      abs_b += std::abs(p.b[l]);
    }
    // Keep the autoregression on X_1 contracting.
    const double shrink = abs_b > 0.9 ? 0.9 / abs_b : 1.0;
    for (std::size_t l = 0; l < p.lag; ++l) {
      p.a[l] = round3(p.a[l]);
      p.b[l] = round3(p.b[l] * shrink);
    }
  }
  if (p.schedule.empty()) {
    static constexpr double kLevels[] = {10, 20, 30, 40, 50, 60};
    auto add_part = [&](std::size_t len) {
      // Three segments with random cut points.
      std::size_t c1 = 1 + rng.below(len - 1), c2 = 1 + rng.below(len - 1);
      if (c1 > c2) std::swap(c1, c2);
      for (std::size_t seg_len : {c1, c2 - c1, len - c2}) {
        if (seg_len > 0) p.schedule.push_back({seg_len, kLevels[rng.below(6)]});
      }
    };
    add_part(history_len);
    add_part(horizon);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Base-series tasks

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TaskInstance bounded_generate(const TimeSeriesWindow& base, std::size_t history_len,
                              double quantile_lo, double quantile_hi) {
  check_base(base, history_len);
  if (!(0.0 <= quantile_lo && quantile_lo < quantile_hi && quantile_hi <= 1.0)) {
    throw std::invalid_argument("need 0 <= quantile_lo < quantile_hi <= 1");
  }
  auto [history, future] = split_window(base, history_len);
  const double lo = quantile_linear(future.values(), quantile_lo);
  const double hi = quantile_linear(future.values(), quantile_hi);
  std::vector<double> clipped = future.values();
  for (double& x : clipped) x = std::clamp(x, lo, hi);
  auto inst = bare_instance(std::move(history),
                            TimeSeriesWindow(future.start(), future.frequency(), clipped));
  inst.constraint = ConstraintSpec::interval_bounds(lo, hi);
  inst.context.constraints_text = "Over the forecast horizon, the values are bounded above by " +
                                  fmt("%.2f", hi) + ", the values are bounded below by " +
                                  fmt("%.2f", lo) + ".";
  inst.effect.kind = ContextEffect::Kind::bounded;
  return inst;
}

TaskInstance spike_generate(const TimeSeriesWindow& base, std::size_t history_len,
                            std::size_t event_start_offset, std::size_t event_len,
                            double multiplier) {
  check_base(base, history_len);
  const std::size_t horizon = base.size() - history_len;
  if (event_len == 0 || event_start_offset + event_len > horizon) {
    throw std::invalid_argument("spike event must lie inside the forecast horizon");
  }
  if (!(multiplier > 0.0)) throw std::invalid_argument("spike multiplier must be > 0");
  auto [history, future] = split_window(base, history_len);
  std::vector<double> v = future.values();
  for (std::size_t i = event_start_offset; i < event_start_offset + event_len; ++i) {
    v[i] *= multiplier;
  }
  const TimeSeriesWindow modified(future.start(), future.frequency(), std::move(v));
  auto inst = bare_instance(std::move(history), modified);
  inst.context.scenario = "An unusual event will start at " + when(modified, event_start_offset) +
                          " and last for " + step_word(modified.frequency(), event_len) +
                          ". While it lasts, the series is expected to run at about " +
                          fmt("%g", multiplier) + " times its usual level.";
  for (std::size_t i = event_start_offset; i < event_start_offset + event_len; ++i) {
    inst.roi.push_back(i);
  }
  inst.effect = {ContextEffect::Kind::spike, multiplier, inst.roi};
  return inst;
}

namespace {

std::vector<std::size_t> outage_starts(std::size_t history_len, std::size_t period,
                                       std::size_t phase) {
  std::vector<std::size_t> starts;
  for (std::size_t s = phase; s < history_len; s += period) starts.push_back(s);
  return starts;
}

std::size_t schedule_start(std::size_t history_len, std::size_t period, std::size_t phase,
                           std::size_t count) {
  const auto starts = outage_starts(history_len, period, phase);
  return count > 0 ? starts[starts.size() - count] : phase;
}

std::string outage_scenario(const TimeSeriesWindow& history, std::size_t period,
                            std::size_t outage_len, std::size_t start_index) {
  const Frequency f = history.frequency();
  return "The unit was offline for maintenance for " + step_word(f, outage_len) + " every " +
         step_word(f, period) + ", starting from " + history.timestamp(start_index).to_string() +
         ", and reads 0 while offline. No maintenance will take place during the forecast "
         "period.";
}

}  // namespace

TaskInstance outage_generate(const TimeSeriesWindow& base, std::size_t history_len,
                             std::size_t period, std::size_t outage_len,
                             std::size_t history_outage_count, std::size_t phase) {
  check_base(base, history_len);
  if (period < 2 || outage_len < 1 || outage_len >= period) {
    throw std::invalid_argument("need 1 <= outage_len < period");
  }
  if (phase >= period || phase >= history_len) {
    throw std::invalid_argument("outage phase must start inside the first period of history");
  }
  const auto starts = outage_starts(history_len, period, phase);
  if (history_outage_count > starts.size()) {
    throw std::invalid_argument("outage pattern exceeds the history: " +
                                std::to_string(history_outage_count) + " blocks requested, " +
                                std::to_string(starts.size()) + " fit");
  }
  auto [history, future] = split_window(base, history_len);
  std::vector<double> h = history.values();
  for (std::size_t k = starts.size() - history_outage_count; k < starts.size(); ++k) {
    for (std::size_t i = starts[k]; i < std::min(starts[k] + outage_len, history_len); ++i) {
      h[i] = 0.0;
    }
  }
  const TimeSeriesWindow zeroed(history.start(), history.frequency(), std::move(h));
  auto inst = bare_instance(zeroed, std::move(future));

  const std::size_t offset = (history_len - phase) % period;
  for (std::size_t i = 0; i < inst.future.size(); ++i) {
    if ((i + offset) % period < outage_len) inst.roi.push_back(i);
  }
  inst.context.scenario =
      outage_scenario(zeroed, period, outage_len,
                      schedule_start(history_len, period, phase, history_outage_count));
  inst.effect = {ContextEffect::Kind::outage, 1.0, inst.roi};
  return inst;
}

TimeSeriesWindow synthetic_series(const SyntheticBase& base, Timestamp start,
                                  std::size_t length, std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("synthetic series needs a positive length");
  if (base.period < 1) throw std::invalid_argument("synthetic period must be >= 1");
  Rng rng(seed);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> v(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double td = static_cast<double>(t);
    v[t] = base.level + base.trend * td +
           base.amplitude *
               std::sin(2.0 * std::numbers::pi * td / static_cast<double>(base.period) + phase) +
           base.noise_sd * rng.normal();
  }
  return TimeSeriesWindow(start, base.frequency, std::move(v));
}

namespace {

std::string base_background(const SyntheticBase& b) {
  return std::string("A synthetic ") + std::string(b.frequency.name()) +
         " series with a seasonal cycle of " + step_word(b.frequency, b.period) + ".";
}

}  // namespace

TaskInstance generate_instance(const TaskDescriptor& d, std::uint64_t seed) {
  d.validate();
  const std::size_t n = d.history_len + d.horizon;
  Rng rng(SeedSequence(seed).with(d.task_id).with("params").value());
  const std::uint64_t base_seed = SeedSequence(seed).with(d.task_id).with("base").value();
  const std::uint64_t noise_seed = SeedSequence(seed).with(d.task_id).with("noise").value();

  auto finish = [&](TaskInstance inst) {
    inst.task_id = d.task_id;
    inst.instance_seed = seed;
    inst.cluster_id = d.cluster_id;
    inst.context_types = d.context_types;
    inst.validate();
    return inst;
  };

  if (const auto* sp = std::get_if<SvarParams>(&d.params)) {
    SvarParams p = *sp;
    draw_svar(p, d.history_len, d.horizon, rng);
    const std::size_t span = n < 365 ? 365 - n : 1;
    const Timestamp start =
        Timestamp::from_civil(2025, 1, 1).plus_days(static_cast<std::int64_t>(rng.below(span)));
    const std::uint64_t noise = SeedSequence(seed).with(d.task_id).with("svar").value();
    return finish(svar_generate(p, start, d.history_len, d.horizon, noise));
  }

  const SyntheticBase& sb = std::visit(
      [](const auto& p) -> const SyntheticBase& {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SvarParams>) {
          throw std::logic_error("unreachable");
        } else {
          return p.base;
        }
      },
      d.params);
  const Timestamp start = sb.frequency.advance(Timestamp::from_civil(sb.start_year, 1, 1),
                                               static_cast<std::int64_t>(rng.below(300)));
  TimeSeriesWindow base = synthetic_series(sb, start, n, base_seed);
  const auto transform = [&](TimeSeriesWindow w) {
    if (d.relative_noise > 0.0) w = add_gaussian_noise(w, d.relative_noise, noise_seed);
    if (d.date_shift_days != 0 && sb.frequency.unit() != FrequencyUnit::monthly) {
      w = shift_dates(w, d.date_shift_days);
    }
    return w;
  };

  TaskInstance inst = [&] {
    if (const auto* bp = std::get_if<BoundedParams>(&d.params)) {
      return bounded_generate(transform(base), d.history_len, bp->quantile_lo, bp->quantile_hi);
    }
    if (const auto* sp = std::get_if<SpikeParams>(&d.params)) {
      const std::size_t max_len = std::min(sp->max_event_len, d.horizon);
      const std::size_t len = sp->min_event_len + rng.below(max_len - sp->min_event_len + 1);
      const std::size_t offset = rng.below(d.horizon - len + 1);
      return spike_generate(transform(base), d.history_len, offset, len, sp->multiplier);
    }
    const auto& op = std::get<OutageParams>(d.params);
    const std::size_t phase = rng.below(std::min(op.period, d.history_len));
    // Zeros are written before the noise transform, so offline readings are
    // only approximately zero.
    TaskInstance zeroed = outage_generate(base, d.history_len, op.period, op.outage_len,
                                          op.history_outage_count, phase);
    auto [h, f] = split_window(transform(concat_windows(zeroed.history, zeroed.future)),
                               d.history_len);
    zeroed.history = std::move(h);
    zeroed.future = std::move(f);
    zeroed.context.scenario = outage_scenario(
        zeroed.history, op.period, op.outage_len,
        schedule_start(d.history_len, op.period, phase, op.history_outage_count));
    return zeroed;
  }();
  inst.context.background = base_background(sb);
  return finish(std::move(inst));
}

// ---------------------------------------------------------------------------
// Registry

std::vector<TaskDescriptor> default_registry() {
  using CT = ContextType;
  std::vector<TaskDescriptor> r;

  r.push_back({.task_id = "svar_lag3",
               .cluster_id = "synthetic_svar",
               .params = SvarParams{},
               .context_types = {CT::covariate, CT::causal, CT::future},
               .history_len = 128,
               .horizon = 32,
               .relative_noise = 0.0,
               .date_shift_days = 0});

  BoundedParams daily_bounded;
  daily_bounded.base = {.frequency = Frequency(FrequencyUnit::daily), .level = 10.0,
                        .trend = 0.01, .amplitude = 2.0, .period = 7, .noise_sd = 0.4,
                        .start_year = 2023};
  daily_bounded.quantile_lo = 0.1;
  daily_bounded.quantile_hi = 0.9;
  r.push_back({.task_id = "bounded_daily_sensor",
               .cluster_id = "bounded",
               .params = daily_bounded,
               .context_types = {CT::future},
               .history_len = 70,
               .horizon = 14});

  BoundedParams hourly_bounded;
  hourly_bounded.base = {.frequency = Frequency(FrequencyUnit::hourly), .level = 50.0,
                         .trend = 0.0, .amplitude = 10.0, .period = 24, .noise_sd = 2.0,
                         .start_year = 2022};
  hourly_bounded.quantile_lo = 0.25;
  hourly_bounded.quantile_hi = 0.95;
  r.push_back({.task_id = "bounded_hourly_load",
               .cluster_id = "bounded",
               .params = hourly_bounded,
               .context_types = {CT::future},
               .history_len = 168,
               .horizon = 24});

  SpikeParams spike;
  spike.base = {.frequency = Frequency(FrequencyUnit::hourly), .level = 40.0, .trend = 0.0,
                .amplitude = 8.0, .period = 24, .noise_sd = 1.5, .start_year = 2012};
  r.push_back({.task_id = "spike_electricity",
               .cluster_id = "spike",
               .params = spike,
               .context_types = {CT::future, CT::covariate},
               .history_len = 168,
               .horizon = 24});

  OutageParams outage;
  outage.base = {.frequency = Frequency(FrequencyUnit::daily), .level = 100.0, .trend = 0.0,
                 .amplitude = 15.0, .period = 7, .noise_sd = 6.0, .start_year = 1996};
  r.push_back({.task_id = "atm_outage",
               .cluster_id = "outage",
               .params = outage,
               .context_types = {CT::intemporal, CT::covariate},
               .history_len = 112,
               .horizon = 28});
  return r;
}

const TaskDescriptor& find_task(const std::vector<TaskDescriptor>& registry,
                                std::string_view task_id) {
  for (const auto& d : registry) {
    if (d.task_id == task_id) return d;
  }
  throw std::invalid_argument("unknown task: " + std::string(task_id));
}

std::map<std::string, double> task_weights(const std::vector<TaskDescriptor>& descriptors) {
  if (descriptors.empty()) throw std::invalid_argument("task_weights needs at least one task");
  std::map<std::string, std::size_t> cluster_size;
  std::set<std::string> ids;
  for (const auto& d : descriptors) {
    if (!ids.insert(d.task_id).second) {
      throw std::invalid_argument("duplicate task_id: " + d.task_id);
    }
    ++cluster_size[d.cluster_id];
  }
  const auto k = static_cast<double>(cluster_size.size());
  std::map<std::string, double> w;
  for (const auto& d : descriptors) {
    w[d.task_id] = 1.0 / (k * static_cast<double>(cluster_size[d.cluster_id]));
  }
  return w;
}

std::string describe_task(const TaskDescriptor& d) {
  std::string types;
  for (auto t : d.context_types) {
    if (!types.empty()) types += ",";
    types += context_type_name(t);
  }
  return d.task_id + "\t" + d.cluster_id + "\t" + std::string(generator_kind_name(d.kind())) +
         "\t" + types;
}

std::vector<std::vector<double>> calibration_futures(const TaskDescriptor& d,
                                                     const InstancePlan& plan) {
  std::vector<std::vector<double>> out;
  out.reserve(plan.calibration_seeds.size());
  for (auto s : plan.calibration_seeds) out.push_back(generate_instance(d, s).future.values());
  return out;
}

}  // namespace ctxeval
