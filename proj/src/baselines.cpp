#include "ctxeval/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ctxeval/random.hpp"

namespace ctxeval {

namespace {

struct Weights {
  double alpha = 0.5, beta = 0.0, gamma = 0.0;
};

struct Structure {
  bool trend = false;
  std::size_t period = 0;  // 0: no seasonality
};

/// Runs the recursions over `y` (already centered). Returns the sum of squared
/// one-step errors; fills `out` when given.
double run_filter(std::span<const double> y, const Structure& st, const Weights& w,
                  ExpSmoothingState* out) {
  const std::size_t n = y.size();
  const std::size_t p = st.period;
  double level = y[0], trend = 0.0;
  std::vector<double> season(p, 0.0);
  std::size_t t0 = 1;          // first step run through the recursions
  std::size_t first_err = 1;   // first step whose error is informative

  if (p > 0) {
    const double m1 = std::accumulate(y.begin(), y.begin() + p, 0.0) / static_cast<double>(p);
    const double m2 =
        std::accumulate(y.begin() + p, y.begin() + 2 * p, 0.0) / static_cast<double>(p);
    trend = st.trend ? (m2 - m1) / static_cast<double>(p) : 0.0;
    const double mid = (static_cast<double>(p) - 1.0) / 2.0;
    level = m1 + trend * mid;
    for (std::size_t i = 0; i < p; ++i) {
      season[i] = y[i] - (m1 + trend * (static_cast<double>(i) - mid));
    }
    t0 = first_err = p;
  } else if (st.trend) {
    trend = y[1] - y[0];
    first_err = 2;  // the step used to initialise the trend has zero error
  }

  double sse = 0.0;
  if (out) out->residuals.clear();
  for (std::size_t t = t0; t < n; ++t) {
    const double s = p > 0 ? season[t % p] : 0.0;
    const double e = y[t] - (level + trend + s);
    level = level + trend + w.alpha * e;
    if (st.trend) trend += w.alpha * w.beta * e;
    if (p > 0) season[t % p] = s + w.gamma * e;
    if (t >= first_err) {
      sse += e * e;
      if (out) out->residuals.push_back(e);
    }
  }

  if (out) {
    out->level = level;
    out->has_trend = st.trend;
    out->trend = trend;
    out->seasonals.assign(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) out->seasonals[k] = season[(n + k) % p];
    out->alpha = w.alpha;
    out->beta = st.trend ? w.beta : 0.0;
    out->gamma = p > 0 ? w.gamma : 0.0;
    const auto cnt = static_cast<double>(out->residuals.size());
    out->residual_std = cnt > 0 ? std::sqrt(sse / cnt) : 0.0;
  }
  return sse;
}

// Strict improvement by more than a relative 1e-10, so near-ties resolve the
// same way under tiny rounding differences (e.g. shifted inputs).
bool improves(double candidate, double best) { return candidate < best - 1e-10 * best; }

double& coord(Weights& w, int k) { return k == 0 ? w.alpha : (k == 1 ? w.beta : w.gamma); }

Weights fit_weights(std::span<const double> y, const Structure& st) {
  std::vector<int> active{0};
  if (st.trend) active.push_back(1);
  if (st.period > 0) active.push_back(2);

  // Coarse grid, step 0.05.
  constexpr int kSteps = 21;
  Weights best;
  double best_sse = std::numeric_limits<double>::infinity();
  std::array<int, 3> idx{0, 0, 0};
  const auto total = static_cast<std::size_t>(std::pow(kSteps, active.size()));
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    Weights w{0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < active.size(); ++a) {
      idx[a] = static_cast<int>(c % kSteps);
      c /= kSteps;
      coord(w, active[a]) = 0.05 * idx[a];
    }
    const double sse = run_filter(y, st, w, nullptr);
    if (improves(sse, best_sse)) {
      best_sse = sse;
      best = w;
    }
  }

  // Golden-section refinement, one coordinate at a time, two sweeps.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int k : active) {
      double lo = std::max(0.0, coord(best, k) - 0.05);
      double hi = std::min(1.0, coord(best, k) + 0.05);
      auto f = [&](double x) {
        Weights w = best;
        coord(w, k) = x;
        return run_filter(y, st, w, nullptr);
      };
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 30; ++it) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = f(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = f(x2);
        }
      }
      const double x = f1 <= f2 ? x1 : x2;
      const double fx = std::min(f1, f2);
      if (improves(fx, best_sse)) {
        best_sse = fx;
        coord(best, k) = x;
      }
    }
  }
  return best;
}

}  // namespace

ExpSmoothingState exp_smoothing_fit(std::span<const double> history, std::size_t period) {
  if (history.empty()) throw std::invalid_argument("exponential smoothing needs a history");
  for (double v : history) {
    if (!std::isfinite(v)) throw std::invalid_argument("history values must be finite");
  }
  const std::size_t n = history.size();
  const double offset = std::accumulate(history.begin(), history.end(), 0.0) /
                        static_cast<double>(n);
  std::vector<double> y(history.begin(), history.end());
  for (double& v : y) v -= offset;

  ExpSmoothingState state;
  state.offset = offset;
  if (n == 1) {
    state.level = y[0];
    return state;
  }
  Structure st;
  st.trend = n >= 5;
  st.period = (period >= 2 && n >= 2 * period) ? period : 0;
  const Weights w = fit_weights(y, st);
  run_filter(y, st, w, &state);
  return state;
}

ExpSmoothingState exp_smoothing_fit(const TimeSeriesWindow& history,
                                    std::optional<std::size_t> period_hint) {
  return exp_smoothing_fit(history.values(),
                           period_hint.value_or(history.frequency().default_period()));
}

namespace {

template <class Draw>
std::vector<double> simulate_path(const ExpSmoothingState& st, std::size_t horizon, Draw draw) {
  double level = st.level, trend = st.has_trend ? st.trend : 0.0;
  std::vector<double> season = st.seasonals;
  const std::size_t p = season.size();
  std::vector<double> path(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const double s = p > 0 ? season[h % p] : 0.0;
    const double e = draw();
    path[h] = st.offset + level + trend + s + e;
    level = level + trend + st.alpha * e;
    if (st.has_trend) trend += st.alpha * st.beta * e;
    if (p > 0) season[h % p] = s + st.gamma * e;
  }
  return path;
}

}  // namespace

std::vector<double> exp_smoothing_point(const ExpSmoothingState& state, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  return simulate_path(state, horizon, [] { return 0.0; });
}

ForecastEnsemble exp_smoothing_sample(const ExpSmoothingState& state, std::size_t horizon,
                                      std::size_t num_samples, std::uint64_t seed,
                                      SamplingMethod method) {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  if (num_samples < 2) throw std::invalid_argument("need at least 2 samples");
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(horizon * num_samples);
  for (std::size_t m = 0; m < num_samples; ++m) {
    std::vector<double> path;
    if (method == SamplingMethod::bootstrap && !state.residuals.empty()) {
      path = simulate_path(state, horizon, [&] {
        return state.residuals[rng.below(state.residuals.size())];
      });
    } else if (method == SamplingMethod::gaussian && state.residual_std > 0.0) {
      path = simulate_path(state, horizon, [&] { return state.residual_std * rng.normal(); });
    } else {
      path = exp_smoothing_point(state, horizon);
    }
    values.insert(values.end(), path.begin(), path.end());
  }
  return ForecastEnsemble(num_samples, horizon, std::move(values));
}

ForecastEnsemble seasonal_naive(const TimeSeriesWindow& history, std::size_t period,
                                std::size_t horizon, std::size_t num_samples,
                                std::uint64_t seed) {
  const auto& y = history.values();
  if (period < 1 || y.size() < period) {
    throw std::invalid_argument("seasonal naive needs at least one full period of history");
  }
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  if (num_samples < 2) throw std::invalid_argument("need at least 2 samples");
  const std::size_t n = y.size();
  std::vector<double> diffs;
  for (std::size_t t = period; t < n; ++t) diffs.push_back(y[t] - y[t - period]);
  const bool flat = std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; });

  Rng rng(seed);
  std::vector<double> values;
  values.reserve(horizon * num_samples);
  std::vector<double> err(horizon);
  for (std::size_t m = 0; m < num_samples; ++m) {
    for (std::size_t h = 0; h < horizon; ++h) {
      const double prev = h >= period ? err[h - period] : 0.0;
      err[h] = flat ? prev : prev + diffs[rng.below(diffs.size())];
      values.push_back(y[n - period + h % period] + err[h]);
    }
  }
  return ForecastEnsemble(num_samples, horizon, std::move(values));
}

ForecastEnsemble context_oracle(const TaskInstance& instance, const ForecastEnsemble& ensemble) {
  const std::size_t horizon = ensemble.horizon();
  if (horizon != instance.future.size()) {
    throw std::invalid_argument("ensemble horizon does not match the instance");
  }
  const auto& c = instance.constraint;
  const auto& idx = instance.effect.indices;
  std::vector<char> in_effect(horizon, 0);
  for (std::size_t i : idx) {
    if (i >= horizon) throw std::invalid_argument("effect index outside the horizon");
    in_effect[i] = 1;
  }

  std::vector<double> values = ensemble.values();
  for (std::size_t m = 0; m < ensemble.num_samples(); ++m) {
    double* row = values.data() + m * horizon;
    switch (instance.effect.kind) {
      case ContextEffect::Kind::spike:
        for (std::size_t i : idx) row[i] *= instance.effect.multiplier;
        break;
      case ContextEffect::Kind::outage: {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t h = 0; h < horizon; ++h) {
          if (!in_effect[h]) {
            sum += row[h];
            ++cnt;
          }
        }
        if (cnt > 0) {
          for (std::size_t i : idx) row[i] = sum / static_cast<double>(cnt);
        }
        break;
      }
      default:
        break;
    }
    for (std::size_t h = 0; h < horizon; ++h) {
      switch (c.kind) {
        case ConstraintSpec::Kind::none: break;
        case ConstraintSpec::Kind::upper: row[h] = std::min(row[h], c.upper); break;
        case ConstraintSpec::Kind::lower: row[h] = std::max(row[h], c.lower); break;
        case ConstraintSpec::Kind::interval: row[h] = std::clamp(row[h], c.lower, c.upper); break;
        case ConstraintSpec::Kind::variable_upper:
          if (auto it = c.entries.find(h); it != c.entries.end()) {
            row[h] = std::min(row[h], it->second);
          }
          break;
      }
    }
  }
  return ForecastEnsemble(ensemble.num_samples(), horizon, std::move(values));
}

}  // namespace ctxeval
