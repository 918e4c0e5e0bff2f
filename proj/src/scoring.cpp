#include "ctxeval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "ctxeval/errors.hpp"
#include "ctxeval/kernels.hpp"

namespace ctxeval {

namespace {

void check_samples(std::span<const double> samples, double truth) {
  if (samples.size() < 2) {
    throw std::invalid_argument("CRPS estimators need M >= 2 samples, got " +
                                std::to_string(samples.size()));
  }
  if (!std::isfinite(truth)) throw std::invalid_argument("non-finite truth");
  for (double x : samples) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite sample");
  }
}

double mean_abs_error(std::span<const double> samples, double truth) {
  double s = 0.0;
  for (double x : samples) s += std::abs(x - truth);
  return s / static_cast<double>(samples.size());
}

double pairwise_abs_sum(std::span<const double> samples) {
  double s = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    for (std::size_t k = n + 1; k < samples.size(); ++k) {
      s += std::abs(samples[n] - samples[k]);
    }
  }
  return 2.0 * s;
}

}  // namespace

ForecastEnsemble::ForecastEnsemble(std::size_t num_samples, std::size_t horizon,
                                   std::vector<double> values)
    : num_samples_(num_samples), horizon_(horizon), values_(std::move(values)) {
  if (num_samples_ < 2) {
    throw std::invalid_argument("ensemble needs M >= 2 trajectories, got " +
                                std::to_string(num_samples_));
  }
  if (horizon_ == 0) throw std::invalid_argument("ensemble horizon must be >= 1");
  if (values_.size() != num_samples_ * horizon_) {
    throw std::invalid_argument("ensemble value count does not match M x H");
  }
  for (double x : values_) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite ensemble value");
  }
}

namespace {
std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  const std::size_t h = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != h) {
      throw std::invalid_argument("ragged ensemble: trajectories differ in length");
    }
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}
}  // namespace

ForecastEnsemble::ForecastEnsemble(const std::vector<std::vector<double>>& rows)
    : ForecastEnsemble(rows.size(), rows.empty() ? 0 : rows.front().size(),
                       flatten(rows)) {}

ForecastEnsemble ForecastEnsemble::replicate(std::span<const double> trajectory,
                                             std::size_t num_samples) {
  std::vector<double> v;
  v.reserve(trajectory.size() * num_samples);
  for (std::size_t m = 0; m < num_samples; ++m) {
    v.insert(v.end(), trajectory.begin(), trajectory.end());
  }
  return ForecastEnsemble(num_samples, trajectory.size(), std::move(v));
}

std::vector<double> ForecastEnsemble::column(std::size_t h) const {
  std::vector<double> out(num_samples_);
  for (std::size_t m = 0; m < num_samples_; ++m) out[m] = at(m, h);
  return out;
}

std::vector<std::vector<double>> ForecastEnsemble::rows() const {
  std::vector<std::vector<double>> out;
  out.reserve(num_samples_);
  for (std::size_t m = 0; m < num_samples_; ++m) {
    auto t = trajectory(m);
    out.emplace_back(t.begin(), t.end());
  }
  return out;
}

ConstraintSpec ConstraintSpec::upper_bound(double tau) {
  ConstraintSpec s;
  s.kind = Kind::upper;
  s.upper = tau;
  return s;
}

ConstraintSpec ConstraintSpec::lower_bound(double tau) {
  ConstraintSpec s;
  s.kind = Kind::lower;
  s.lower = tau;
  return s;
}

ConstraintSpec ConstraintSpec::interval_bounds(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("interval requires lower <= upper");
  ConstraintSpec s;
  s.kind = Kind::interval;
  s.lower = lo;
  s.upper = hi;
  return s;
}

ConstraintSpec ConstraintSpec::variable_upper_bounds(std::map<std::size_t, double> e) {
  if (e.empty()) throw std::invalid_argument("variable_upper needs a non-empty index set");
  ConstraintSpec s;
  s.kind = Kind::variable_upper;
  s.entries = std::move(e);
  return s;
}

void ConstraintSpec::validate(std::size_t horizon) const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::upper:
      if (!std::isfinite(upper)) throw std::invalid_argument("non-finite upper bound");
      return;
    case Kind::lower:
      if (!std::isfinite(lower)) throw std::invalid_argument("non-finite lower bound");
      return;
    case Kind::interval:
      if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper) {
        throw std::invalid_argument("interval requires finite lower <= upper");
      }
      return;
    case Kind::variable_upper:
      if (entries.empty()) {
        throw std::invalid_argument("variable_upper needs a non-empty index set");
      }
      for (const auto& [i, tau] : entries) {
        if (i >= horizon) {
          throw std::invalid_argument("variable_upper index " + std::to_string(i) +
                                      " outside horizon " + std::to_string(horizon));
        }
        if (!std::isfinite(tau)) throw std::invalid_argument("non-finite bound");
      }
      return;
  }
}

ConstraintSpec ConstraintSpec::transformed(double a, double b) const {
  if (!(a > 0.0)) throw std::invalid_argument("constraint transform needs a > 0");
  ConstraintSpec out = *this;
  out.lower = a * lower + b;
  out.upper = a * upper + b;
  for (auto& [i, tau] : out.entries) tau = a * tau + b;
  return out;
}

void ScoringConfig::validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(clip_threshold > 0.0)) throw std::invalid_argument("clip_threshold must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be finite and > 0");
  }
}

double crps_pwm(std::span<const double> samples, double truth) {
  check_samples(samples, truth);
  std::vector<double> x(samples.begin(), samples.end());
  std::stable_sort(x.begin(), x.end());
  const auto m = static_cast<double>(x.size());
  // (1/M) sum x_n - 2/(M(M-1)) sum (n-1) x_n, rewritten with zero-sum
  // coefficients (M + 1 - 2n) about the minimum so that constant samples give
  // exactly 0.
  double spread = 0.0;
  for (std::size_t n = 1; n <= x.size(); ++n) {
    spread += (m + 1.0 - 2.0 * static_cast<double>(n)) * (x[n - 1] - x.front());
  }
  return mean_abs_error(x, truth) + spread / (m * (m - 1.0));
}

double crps_energy(std::span<const double> samples, double truth) {
  check_samples(samples, truth);
  const auto m = static_cast<double>(samples.size());
  return mean_abs_error(samples, truth) -
         pairwise_abs_sum(samples) / (2.0 * m * (m - 1.0));
}

double crps_empirical(std::span<const double> samples, double truth) {
  check_samples(samples, truth);
  const auto m = static_cast<double>(samples.size());
  return mean_abs_error(samples, truth) - pairwise_abs_sum(samples) / (2.0 * m * m);
}

double constraint_violation(const ConstraintSpec& spec,
                            std::span<const double> trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  spec.validate(trajectory.size());
  const auto h = static_cast<double>(trajectory.size());
  double s = 0.0;
  switch (spec.kind) {
    case ConstraintSpec::Kind::none:
      return 0.0;
    case ConstraintSpec::Kind::upper:
      for (double x : trajectory) s += std::max(0.0, x - spec.upper);
      return s / h;
    case ConstraintSpec::Kind::lower:
      for (double x : trajectory) s += std::max(0.0, spec.lower - x);
      return s / h;
    case ConstraintSpec::Kind::interval:
      for (double x : trajectory) {
        s += std::max(0.0, spec.lower - x) + std::max(0.0, x - spec.upper);
      }
      return s / h;
    case ConstraintSpec::Kind::variable_upper:
      for (const auto& [i, tau] : spec.entries) s += std::max(0.0, trajectory[i] - tau);
      return s / static_cast<double>(spec.entries.size());
  }
  return 0.0;
}

std::vector<double> constraint_violations(const ForecastEnsemble& ensemble,
                                          const ConstraintSpec& spec) {
  std::vector<double> v(ensemble.num_samples());
  for (std::size_t m = 0; m < v.size(); ++m) {
    v[m] = constraint_violation(spec, ensemble.trajectory(m));
  }
  return v;
}

double tw_crps_constraint(const ForecastEnsemble& ensemble,
                          const ConstraintSpec& spec,
                          ConstraintEstimator estimator) {
  if (spec.kind == ConstraintSpec::Kind::none) return 0.0;
  const auto v = constraint_violations(ensemble, spec);
  return estimator == ConstraintEstimator::pwm ? crps_pwm(v, 0.0)
                                               : crps_empirical(v, 0.0);
}

double calibrate_alpha(const std::vector<std::vector<double>>& calibration_futures) {
  if (calibration_futures.empty()) {
    throw std::invalid_argument("alpha calibration needs at least one future");
  }
  double total = 0.0;
  for (const auto& f : calibration_futures) {
    if (f.empty()) throw std::invalid_argument("empty calibration future");
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    total += *hi - *lo;
  }
  const double mean_range = total / static_cast<double>(calibration_futures.size());
  if (!(mean_range > 0.0) || !std::isfinite(mean_range)) {
    throw CalibrationError("calibration futures have zero mean range; alpha undefined");
  }
  return 1.0 / mean_range;
}

namespace {

struct StepWeights {
  std::vector<double> w;  // per step, excluding alpha
  bool split = false;     // true when 0 < |I| < H
  std::vector<bool> in_roi;
};

StepWeights step_weights(std::size_t horizon, const RegionOfInterest& roi) {
  StepWeights out;
  out.in_roi.assign(horizon, false);
  for (std::size_t i : roi) {
    if (i >= horizon) {
      throw std::invalid_argument("RoI index " + std::to_string(i) +
                                  " outside horizon " + std::to_string(horizon));
    }
    if (out.in_roi[i]) {
      throw std::invalid_argument("duplicate RoI index " + std::to_string(i));
    }
    out.in_roi[i] = true;
  }
  const std::size_t n_roi = roi.size();
  out.w.assign(horizon, 1.0 / static_cast<double>(horizon));
  if (n_roi > 0 && n_roi < horizon) {
    out.split = true;
    const double w_in = 1.0 / (2.0 * static_cast<double>(n_roi));
    const double w_out = 1.0 / (2.0 * static_cast<double>(horizon - n_roi));
    for (std::size_t i = 0; i < horizon; ++i) out.w[i] = out.in_roi[i] ? w_in : w_out;
  }
  return out;
}

void check_dims(const ForecastEnsemble& ensemble, std::span<const double> truth,
                const ConstraintSpec& spec, const ScoringConfig& config) {
  if (ensemble.horizon() != truth.size()) {
    throw std::invalid_argument("ensemble horizon " +
                                std::to_string(ensemble.horizon()) +
                                " does not match truth length " +
                                std::to_string(truth.size()));
  }
  for (double x : truth) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite truth value");
  }
  spec.validate(truth.size());
  config.validate();
}

}  // namespace

ScoreRecord finalize_score(ScoreRecord record, double clip_threshold) {
  record.rcrps_clipped = std::min(record.rcrps, clip_threshold);
  record.significant_failure = record.rcrps > clip_threshold;
  return record;
}

ScoreRecord rcrps(const ForecastEnsemble& ensemble, std::span<const double> truth,
                  const RegionOfInterest& roi, const ConstraintSpec& spec,
                  const ScoringConfig& config) {
  check_dims(ensemble, truth, spec, config);
  const StepWeights sw = step_weights(truth.size(), roi);
  const std::vector<double> crps = kernels::parallel::column_crps(ensemble, truth);

  double roi_sum = 0.0, rest_sum = 0.0;
  for (std::size_t i = 0; i < crps.size(); ++i) {
    if (sw.split && sw.in_roi[i]) {
      roi_sum += crps[i];
    } else {
      rest_sum += crps[i];
    }
  }
  ScoreRecord r;
  if (sw.split) {
    r.term_roi = config.alpha * roi_sum / (2.0 * static_cast<double>(roi.size()));
    r.term_non_roi = config.alpha * rest_sum /
                     (2.0 * static_cast<double>(truth.size() - roi.size()));
  } else {
    r.term_non_roi = config.alpha * rest_sum / static_cast<double>(truth.size());
  }
  r.term_constraint =
      config.alpha * config.beta *
      tw_crps_constraint(ensemble, spec, config.constraint_estimator);
  r.rcrps = r.term_roi + r.term_non_roi + r.term_constraint;
  return finalize_score(r, config.clip_threshold);
}

double crps_covariance(std::span<const double> samples_i,
                       std::span<const double> samples_j, double truth_i,
                       double truth_j) {
  if (samples_i.size() != samples_j.size()) {
    throw std::invalid_argument("covariance needs index-aligned samples of equal length");
  }
  if (samples_i.size() < 4) {
    throw std::invalid_argument("covariance estimate needs M >= 4 joint draws");
  }
  return kernels::crps_moment_covariance(kernels::crps_moments(samples_i, truth_i),
                                         kernels::crps_moments(samples_j, truth_j));
}

double rcrps_variance(const ForecastEnsemble& ensemble,
                      std::span<const double> truth, const RegionOfInterest& roi,
                      const ConstraintSpec& spec, const ScoringConfig& config) {
  check_dims(ensemble, truth, spec, config);
  if (ensemble.num_samples() < 4) {
    throw std::invalid_argument("rcrps_variance needs M >= 4 trajectories");
  }
  const StepWeights sw = step_weights(truth.size(), roi);

  std::vector<kernels::CrpsMoments> vars;
  std::vector<double> weights;
  vars.reserve(truth.size() + 1);
  for (std::size_t h = 0; h < truth.size(); ++h) {
    vars.push_back(kernels::crps_moments(ensemble.column(h), truth[h]));
    weights.push_back(config.alpha * sw.w[h]);
  }
  if (spec.kind != ConstraintSpec::Kind::none && config.beta > 0.0) {
    const auto m = static_cast<double>(ensemble.num_samples());
    const double scale =
        config.constraint_estimator == ConstraintEstimator::empirical ? (m - 1.0) / m
                                                                      : 1.0;
    vars.push_back(
        kernels::crps_moments(constraint_violations(ensemble, spec), 0.0, scale));
    weights.push_back(config.alpha * config.beta);
  }

  const std::vector<double> cov = kernels::parallel::covariance_matrix(vars);
  const std::size_t k = vars.size();
  double var = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < k; ++b) row += weights[b] * cov[a * k + b];
    var += weights[a] * row;
  }
  return std::max(0.0, var);
}

}  // namespace ctxeval
