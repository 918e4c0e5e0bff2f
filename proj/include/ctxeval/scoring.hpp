#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace ctxeval {

/// M sample trajectories over an H-step horizon, stored row-major (one row per
/// trajectory). M >= 2 and every entry is finite.
class ForecastEnsemble {
 public:
  ForecastEnsemble(std::size_t num_samples, std::size_t horizon,
                   std::vector<double> values);
  explicit ForecastEnsemble(const std::vector<std::vector<double>>& trajectories);

  /// `trajectory` replicated `num_samples` times.
  static ForecastEnsemble replicate(std::span<const double> trajectory,
                                    std::size_t num_samples);

  [[nodiscard]] std::size_t num_samples() const { return num_samples_; }
  [[nodiscard]] std::size_t horizon() const { return horizon_; }

  [[nodiscard]] std::span<const double> trajectory(std::size_t m) const {
    return {values_.data() + m * horizon_, horizon_};
  }
  [[nodiscard]] double at(std::size_t m, std::size_t h) const {
    return values_[m * horizon_ + h];
  }
  /// Samples of step h, one per trajectory.
  [[nodiscard]] std::vector<double> column(std::size_t h) const;
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] std::vector<std::vector<double>> rows() const;

  friend bool operator==(const ForecastEnsemble&,
                         const ForecastEnsemble&) = default;

 private:
  std::size_t num_samples_;
  std::size_t horizon_;
  std::vector<double> values_;
};

/// Machine-readable form of a verbalized constraint.
struct ConstraintSpec {
  enum class Kind { none, upper, lower, interval, variable_upper };

  Kind kind = Kind::none;
  double lower = 0.0;
  double upper = 0.0;
  /// step index -> upper bound, for Kind::variable_upper.
  std::map<std::size_t, double> entries;

  static ConstraintSpec none_spec() { return {}; }
  static ConstraintSpec upper_bound(double tau);
  static ConstraintSpec lower_bound(double tau);
  static ConstraintSpec interval_bounds(double lo, double hi);
  static ConstraintSpec variable_upper_bounds(std::map<std::size_t, double> e);

  /// Throws std::invalid_argument when the spec cannot apply to `horizon`.
  void validate(std::size_t horizon) const;

  /// Image of the spec under x -> a*x + b with a > 0.
  [[nodiscard]] ConstraintSpec transformed(double a, double b) const;

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

/// Estimator used for the constraint term CRPS(v(X), 0).
enum class ConstraintEstimator {
  /// CRPS of the empirical ensemble distribution; zero iff every v = 0.
  empirical,
  /// Unbiased probability-weighted-moment estimator, as for the per-step terms.
  pwm,
};

struct ScoringConfig {
  double beta = 10.0;
  double clip_threshold = 5.0;
  double alpha = 1.0;
  ConstraintEstimator constraint_estimator = ConstraintEstimator::empirical;

  void validate() const;
};

struct ScoreRecord {
  double rcrps = 0.0;
  double rcrps_clipped = 0.0;
  double term_roi = 0.0;
  double term_non_roi = 0.0;
  double term_constraint = 0.0;
  double variance = 0.0;
  bool significant_failure = false;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

using RegionOfInterest = std::vector<std::size_t>;

double crps_pwm(std::span<const double> samples, double truth);
double crps_energy(std::span<const double> samples, double truth);
/// CRPS of the empirical distribution of `samples` (biased V-statistic form).
double crps_empirical(std::span<const double> samples, double truth);

double constraint_violation(const ConstraintSpec& spec,
                            std::span<const double> trajectory);
/// v(trajectory) for every trajectory of the ensemble.
std::vector<double> constraint_violations(const ForecastEnsemble& ensemble,
                                          const ConstraintSpec& spec);

double tw_crps_constraint(
    const ForecastEnsemble& ensemble, const ConstraintSpec& spec,
    ConstraintEstimator estimator = ConstraintEstimator::empirical);

/// Inverse mean range of the calibration futures. Throws CalibrationError when
/// the mean range is zero.
double calibrate_alpha(const std::vector<std::vector<double>>& calibration_futures);

ScoreRecord rcrps(const ForecastEnsemble& ensemble, std::span<const double> truth,
                  const RegionOfInterest& roi, const ConstraintSpec& spec,
                  const ScoringConfig& config);

/// Unbiased estimate of Cov(CRPS_i, CRPS_j) for the energy/PWM estimator, from
/// M >= 4 index-aligned joint draws.
double crps_covariance(std::span<const double> samples_i,
                       std::span<const double> samples_j, double truth_i,
                       double truth_j);

/// Sampling variance of rcrps, clipped at 0.
double rcrps_variance(const ForecastEnsemble& ensemble,
                      std::span<const double> truth, const RegionOfInterest& roi,
                      const ConstraintSpec& spec, const ScoringConfig& config);

/// Applies clip_threshold to a raw score.
ScoreRecord finalize_score(ScoreRecord record, double clip_threshold);

}  // namespace ctxeval
