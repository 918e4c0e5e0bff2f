#pragma once

// Data-parallel scoring kernels. Every kernel has a serial reference in
// `serial::` and an OpenMP version in `parallel::`; both produce bit-identical
// results because each output element is computed independently.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ctxeval/scoring.hpp"

namespace ctxeval::kernels {

/// Per-variable statistics for the covariance of CRPS estimators: the absolute
/// errors a_n = |x_n - truth|, the pairwise distance matrix D and its row sums.
struct CrpsMoments {
  std::size_t m = 0;
  std::vector<double> abs_err;   // a_n
  std::vector<double> dist;      // D, row-major m x m, zero diagonal
  std::vector<double> row_sum;   // r_n = sum_n' D[n][n']
  double abs_err_sum = 0.0;      // sum_n a_n
  double dist_sum = 0.0;         // sum_n r_n
  /// Weight of the pairwise term: the estimator is A - pair_scale * B / 2
  /// with B the U-statistic mean distance. 1 for PWM/energy, (M-1)/M for the
  /// empirical-distribution CRPS.
  double pair_scale = 1.0;
  /// All samples equal: the estimator is a constant with zero covariance.
  bool degenerate = false;
};

CrpsMoments crps_moments(std::span<const double> samples, double truth,
                         double pair_scale = 1.0);

/// Unbiased covariance estimate between two CRPS estimators built from the
/// same M index-aligned joint draws. Requires M >= 4.
double crps_moment_covariance(const CrpsMoments& i, const CrpsMoments& j);

struct RankInputs {
  std::size_t num_models = 0;
  std::size_t num_tasks = 0;
  std::vector<double> mean;     // model-major: mean[model * num_tasks + task]
  std::vector<double> stderr_;  // same layout
  std::vector<double> weights;  // per task, summing to 1
};

struct RankSummary {
  std::vector<double> rank_mean;
  std::vector<double> rank_std;
};

/// Midpoint ranks (1 = smallest) of `scores`.
std::vector<double> midpoint_ranks(std::span<const double> scores);

namespace serial {
std::vector<double> column_crps(const ForecastEnsemble& ensemble,
                                std::span<const double> truth);
/// Symmetric K x K covariance matrix (row-major) over the given variables.
std::vector<double> covariance_matrix(const std::vector<CrpsMoments>& vars);
RankSummary rank_simulation(const RankInputs& in, std::size_t reps,
                            std::uint64_t master_seed);
}  // namespace serial

namespace parallel {
std::vector<double> column_crps(const ForecastEnsemble& ensemble,
                                std::span<const double> truth);
std::vector<double> covariance_matrix(const std::vector<CrpsMoments>& vars);
RankSummary rank_simulation(const RankInputs& in, std::size_t reps,
                            std::uint64_t master_seed);
}  // namespace parallel

}  // namespace ctxeval::kernels
