#include "ctxeval/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ctxeval/random.hpp"

namespace ctxeval::kernels {

namespace {

// Below this many scalar operations the OpenMP fork/join costs more than the
// work itself.
constexpr std::size_t kParallelThreshold = 4096;

}  // namespace

CrpsMoments crps_moments(std::span<const double> samples, double truth,
                         double pair_scale) {
  CrpsMoments mo;
  mo.m = samples.size();
  mo.pair_scale = pair_scale;
  mo.abs_err.resize(mo.m);
  mo.dist.assign(mo.m * mo.m, 0.0);
  mo.row_sum.assign(mo.m, 0.0);
  mo.degenerate = std::all_of(samples.begin(), samples.end(),
                              [&](double x) { return x == samples.front(); });
  for (std::size_t n = 0; n < mo.m; ++n) {
    mo.abs_err[n] = std::abs(samples[n] - truth);
    mo.abs_err_sum += mo.abs_err[n];
    for (std::size_t k = 0; k < mo.m; ++k) {
      const double d = std::abs(samples[n] - samples[k]);
      mo.dist[n * mo.m + k] = d;
      mo.row_sum[n] += d;
    }
    mo.dist_sum += mo.row_sum[n];
  }
  return mo;
}

// Each estimator is C = A - (c/2) B with A = mean_n a_n and B the U-statistic
// mean of |X_n - X_n'| over ordered pairs n != n'. By bilinearity
//   Cov(C_i, C_j) = Cov(A_i, A_j) - (c_j/2) Cov(A_i, B_j)
//                   - (c_i/2) Cov(B_i, A_j) + (c_i c_j / 4) Cov(B_i, B_j),
// with the population identities
//   Cov(A_i, A_j) = (E[a_i a_j] - E a_i E a_j) / M
//   Cov(A_i, B_j) = 2 (E[a_i(X) |X_j - X'_j|] - E a_i E b_j) / M
//   Cov(B_i, B_j) = (2 (R - E b_i E b_j) + 4 (M - 2) (S - E b_i E b_j)) / (M (M - 1))
// where R pairs the same two draws and S shares exactly one draw. Every
// expectation (including products of independent expectations) is replaced
// by its unbiased U-statistic over distinct draw indices.
double crps_moment_covariance(const CrpsMoments& i, const CrpsMoments& j) {
  if (i.m != j.m) throw std::invalid_argument("moment sets differ in M");
  if (i.m < 4) throw std::invalid_argument("covariance estimate needs M >= 4");
  if (i.degenerate || j.degenerate) return 0.0;

  const std::size_t m = i.m;
  const auto M = static_cast<double>(m);
  const double m2 = M * (M - 1.0);
  const double m3 = m2 * (M - 2.0);
  const double m4 = m3 * (M - 3.0);

  double aa = 0.0;   // sum a_i a_j (same draw)
  double a_r = 0.0;  // sum a_i[n] r_j[n]
  double r_a = 0.0;  // sum r_i[n] a_j[n]
  double rr = 0.0;   // sum r_i[n] r_j[n]
  double dd = 0.0;   // sum D_i[n][k] D_j[n][k]
  for (std::size_t n = 0; n < m; ++n) {
    aa += i.abs_err[n] * j.abs_err[n];
    a_r += i.abs_err[n] * j.row_sum[n];
    r_a += i.row_sum[n] * j.abs_err[n];
    rr += i.row_sum[n] * j.row_sum[n];
    const double* di = i.dist.data() + n * m;
    const double* dj = j.dist.data() + n * m;
    for (std::size_t k = 0; k < m; ++k) dd += di[k] * dj[k];
  }

  const double e_aa = aa / M;
  const double e_a_a = (i.abs_err_sum * j.abs_err_sum - aa) / m2;
  const double q_ij = a_r / m2;
  const double q_ji = r_a / m2;
  const double e_a_b = (i.abs_err_sum * j.dist_sum - 2.0 * a_r) / m3;
  const double e_b_a = (i.dist_sum * j.abs_err_sum - 2.0 * r_a) / m3;
  const double r_same = dd / m2;
  const double s_shared = (rr - dd) / m3;
  const double e_b_b = (i.dist_sum * j.dist_sum - 4.0 * rr + 2.0 * dd) / m4;

  const double cov_aa = (e_aa - e_a_a) / M;
  const double cov_ab = 2.0 * (q_ij - e_a_b) / M;
  const double cov_ba = 2.0 * (q_ji - e_b_a) / M;
  const double cov_bb =
      (2.0 * (r_same - e_b_b) + 4.0 * (M - 2.0) * (s_shared - e_b_b)) / m2;

  return cov_aa - 0.5 * j.pair_scale * cov_ab - 0.5 * i.pair_scale * cov_ba +
         0.25 * i.pair_scale * j.pair_scale * cov_bb;
}

std::vector<double> midpoint_ranks(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(n);
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    // Positions lo..hi-1 share the midpoint of ranks lo+1..hi.
    const double r = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) ranks[order[k]] = r;
    lo = hi;
  }
  return ranks;
}

namespace {

void check_rank_inputs(const RankInputs& in) {
  const std::size_t cells = in.num_models * in.num_tasks;
  if (in.mean.size() != cells || in.stderr_.size() != cells ||
      in.weights.size() != in.num_tasks) {
    throw std::invalid_argument("rank simulation inputs have inconsistent sizes");
  }
}

// One repetition: draw every (model, task) score and return the weighted
// average rank of each model. The stream depends only on (seed, rep).
void simulate_rep(const RankInputs& in, std::uint64_t master_seed, std::size_t rep,
                  double* out_ranks) {
  Rng rng(SeedSequence(master_seed).with("rank-simulation").with(rep).value());
  std::vector<double> draws(in.num_models * in.num_tasks);
  for (std::size_t c = 0; c < draws.size(); ++c) {
    draws[c] = in.mean[c] + in.stderr_[c] * rng.normal();
  }
  std::fill(out_ranks, out_ranks + in.num_models, 0.0);
  std::vector<double> column(in.num_models);
  for (std::size_t t = 0; t < in.num_tasks; ++t) {
    for (std::size_t k = 0; k < in.num_models; ++k) {
      column[k] = draws[k * in.num_tasks + t];
    }
    const auto ranks = midpoint_ranks(column);
    for (std::size_t k = 0; k < in.num_models; ++k) {
      out_ranks[k] += in.weights[t] * ranks[k];
    }
  }
}

RankSummary summarize_reps(const RankInputs& in, const std::vector<double>& per_rep,
                           std::size_t reps) {
  RankSummary s;
  s.rank_mean.assign(in.num_models, 0.0);
  s.rank_std.assign(in.num_models, 0.0);
  for (std::size_t k = 0; k < in.num_models; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) sum += per_rep[r * in.num_models + k];
    const double mean = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double d = per_rep[r * in.num_models + k] - mean;
      ss += d * d;
    }
    s.rank_mean[k] = mean;
    s.rank_std[k] = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
  }
  return s;
}

}  // namespace

namespace serial {

std::vector<double> column_crps(const ForecastEnsemble& ensemble,
                                std::span<const double> truth) {
  std::vector<double> out(ensemble.horizon());
  for (std::size_t h = 0; h < out.size(); ++h) {
    out[h] = crps_pwm(ensemble.column(h), truth[h]);
  }
  return out;
}

std::vector<double> covariance_matrix(const std::vector<CrpsMoments>& vars) {
  const std::size_t k = vars.size();
  std::vector<double> cov(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      cov[a * k + b] = cov[b * k + a] = crps_moment_covariance(vars[a], vars[b]);
    }
  }
  return cov;
}

RankSummary rank_simulation(const RankInputs& in, std::size_t reps,
                            std::uint64_t master_seed) {
  check_rank_inputs(in);
  std::vector<double> per_rep(reps * in.num_models);
  for (std::size_t r = 0; r < reps; ++r) {
    simulate_rep(in, master_seed, r, per_rep.data() + r * in.num_models);
  }
  return summarize_reps(in, per_rep, reps);
}

}  // namespace serial

namespace parallel {

std::vector<double> column_crps(const ForecastEnsemble& ensemble,
                                std::span<const double> truth) {
  const std::size_t horizon = ensemble.horizon();
  std::vector<double> out(horizon);
  const bool big = horizon * ensemble.num_samples() >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::size_t h = 0; h < horizon; ++h) {
    out[h] = crps_pwm(ensemble.column(h), truth[h]);
  }
  return out;
}

std::vector<double> covariance_matrix(const std::vector<CrpsMoments>& vars) {
  const std::size_t k = vars.size();
  std::vector<double> cov(k * k);
  const std::size_t m = vars.empty() ? 0 : vars.front().m;
  const bool big = k * k * m * m / 2 >= kParallelThreshold;
  // Upper triangle rows have unequal lengths, so hand them out dynamically.
#pragma omp parallel for schedule(dynamic, 1) if (big)
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      cov[a * k + b] = cov[b * k + a] = crps_moment_covariance(vars[a], vars[b]);
    }
  }
  return cov;
}

RankSummary rank_simulation(const RankInputs& in, std::size_t reps,
                            std::uint64_t master_seed) {
  check_rank_inputs(in);
  std::vector<double> per_rep(reps * in.num_models);
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < reps; ++r) {
    simulate_rep(in, master_seed, r, per_rep.data() + r * in.num_models);
  }
  return summarize_reps(in, per_rep, reps);
}

}  // namespace parallel

}  // namespace ctxeval::kernels
