#include <gtest/gtest.h>

#include <cstring>

#include "ctxeval/kernels.hpp"
#include "ctxeval/random.hpp"

using namespace ctxeval;
using namespace ctxeval::kernels;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

ForecastEnsemble random_ensemble(std::size_t m, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(m * h);
  for (double& x : v) x = rng.normal(3.0, 2.0);
  return ForecastEnsemble(m, h, std::move(v));
}

}  // namespace

TEST(Kernels, ColumnCrpsSerialEqualsParallel) {
  const auto e = random_ensemble(50, 200, 1);
  std::vector<double> truth(200, 2.5);
  EXPECT_TRUE(bit_equal(serial::column_crps(e, truth), parallel::column_crps(e, truth)));
}

TEST(Kernels, CovarianceMatrixSerialEqualsParallel) {
  const auto e = random_ensemble(25, 40, 2);
  std::vector<CrpsMoments> vars;
  for (std::size_t h = 0; h < e.horizon(); ++h) vars.push_back(crps_moments(e.column(h), 1.0));
  const auto s = serial::covariance_matrix(vars);
  EXPECT_TRUE(bit_equal(s, parallel::covariance_matrix(vars)));
  for (std::size_t a = 0; a < 40; ++a)
    for (std::size_t b = 0; b < 40; ++b) EXPECT_EQ(s[a * 40 + b], s[b * 40 + a]);
}

TEST(Kernels, RankSimulationSerialEqualsParallel) {
  RankInputs in;
  in.num_models = 4;
  in.num_tasks = 6;
  Rng rng(3);
  for (std::size_t c = 0; c < 24; ++c) {
    in.mean.push_back(rng.uniform(0, 1));
    in.stderr_.push_back(rng.uniform(0, 0.2));
  }
  in.weights.assign(6, 1.0 / 6);
  const auto s = serial::rank_simulation(in, 2000, 9);
  const auto p = parallel::rank_simulation(in, 2000, 9);
  EXPECT_TRUE(bit_equal(s.rank_mean, p.rank_mean));
  EXPECT_TRUE(bit_equal(s.rank_std, p.rank_std));
  double sum = 0;
  for (double r : s.rank_mean) sum += r;
  EXPECT_NEAR(sum, 1 + 2 + 3 + 4, 1e-9);
}

TEST(Kernels, RankSimulationWithoutNoiseIsExact) {
  RankInputs in{2, 2, {0.1, 0.2, 0.3, 0.4}, {0, 0, 0, 0}, {0.5, 0.5}};
  const auto s = serial::rank_simulation(in, 100, 1);
  EXPECT_DOUBLE_EQ(s.rank_mean[0], 1.0);
  EXPECT_DOUBLE_EQ(s.rank_mean[1], 2.0);
  EXPECT_DOUBLE_EQ(s.rank_std[0], 0.0);
}

TEST(Kernels, RankSimulationRejectsBadShapes) {
  RankInputs in{2, 2, {0.1, 0.2, 0.3}, {0, 0, 0, 0}, {0.5, 0.5}};
  EXPECT_THROW(serial::rank_simulation(in, 10, 1), std::invalid_argument);
}

TEST(MidpointRanks, HandlesTies) {
  const std::vector<double> s{3.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(midpoint_ranks(s), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
  const std::vector<double> all{1.0, 1.0, 1.0};
  EXPECT_EQ(midpoint_ranks(all), (std::vector<double>{2.0, 2.0, 2.0}));
}
