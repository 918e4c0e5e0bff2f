// Serial reference kernels against their OpenMP counterparts.
//   ./ctxeval_bench --benchmark_filter=Covariance

#include <benchmark/benchmark.h>

#include "ctxeval/kernels.hpp"
#include "ctxeval/random.hpp"

using namespace ctxeval;
using namespace ctxeval::kernels;

namespace {

ForecastEnsemble make_ensemble(std::size_t m, std::size_t h) {
  Rng rng(17);
  std::vector<double> v(m * h);
  for (double& x : v) x = rng.normal(10.0, 3.0);
  return ForecastEnsemble(m, h, std::move(v));
}

std::vector<CrpsMoments> make_moments(std::size_t m, std::size_t h) {
  const auto e = make_ensemble(m, h);
  std::vector<CrpsMoments> vars;
  for (std::size_t k = 0; k < h; ++k) vars.push_back(crps_moments(e.column(k), 10.0));
  return vars;
}

RankInputs make_rank_inputs(std::size_t models, std::size_t tasks) {
  RankInputs in;
  in.num_models = models;
  in.num_tasks = tasks;
  Rng rng(5);
  for (std::size_t c = 0; c < models * tasks; ++c) {
    in.mean.push_back(rng.uniform(0.0, 1.0));
    in.stderr_.push_back(rng.uniform(0.0, 0.1));
  }
  in.weights.assign(tasks, 1.0 / static_cast<double>(tasks));
  return in;
}

template <auto Fn>
void BM_ColumnCrps(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const auto e = make_ensemble(25, h);
  const std::vector<double> truth(h, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(e, truth));
}

template <auto Fn>
void BM_Covariance(benchmark::State& state) {
  const auto vars = make_moments(25, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(vars));
}

template <auto Fn>
void BM_RankSimulation(benchmark::State& state) {
  const auto in = make_rank_inputs(20, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(in, 10000, 1));
}

}  // namespace

BENCHMARK(BM_ColumnCrps<serial::column_crps>)->Arg(64)->Arg(1024);
BENCHMARK(BM_ColumnCrps<parallel::column_crps>)->Arg(64)->Arg(1024);
BENCHMARK(BM_Covariance<serial::covariance_matrix>)->Arg(32)->Arg(128);
BENCHMARK(BM_Covariance<parallel::covariance_matrix>)->Arg(32)->Arg(128);
BENCHMARK(BM_RankSimulation<serial::rank_simulation>)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RankSimulation<parallel::rank_simulation>)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
