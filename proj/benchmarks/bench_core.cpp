#include <benchmark/benchmark.h>

#include "ceo_rd/ceo_rd.hpp"

namespace {

ceo_rd::SourceModel model(int ell) {
  return ceo_rd::validate({1.5, 0.4, ell}, {0.8, 0.05, ell});
}

double mid_distortion(const ceo_rd::SourceModel& m, int k) {
  return 0.5 * (ceo_rd::d_min(m, k) + m.gamma_x());
}

void BM_SolveLambdaQ(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)));
  const int k = m.ell() / 2 + 1;
  const double d = mid_distortion(m, k);
  for (auto _ : state) benchmark::DoNotOptimize(ceo_rd::solve_lambda_q(m, k, d));
}
BENCHMARK(BM_SolveLambdaQ)->Arg(4)->Arg(64)->Arg(4096);

void BM_CheckConditions(benchmark::State& state) {
  const auto m = model(16);
  const double d = mid_distortion(m, 8);
  for (auto _ : state) benchmark::DoNotOptimize(ceo_rd::check_conditions(m, 8, d));
}
BENCHMARK(BM_CheckConditions);

void BM_VerifyKkt(benchmark::State& state) {
  const auto m = model(16);
  const double d = mid_distortion(m, 8);
  const auto p = ceo_rd::select_program(m, 8);
  for (auto _ : state) benchmark::DoNotOptimize(ceo_rd::verify_kkt(m, 8, 8, d, p));
}
BENCHMARK(BM_VerifyKkt);

void BM_SolveNumeric(benchmark::State& state) {
  const auto m = model(16);
  const double d = mid_distortion(m, 8);
  const auto p = ceo_rd::select_program(m, 8);
  for (auto _ : state) benchmark::DoNotOptimize(ceo_rd::solve_numeric(m, 8, 8, d, p));
}
BENCHMARK(BM_SolveNumeric);

void BM_EmpiricalProfile(benchmark::State& state) {
  const auto m = model(6);
  const double q = ceo_rd::solve_lambda_q(m, 2, mid_distortion(m, 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ceo_rd::empirical_profile(m, 2, q, state.range(0), 7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmpiricalProfile)->Arg(1 << 14)->Arg(1 << 18)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
