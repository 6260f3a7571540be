#include <benchmark/benchmark.h>

#include "mddlab/complexity.hpp"
#include "mddlab/discrepancy.hpp"
#include "mddlab/trainer.hpp"

using namespace mddlab;

namespace {

Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_MddScan(benchmark::State& state) {
  const auto members = static_cast<std::size_t>(state.range(0));
  const auto P = make_moons(400, 0.1, 1);
  const auto Q = apply_shift(make_moons(400, 0.1, 2), ShiftTransform::rotation_about(0.5, 0.5, 0.25));
  const auto F = linear_probe_class(2, 2, members, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mdd(F[0], F, P, Q, 1.0).value);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(members));
}
BENCHMARK(BM_MddScan)->Arg(16)->Arg(128)->Arg(512);

void BM_RademacherExhaustive(benchmark::State& state) {
  Rng rng(4);
  const FunctionValueMatrix M{gaussian(rng, 32, state.range(0)), {}};
  for (auto _ : state) benchmark::DoNotOptimize(empirical_rademacher(M, kExhaustive, 0).estimate);
}
BENCHMARK(BM_RademacherExhaustive)->Arg(10)->Arg(14)->Arg(18);

void BM_RademacherMonteCarlo(benchmark::State& state) {
  Rng rng(5);
  const FunctionValueMatrix M{gaussian(rng, 256, 100), {}};
  for (auto _ : state)
    benchmark::DoNotOptimize(empirical_rademacher(M, static_cast<std::size_t>(state.range(0)), 1).estimate);
}
BENCHMARK(BM_RademacherMonteCarlo)->Arg(1000)->Arg(10000);

void BM_GreedyCover(benchmark::State& state) {
  Rng rng(6);
  const FunctionValueMatrix M{gaussian(rng, state.range(0), 64), {}};
  for (auto _ : state) benchmark::DoNotOptimize(GreedyCover(M).count(0.5));
}
BENCHMARK(BM_GreedyCover)->Arg(64)->Arg(512);

void BM_TrainStep(benchmark::State& state) {
  TrainConfig c;
  c.batch_size = static_cast<std::size_t>(state.range(0));
  auto models = init_models(c, 2, 2);
  auto opt = init_optimizers(models, c);
  Rng rng(7);
  const Matrix xs = gaussian(rng, state.range(0), 2);
  const Matrix xt = gaussian(rng, state.range(0), 2);
  std::vector<int> ys(c.batch_size);
  for (auto& y : ys) y = static_cast<int>(rng.below(2));
  std::size_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(models, opt, xs, ys, xt, c, step++ % c.steps));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
