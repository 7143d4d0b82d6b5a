#include <benchmark/benchmark.h>

#include "rssd/problems.hpp"
#include "rssd/solver.hpp"

namespace {

using namespace rssd;

void BM_FsvValue(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FsvInstance inst = GenerateFsv(n, 10 * n, 1);
  const auto obj = MakeFsvObjective(inst, 0.8);
  Rng rng = MakeRng(2);
  const Sphere::Point x = Sphere::Random(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(obj.Value(x, 1e-3));
}
BENCHMARK(BM_FsvValue)->Arg(5)->Arg(10)->Arg(20);

void BM_FsvGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FsvInstance inst = GenerateFsv(n, 10 * n, 1);
  const auto obj = MakeFsvObjective(inst, 0.8);
  Rng rng = MakeRng(2);
  const Sphere::Point x = Sphere::Random(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(obj.RiemannianGradient(x, 1e-3));
}
BENCHMARK(BM_FsvGradient)->Arg(5)->Arg(10)->Arg(20);

void BM_OdlValue(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const OdlInstance inst = GenerateOdl(n, 1);
  const auto obj = MakeOdlObjective(inst, 0.001);
  Rng rng = MakeRng(2);
  const Stiefel::Point x = Stiefel::Random(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(obj.Value(x, 1e-3));
}
BENCHMARK(BM_OdlValue)->Arg(10)->Arg(20)->Arg(30);

void BM_OdlGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const OdlInstance inst = GenerateOdl(n, 1);
  const auto obj = MakeOdlObjective(inst, 0.001);
  Rng rng = MakeRng(2);
  const Stiefel::Point x = Stiefel::Random(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(obj.RiemannianGradient(x, 1e-3));
}
BENCHMARK(BM_OdlGradient)->Arg(10)->Arg(20)->Arg(30);

void BM_StiefelRetract(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng = MakeRng(3);
  const Stiefel::Point x = Stiefel::Random(n, rng);
  const auto eta = Stiefel::Project(x, GaussianMatrix(n, n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(Stiefel::Retract(eta, 0.1));
}
BENCHMARK(BM_StiefelRetract)->Arg(10)->Arg(30)->Arg(50);

void BM_StiefelRetractionStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng = MakeRng(3);
  const Stiefel::Point x = Stiefel::Random(n, rng);
  auto eta = Stiefel::Project(x, GaussianMatrix(n, n, rng));
  eta.ambient /= eta.norm();
  for (auto _ : state) benchmark::DoNotOptimize(Stiefel::RetractionStep(eta, 1e-3));
}
BENCHMARK(BM_StiefelRetractionStep)->Arg(10)->Arg(30)->Arg(50);

// one full solve, FSV at (5, 50)
void BM_FsvSolve(benchmark::State& state) {
  const FsvInstance inst = GenerateFsv(5, 50, 4);
  const auto obj = MakeFsvObjective(inst, 0.8);
  SolverConfig config;
  config.record_history = false;
  Rng rng = MakeRng(5);
  const Sphere::Point x0 = Sphere::Random(5, rng);
  for (auto _ : state) {
    auto r = RssdRun(obj, x0, config);
    benchmark::DoNotOptimize(r.f);
  }
}
BENCHMARK(BM_FsvSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
