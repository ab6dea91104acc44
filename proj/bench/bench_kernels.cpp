// OpenMP kernels against their serial references on synthetic data.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "n3pom/baseline.hpp"
#include "n3pom/datagen.hpp"
#include "n3pom/gradients.hpp"
#include "n3pom/monotonicity.hpp"
#include "n3pom/trainer.hpp"

namespace {

using namespace n3pom;

struct Fixture {
  Dataset data;
  Model model;
  std::vector<double> zeta;
  std::vector<std::size_t> all;

  explicit Fixture(std::size_t n) {
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = 7;
    data = generate(spec).data;
    model = init_random(data.dim, data.j_max, 24, 50, Activation::sigmoid, data.max_norm() + 0.01, 3);
    project(model);
    zeta = compute_zeta(data, model.intercept.knots, WeightMode::inv_sqrt_cell);
    all.resize(n);
    std::iota(all.begin(), all.end(), 0);
  }
};

const Fixture& fixture(std::size_t n) {
  static Fixture small(1000), large(20000);
  return n <= 1000 ? small : large;
}

void BM_GradParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grad_loglik(f.model, f.data, f.all, f.zeta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grad_loglik_serial(f.model, f.data, f.all, f.zeta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LoglikParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(full_loglik(f.model, f.data, f.zeta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LoglikSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(full_loglik_serial(f.model, f.data, f.zeta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_GradParallel)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradSerial)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LoglikParallel)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LoglikSerial)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
