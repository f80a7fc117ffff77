// Kernel throughput against batch width on a desk-scale heterogeneous case.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "ddlab/oras.hpp"
#include "ddlab/osm.hpp"
#include "ddlab/scenario.hpp"

using namespace ddlab;

namespace {

struct Fixture {
  std::unique_ptr<Problem> problem;
  std::unique_ptr<Factorization> factor;
  std::unique_ptr<OrasContext> oras;
  std::unique_ptr<OsmContext> osm;
};

Fixture& fixture() {
  static Fixture f = [] {
    ProblemSpec s;
    s.model = "mini_subduction";
    s.order = 3;
    s.frequency = 6.0;
    s.subdomains = 8;
    Fixture out;
    out.problem = std::make_unique<Problem>(s);
    const Problem& p = *out.problem;
    out.factor = std::make_unique<Factorization>(factorize(p.a()));
    out.oras = std::make_unique<OrasContext>(
        build_oras(p.mesh(), p.dofs(), p.overlap(), p.k(), TransmissionParams::second(1.0, -0.5), p.a()));
    out.osm = std::make_unique<OsmContext>(
        build_osm(p.mesh(), p.dofs(), p.partition(), p.k(), TransmissionParams::second(0.5, Complex(0.35, 0.35))));
    return out;
  }();
  return f;
}

MultiVector random_block(Index rows, Index cols) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  MultiVector m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

void set_rate(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["rhs"] = static_cast<double>(state.range(0));
}

void BM_spmm(benchmark::State& state) {
  const auto& f = fixture();
  const MultiVector x = random_block(f.problem->a().cols(), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spmm(f.problem->a(), x));
  set_rate(state);
}

void BM_solve_batch(benchmark::State& state) {
  const auto& f = fixture();
  const MultiVector b = random_block(f.problem->a().rows(), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_batch(*f.factor, b));
  set_rate(state);
}

void BM_apply_oras(benchmark::State& state) {
  const auto& f = fixture();
  const MultiVector v = random_block(f.oras->size, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_oras(*f.oras, v));
  set_rate(state);
}

void BM_apply_IminusT(benchmark::State& state) {
  const auto& f = fixture();
  const MultiVector g = random_block(f.osm->layout.size(), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_IminusT(*f.osm, g));
  set_rate(state);
}

}  // namespace

BENCHMARK(BM_spmm)->RangeMultiplier(2)->Range(1, 64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_solve_batch)->RangeMultiplier(2)->Range(1, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_oras)->RangeMultiplier(2)->Range(1, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_IminusT)->RangeMultiplier(2)->Range(1, 64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
