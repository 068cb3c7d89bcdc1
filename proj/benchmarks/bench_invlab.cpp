#include <benchmark/benchmark.h>

#include "invlab/invlab.hpp"

namespace {

using namespace invlab;

const Box kSquare{2, {-1.5, -1.5}, {1.5, 1.5}};

void BM_Assemble(benchmark::State& state) {
  const Grid grid(kSquare, 1.0 / static_cast<double>(state.range(0)));
  const CoefficientField field = fields::rotation();
  for (auto _ : state) benchmark::DoNotOptimize(assemble(field, grid));
  state.counters["unknowns"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_Assemble)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

// Ten Crank-Nicolson steps; includes the preconditioner setup.
void BM_Evolve(benchmark::State& state) {
  const Grid grid(kSquare, 1.0 / static_cast<double>(state.range(0)));
  const DiscreteOperator op = assemble(fields::rotation(), grid);
  const GridFunction u0 = grid.sample(functions::bump(2, {0.5, 0.0}, 0.4).value);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(op, u0, 0.25, 0.025, Scheme::crank_nicolson));
}
BENCHMARK(BM_Evolve)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FlowMap(benchmark::State& state) {
  const FlowMap flow(make_row_field(fields::rotation(), 1), Box{2, {-1.0, -1.0}, {1.0, 1.0}});
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flow({0.3, 0.4}, t));
}
BENCHMARK(BM_FlowMap)->Arg(1)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_Escape(benchmark::State& state) {
  const DomainGeometry disc = domains::disc();
  const FlowMap flow(make_row_field(fields::rotation(), 1), disc.bounding_box());
  for (auto _ : state) benchmark::DoNotOptimize(escape_fraction(flow, disc, 200, 1.0, 0));
}
BENCHMARK(BM_Escape)->Unit(benchmark::kMillisecond);

// range(0): inverse spacing, range(1): mollifier index n.
void BM_Convolve(benchmark::State& state) {
  const Grid grid(Box{2, {0.0, 0.0}, {1.0, 1.0}}, 1.0 / static_cast<double>(state.range(0)));
  const Mollifier mol = Mollifier::standard(2);
  const DiscreteKernel kernel = mol.discretise(grid, static_cast<int>(state.range(1)));
  const GridFunction f = grid.sample(functions::bump(2, {0.5, 0.5}, 0.25).value);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(grid, kernel, f));
}
BENCHMARK(BM_Convolve)->Args({256, 8})->Args({256, 32})->Args({512, 8})->Args({512, 64})->Unit(benchmark::kMillisecond);

void BM_ConvolveDirect(benchmark::State& state) {
  const Grid grid(Box{2, {0.0, 0.0}, {1.0, 1.0}}, 1.0 / static_cast<double>(state.range(0)));
  const Mollifier mol = Mollifier::standard(2);
  const DiscreteKernel kernel = mol.discretise(grid, static_cast<int>(state.range(1)));
  const GridFunction f = grid.sample(functions::bump(2, {0.5, 0.5}, 0.25).value);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_direct(grid, kernel, f));
}
BENCHMARK(BM_ConvolveDirect)->Args({256, 8})->Args({256, 32})->Unit(benchmark::kMillisecond);

void BM_ZeroFlux(benchmark::State& state) {
  const DomainGeometry disc = domains::disc();
  const auto samples = sample_boundary(disc, static_cast<std::size_t>(state.range(0)), 0);
  const CoefficientField field = fields::rotation();
  for (auto _ : state) benchmark::DoNotOptimize(zero_flux_residual(field, disc, samples));
}
BENCHMARK(BM_ZeroFlux)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
