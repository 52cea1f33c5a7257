#include <benchmark/benchmark.h>

#include "tubespec/asymptotics.hpp"

using namespace tubespec;

namespace {

Mesh half_disk(double h) {
  DomainSpec s;
  GradingPolicy p;
  p.h_far = p.h_junction = h;
  return generate_mesh(build_domain(s), p, ElementOrder::P2);
}

Mesh perturbed(double eps, double h) {
  DomainSpec s;
  s.kind = DomainKind::Perturbed;
  s.eps = eps;
  GradingPolicy p;
  p.h_far = h;
  p.h_junction = 0.05 * eps;
  return generate_mesh(build_domain(s), p, ElementOrder::P2);
}

void BM_Mesh(benchmark::State& state) {
  const double h = 1.0 / state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(perturbed(0.1, h).num_triangles());
}
BENCHMARK(BM_Mesh)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
  const Mesh m = half_disk(1.0 / state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_stiffness(m).nonZeros());
    benchmark::DoNotOptimize(assemble_mass(m).nonZeros());
  }
  state.counters["dofs"] = m.num_dofs();
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Eigensolve(benchmark::State& state) {
  const Mesh m = half_disk(1.0 / state.range(0));
  SolverConfig cfg;
  cfg.num_eigs = 6;
  for (auto _ : state) benchmark::DoNotOptimize(solve_dirichlet(m, {}, cfg).front().lambda);
  state.counters["dofs"] = m.num_dofs();
}
BENCHMARK(BM_Eigensolve)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_ClipQuadrature(benchmark::State& state) {
  const Mesh m = perturbed(0.1, 0.04);
  for (auto _ : state) benchmark::DoNotOptimize(clip_quadrature(m, 0.5).area_sum());
}
BENCHMARK(BM_ClipQuadrature)->Unit(benchmark::kMillisecond);

void BM_ExteriorSolve(benchmark::State& state) {
  ExteriorOptions o;
  o.far_slope = 0.08;
  o.h_junction = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(solve_U_R(1, static_cast<double>(state.range(0)), o).g_R);
}
BENCHMARK(BM_ExteriorSolve)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
