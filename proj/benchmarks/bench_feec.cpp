// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "feec/driver.hpp"
#include "feec/swe_dual.hpp"

using namespace feec;

namespace
{

constexpr double kL = 1e6;
const Reference kRef;

CellKind kind_of(std::int64_t k) { return static_cast<CellKind>(k); }

// Mesh connectivity and signed incidence only.
void BM_TopologicalAssembly(benchmark::State &st)
{
  const Mesh m = build_periodic_mesh(kind_of(st.range(0)), st.range(1), st.range(1), kL, kL);
  for (auto _ : st)
    benchmark::DoNotOptimize(assemble_incidence(m));
  st.SetLabel(to_string(m.kind()));
}

// Element tables, mass matrices and their factorizations.
void BM_MetricAssembly(benchmark::State &st)
{
  const Mesh m = build_periodic_mesh(kind_of(st.range(0)), st.range(1), st.range(1), kL, kL);
  for (auto _ : st)
    benchmark::DoNotOptimize(build_space_complex(m, Family::P1_RT0_P0));
  st.SetLabel(to_string(m.kind()));
}

void BM_HodgeAssembly(benchmark::State &st)
{
  const auto sp = build_space_complex(
    build_periodic_mesh(kind_of(st.range(0)), st.range(1), st.range(1), kL, kL), Family::P1_RT0_P0);
  HodgeOptions opt;
  opt.check_invertibility = false;
  for (auto _ : st)
    benchmark::DoNotOptimize(build_dual_operators(sp, opt));
  st.SetLabel(to_string(sp->mesh().kind()));
}

// One full right-hand side per iteration; range(2) selects the PV scheme.
void BM_PrimalRhs(benchmark::State &st)
{
  const auto sp = build_space_complex(
    build_periodic_mesh(kind_of(st.range(0)), st.range(1), st.range(1), kL, kL), Family::P1_RT0_P0);
  const State s = random_state(*sp, kRef, 1);
  const ModelParams p = random_params(*sp, kRef, 1);
  StabilizationConfig cfg;
  cfg.scheme = static_cast<PVScheme>(st.range(2));
  cfg.tau_apvm = 300.0;
  cfg.reference_speed = std::sqrt(kRef.g * kRef.D0);
  for (auto _ : st)
    benchmark::DoNotOptimize(primal_rhs(*sp, s, p, cfg));
  st.SetLabel(to_string(sp->mesh().kind()) + " " + to_string(cfg.scheme));
}

void BM_DualRhs(benchmark::State &st)
{
  const auto sp = build_space_complex(
    build_periodic_mesh(kind_of(st.range(0)), st.range(1), st.range(1), kL, kL), Family::P1_RT0_P0);
  HodgeOptions opt;
  opt.check_invertibility = false;
  const auto ops = build_dual_operators(sp, opt);
  const State s = random_state(*sp, kRef, 1);
  const ModelParams p = random_params(*sp, kRef, 1);
  for (auto _ : st)
    benchmark::DoNotOptimize(dual_rhs(*ops, s, p));
  st.SetLabel(to_string(sp->mesh().kind()));
}

void BM_SemiImplicitStep(benchmark::State &st)
{
  RunConfig c;
  c.mesh = kind_of(st.range(0));
  c.nx = c.ny = static_cast<int>(st.range(1));
  c.test_case = "geostrophic_balance";
  c.integrator = Integrator::SemiImplicit;
  c.dt = 600.0;
  Simulation sim(c);
  for (auto _ : st)
    sim.step();
  st.SetLabel(to_string(c.mesh));
}

void kinds_and_sizes(benchmark::internal::Benchmark *b)
{
  for (int k = 0; k < 3; ++k)
    for (int n : {16, 32})
      b->Args({k, n});
}

void rhs_args(benchmark::internal::Benchmark *b)
{
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < 3; ++s)
      b->Args({k, 32, s});
}

}  // namespace

BENCHMARK(BM_TopologicalAssembly)->Apply(kinds_and_sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MetricAssembly)->Apply(kinds_and_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HodgeAssembly)->Args({0, 16})->Args({1, 16})->Args({2, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PrimalRhs)->Apply(rhs_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DualRhs)->Args({0, 16})->Args({1, 16})->Args({2, 16})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SemiImplicitStep)->Args({1, 16})->Args({2, 16})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
