#include <benchmark/benchmark.h>

#include <array>

#include "gconv/driver.hpp"
#include "gconv/gexpectation.hpp"
#include "gconv/gheat.hpp"
#include "gconv/infconv.hpp"
#include "gconv/payoff.hpp"
#include "gconv/payoff_expr.hpp"
#include "gconv/quadrature.hpp"

using namespace gconv;

namespace {

CylinderPayoff payoff_of(const char* expr, std::vector<double> times) {
  return CylinderPayoff::from_expr(parse_payoff(expr), std::move(times));
}

} // namespace

// One backward solve on the default grid, the unit of work everything
// else multiplies.
static void BM_HeatSolve(benchmark::State& state) {
  const Driver d(1.0, 2.0);
  const SolveConfig cfg;
  const auto payoff = payoff_of("max(x1-1,0)", {1.0});
  const std::array<Driver, 1> bands = {d};
  const SpatialGrid grid = build_grid(payoff.envelope(), bands, 1.0, cfg);
  const GridFunction terminal = GridFunction::sample(grid, [&](double x) {
    const double coords[1] = {x};
    return payoff.phi({coords, 1});
  });
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(d, terminal, 1.0, cfg));
  }
}
BENCHMARK(BM_HeatSolve)->Unit(benchmark::kMillisecond);

static void BM_Evaluate(benchmark::State& state) {
  const Driver d(1.0, 2.0);
  const auto payoff = payoff_of("max(x1-1,0)", {1.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(payoff, d, SolveConfig{}));
  }
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

static void BM_EvaluateTwoIncrement(benchmark::State& state) {
  const Driver d(1.0, 2.0);
  const auto payoff = payoff_of("max(x1+x2-1,0)", {0.5, 1.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(payoff, d, SolveConfig{}));
  }
}
BENCHMARK(BM_EvaluateTwoIncrement)->Unit(benchmark::kMillisecond);

static void BM_QuadratureRule(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(QuadratureRule(order));
  }
}
BENCHMARK(BM_QuadratureRule)->Arg(64)->Arg(512)->Arg(2048);

// Cost of one candidate evaluation inside the minimizer.
static void BM_FunctionalJ(benchmark::State& state) {
  InfConvProblem problem(Driver(1.0, 2.0), Driver(1.5, 3.0), payoff_of("sin(x1)", {1.0}));
  problem.control_points = 201;
  const Contract psi = Contract::zero(control_grid(problem), problem.X.times());
  for (auto _ : state) {
    benchmark::DoNotOptimize(functional_J(problem, psi));
  }
}
BENCHMARK(BM_FunctionalJ)->Unit(benchmark::kMillisecond);

// Warm start only, the configuration the verification suites run with.
static void BM_MinimizeWarmStart(benchmark::State& state) {
  InfConvProblem problem(Driver(1.0, 2.0), Driver(1.5, 3.0), payoff_of("sin(x1)", {1.0}));
  problem.control_points = 201;
  problem.partition_levels = 256;
  problem.optimizer.max_iters = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize(problem));
  }
}
BENCHMARK(BM_MinimizeWarmStart)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
