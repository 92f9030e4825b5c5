// Serial reference against the OpenMP kernels on the same workloads.

#include <benchmark/benchmark.h>

#include "twofirm/hjb.hpp"
#include "twofirm/montecarlo.hpp"
#include "twofirm/mvh.hpp"

using namespace twofirm;

namespace {

ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::serial : ExecPolicy::parallel;
}

const ModelParams& unordered_model() {
  static const ModelParams p =
      validate_params(constant_model({0.05, 0.2, -0.4, -0.3, 0.3, 0.2}, 1.0));
  return p;
}

const ModelParams& ordered_model() {
  static const ModelParams p = [] {
    ModelParams m;
    m.ordered_defaults = true;
    StateCoeffs r0, r1, r2;
    r0.mu = 0.08; r0.sigma = 0.2; r0.sigmaA = -0.3; r0.lambdaA = 0.3;
    r1.mu = 0.06; r1.sigma = 0.25; r1.sigmaB = -0.2; r1.lambdaB = 0.2;
    r2.mu = 0.04; r2.sigma = 0.2;
    StateCoeffs u = r0;
    u.lambdaA = 0.0;
    m[DefaultState{0, 0}] = r0;
    m[DefaultState{1, 0}] = r1;
    m[DefaultState{0, 1}] = u;
    m[DefaultState{1, 1}] = r2;
    return validate_params(m);
  }();
  return p;
}

const DefaultableClaim kClaim = DefaultableClaim::restricted_form(
    PayoffFunction::capped_call(1.0, 0.5), PayoffFunction::constant(0.3));

void BM_SimulatePaths(benchmark::State& state) {
  for (auto _ : state) {
    auto paths = simulate_paths(unordered_model(), 200, 20000, 1.0, 1, policy_of(state));
    benchmark::DoNotOptimize(paths.data());
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}

void BM_SolveHjb(benchmark::State& state) {
  HjbGridSpec spec;
  spec.n_time = 200;
  spec.n_space = 401;
  spec.policy = policy_of(state);
  for (auto _ : state) {
    const HjbSolution s = solve_hjb(unordered_model(), kClaim, RiskAversion{1.0}, 1.0, spec);
    benchmark::DoNotOptimize(s.value0());
  }
}

void BM_SolveMvhPde(benchmark::State& state) {
  MvhGridSpec spec;
  spec.n_time = 200;
  spec.n_space = 401;
  spec.tier = ThetaTier::pde;
  spec.policy = policy_of(state);
  for (auto _ : state) {
    const MvhSolution s = solve_mvh(ordered_model(), kClaim, 1.0, spec);
    benchmark::DoNotOptimize(s.theta0());
  }
}

void BM_HedgeError(benchmark::State& state) {
  MvhGridSpec spec;
  spec.n_time = 200;
  spec.n_space = 201;
  static const MvhSolution sol = solve_mvh(ordered_model(), kClaim, 1.0, spec);
  const MvhStrategy pi = optimal_strategy_mvh(sol.first, sol.second, ordered_model());
  const McSetup mc{PathSimulator(ordered_model(), {200, 1.0, 1}), 20000, policy_of(state)};
  for (auto _ : state) {
    const McEstimate e = estimate_hedge_error(mc, kClaim, pi, 0.2);
    benchmark::DoNotOptimize(e.mean);
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}

}  // namespace

BENCHMARK(BM_SimulatePaths)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveHjb)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveMvhPde)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HedgeError)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
