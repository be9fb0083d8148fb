#include <vector>

#include <benchmark/benchmark.h>

#include "magmcmc/ess.hpp"
#include "magmcmc/integrator.hpp"
#include "magmcmc/magnetic.hpp"
#include "magmcmc/sampler.hpp"
#include "magmcmc/target.hpp"

namespace {

using namespace magmcmc;

void BM_Factorize(benchmark::State& state) {
  Rng rng(1);
  const SkewMatrix l = skew_from_gaussian(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(factorize(l));
}
BENCHMARK(BM_Factorize)->Arg(4)->Arg(16)->Arg(64);

void BM_EuclideanStep(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(2);
  const SpectralFactorization f = factorize(skew_from_gaussian(n, rng));
  const GradientOracle grad = [](const Vector& q) { return Vector(q); };
  PhaseState z{rng.normal_vector(n), rng.normal_vector(n)};
  for (auto _ : state) {
    z = euclidean_magnetic_step(z, grad, f, 0.01);
    benchmark::DoNotOptimize(z.q.data());
  }
}
BENCHMARK(BM_EuclideanStep)->Arg(4)->Arg(16)->Arg(64);

void constrained_step_bench(benchmark::State& state, const TargetPtr& target) {
  Rng rng(3);
  const SpectralFactorization f = factorize(skew_from_gaussian(target->dim(), rng));
  const Vector q = target->default_initial_point();
  PhaseState z{q, sample_momentum(target->manifold(), q, rng)};
  IntegratorParams params;
  params.step_size = 0.01;
  for (auto _ : state) {
    z = constrained_step(z, *target, f, params).state;
    benchmark::DoNotOptimize(z.q.data());
  }
}

void BM_SphereStep(benchmark::State& state) {
  Rng rng(4);
  const BvmfProblem p = random_bvmf_problem(state.range(0), rng);
  constrained_step_bench(state, bvmf_target(p.a, p.b));
}
BENCHMARK(BM_SphereStep)->Arg(3)->Arg(6)->Arg(50);

void BM_StiefelStep(benchmark::State& state) {
  const Index n = state.range(0);
  constrained_step_bench(state, zero_potential_target(make_stiefel(n, 2)));
}
BENCHMARK(BM_StiefelStep)->Arg(5)->Arg(20);

void BM_EigenmodelTransition(benchmark::State& state) {
  Rng rng(5);
  ChainConfig cfg;
  cfg.target = network_eigenmodel_target(synthetic_eigenmodel_graph(state.range(0), 2, rng), 2, 230.0, 100.0);
  cfg.field = MagneticField(skew_from_gaussian(cfg.target->dim(), rng));
  cfg.step_size = 0.05;
  cfg.num_steps = 10;
  const Vector q = cfg.target->default_initial_point();
  PhaseState z{q, Vector()};
  for (auto _ : state) {
    z.p = sample_momentum(cfg.target->manifold(), z.q, rng);
    z = hmc_transition(z, cfg, rng).state;
  }
}
BENCHMARK(BM_EigenmodelTransition)->Arg(8)->Arg(30);

void BM_Ess(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  double prev = 0.0;
  for (auto& v : x) v = prev = 0.9 * prev + rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(effective_sample_size(x, 1e12));
}
BENCHMARK(BM_Ess)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
