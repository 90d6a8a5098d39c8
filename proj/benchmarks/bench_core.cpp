#include <benchmark/benchmark.h>

#include <random>

#include "samsbo/bounds.hpp"
#include "samsbo/gp.hpp"
#include "samsbo/hyperposterior.hpp"
#include "samsbo/problems.hpp"
#include "samsbo/safe_opt.hpp"
#include "samsbo/two_task_likelihood.hpp"

using namespace samsbo;

namespace {

MultiTaskDataset random_data(int n, int d, int u, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MultiTaskDataset out(d, u);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x(k) = unit(rng);
    out.add(x, TaskIndex{1 + i % u}, std::sin(6.0 * x.sum()));
  }
  return out;
}

KernelParams params(int d) {
  KernelParams p;
  p.lengthscales = Eigen::VectorXd::Constant(d, 0.2);
  p.noise_variance = 1e-3;
  return p;
}

void BM_PosteriorFit(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const MultiTaskDataset d = random_data(n, 4, 2, 1);
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.7);
  for (auto _ : state) benchmark::DoNotOptimize(Posterior(d, s, params(4)));
  state.SetComplexityN(n);
}
BENCHMARK(BM_PosteriorFit)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_PredictGrid(benchmark::State& state) {
  const MultiTaskDataset d = random_data(static_cast<int>(state.range(0)), 4, 2, 2);
  const Posterior post(d, CorrelationMatrix::two_task(0.7), params(4));
  const CandidateGrid grid = make_grid(2048, 4);
  for (auto _ : state) benchmark::DoNotOptimize(post.predict_batch(grid.points, TaskIndex{1}));
}
BENCHMARK(BM_PredictGrid)->Arg(64)->Arg(256);

void BM_TwoTaskLikelihood(benchmark::State& state) {
  const MultiTaskDataset d = random_data(static_cast<int>(state.range(0)), 4, 2, 3);
  const TwoTaskLikelihood fast(d, params(4));
  double r = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fast.log_likelihood(r));
    r = r > 0.98 ? 0.0 : r + 0.01;
  }
}
BENCHMARK(BM_TwoTaskLikelihood)->Arg(64)->Arg(256);

void BM_Hyperposterior(benchmark::State& state) {
  const MultiTaskDataset d = random_data(static_cast<int>(state.range(0)), 4, 2, 4);
  McmcConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_hyperposterior(d, HyperPrior{}, params(4), 200, cfg));
    ++cfg.seed;
  }
}
BENCHMARK(BM_Hyperposterior)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ScalingBundle(benchmark::State& state) {
  const MultiTaskDataset d = random_data(static_cast<int>(state.range(0)), 4, 2, 5);
  const EmpiricalHyperPosterior post = sample_hyperposterior(d, HyperPrior{}, params(4), 200);
  const ConfidenceSet set = confidence_set(post, 0.15);
  const CorrelationMatrix& ref = set.members[select_sigma_prime(set)];
  DiscretizationSpec spec;
  spec.dimension = 4;
  for (auto _ : state) benchmark::DoNotOptimize(scaling_bundle(d, ref, set, spec, params(4), 0.05));
}
BENCHMARK(BM_ScalingBundle)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SupplementaryBatch(benchmark::State& state) {
  const MultiTaskDataset d = random_data(64, 4, 2, 6);
  const Posterior post(d, CorrelationMatrix::two_task(0.7), params(4));
  const CandidateGrid grid = make_grid(2048, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(acquire_supplementary(post, grid, TaskIndex{2}, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_SupplementaryBatch)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_LaserCost(benchmark::State& state) {
  LaserChainSpec spec;
  const LaserChainProblem problem(spec);
  const std::vector<Eigen::VectorXd> seeds = problem.safe_seeds(1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(problem.evaluate_true(TaskIndex{1}, seeds[0]));
}
BENCHMARK(BM_LaserCost);

}  // namespace

BENCHMARK_MAIN();
