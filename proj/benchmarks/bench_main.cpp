#include <benchmark/benchmark.h>

#include "sgmm/linalg.hpp"
#include "sgmm/metrics.hpp"
#include "sgmm/mixture.hpp"
#include "sgmm/rng.hpp"
#include "sgmm/rounding.hpp"
#include "sgmm/sdp.hpp"

using namespace sgmm;

namespace {

Dataset gaussian_data(int n, int k, int d, double s, std::uint64_t seed) {
  MixtureSpec spec;
  spec.n = n;
  spec.k = k;
  spec.centers = simplex_centers(k, d, s);
  return sample_dataset(spec, seed);
}

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
  return m;
}

void BM_PsdProjectExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd m = random_symmetric(n, 1);
  PsdProjector projector(n);
  projector.set_exact_only(true);
  for (auto _ : state) {
    Eigen::MatrixXd work = m;
    projector.project(work);
    benchmark::DoNotOptimize(work.data());
  }
}
BENCHMARK(BM_PsdProjectExact)->Arg(100)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

// Low-rank positive part, the regime where the Krylov path engages.
void BM_PsdProjectLowRank(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool exact = state.range(1) != 0;
  Rng rng(2);
  Eigen::MatrixXd low(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) low(i, j) = rng.normal();
  const Eigen::MatrixXd m = low * low.transpose() - Eigen::MatrixXd::Identity(n, n) - 0.01 * random_symmetric(n, 3);
  PsdProjector projector(n);
  projector.set_exact_only(exact);
  for (auto _ : state) {
    Eigen::MatrixXd work = m;
    projector.project(work);
    benchmark::DoNotOptimize(work.data());
  }
  state.counters["partial_calls"] = static_cast<double>(projector.partial_calls());
}
BENCHMARK(BM_PsdProjectLowRank)->Args({1000, 1})->Args({1000, 0})->Unit(benchmark::kMillisecond);

void BM_AffineProject(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SymMatrix m(random_symmetric(n, 4));
  for (auto _ : state) benchmark::DoNotOptimize(affine_project(m, 2));
}
BENCHMARK(BM_AffineProject)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PairwiseDistances(benchmark::State& state) {
  const Dataset data = gaussian_data(static_cast<int>(state.range(0)), 2, 10, 6.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_sq_dists(data.points));
}
BENCHMARK(BM_PairwiseDistances)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SolveSdp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SymMatrix a = pairwise_sq_dists(gaussian_data(n, 2, 10, 6.0, 6).points);
  SolverConfig config;
  config.tol_primal = config.tol_dual = 1e-4;
  config.max_iter = 200;
  int iterations = 0;
  for (auto _ : state) {
    const SdpSolution s = solve_sdp(a, 2, config);
    iterations = s.iterations;
    benchmark::DoNotOptimize(s.objective);
  }
  state.counters["iterations"] = iterations;
}
BENCHMARK(BM_SolveSdp)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ExtractBalls(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Labels labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 4;
  const SymMatrix y = cluster_matrix(labels);
  for (auto _ : state) benchmark::DoNotOptimize(extract_balls(y, 4));
}
BENCHMARK(BM_ExtractBalls)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Misrate(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Rng rng(7);
  Labels a(10000), b(10000);
  for (auto& l : a) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  for (auto& l : b) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  for (auto _ : state) benchmark::DoNotOptimize(misrate(a, b, k));
}
BENCHMARK(BM_Misrate)->Arg(2)->Arg(10)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
