#include <benchmark/benchmark.h>

#include <Eigen/Cholesky>

#include "aabtp/dataset.hpp"
#include "aabtp/kernel.hpp"
#include "aabtp/sampler.hpp"
#include "aabtp/simgen.hpp"

namespace {

aabtp::SimResult design(int n) {
  aabtp::SimConfig cfg;
  cfg.n_curves = n;
  return aabtp::generate(cfg);
}

// One Gibbs sweep at n curves, 7 doses, K = 15.
void BM_Sweep(benchmark::State& state) {
  const auto sim = design(static_cast<int>(state.range(0)));
  const auto idx = aabtp::build_design(sim.data);
  aabtp::ChainConfig cfg;
  cfg.priors.K = static_cast<int>(state.range(1));
  aabtp::GibbsSampler s(idx, sim.data.response(), cfg);
  s.sweep();
  for (auto _ : state) s.sweep();
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Sweep)->Args({50, 15})->Args({100, 15})->Args({200, 15})->Args({400, 15})->Args({125, 1})
    ->Unit(benchmark::kMillisecond)->Complexity();

void BM_UpdateTheta(benchmark::State& state) {
  const auto sim = design(static_cast<int>(state.range(0)));
  const auto idx = aabtp::build_design(sim.data);
  aabtp::ChainConfig cfg;
  aabtp::GibbsSampler s(idx, sim.data.response(), cfg);
  for (auto _ : state) s.update_theta();
}
BENCHMARK(BM_UpdateTheta)->Arg(125)->Arg(400)->Unit(benchmark::kMillisecond);

// Dense Cholesky of the joint (7n x 7n) covariance.
void BM_DenseCholesky(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  aabtp::Points pts = aabtp::Points::Random(7 * n, 3);
  const Eigen::MatrixXd k = aabtp::build_cov(pts, pts, {1.0, 1.0}, 1e-6).entries;
  for (auto _ : state) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    benchmark::DoNotOptimize(llt.matrixLLT().data());
  }
}
BENCHMARK(BM_DenseCholesky)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
