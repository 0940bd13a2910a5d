#include "aabtp/bench.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>

#include "aabtp/error.hpp"
#include "aabtp/sampler.hpp"
#include "aabtp/simgen.hpp"

namespace aabtp {

namespace {

using Clock = std::chrono::steady_clock;

SimResult bench_data(int n, int R, std::uint64_t seed) {
  if (n < 1 || R < 1) throw InputError("bench: n and R must be >= 1");
  SimConfig cfg;
  cfg.n_curves = n;
  cfg.seed = seed;
  if (R != static_cast<int>(cfg.doses.size())) {
    cfg.doses.clear();
    for (int r = 0; r < R; ++r) cfg.doses.push_back(R == 1 ? 1.0 : 6.0 * r / (R - 1));
  }
  return generate(cfg);
}

}  // namespace

IterationTiming time_factorized_iteration(int n, int R, int K, int iterations, std::uint64_t seed) {
  if (iterations < 1) throw InputError("bench: iterations must be >= 1");
  const SimResult sim = bench_data(n, R, seed);
  const DesignIndex idx = build_design(sim.data, 6);
  ChainConfig cfg;
  cfg.priors.K = K;
  cfg.seed = seed;
  GibbsSampler sampler(idx, sim.data.response(), cfg);
  sampler.sweep();

  const auto start = Clock::now();
  for (int t = 0; t < iterations; ++t) sampler.sweep();
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  return {n, R, K, elapsed / iterations, iterations};
}

IterationTiming time_dense_gp_iteration(int n, int R, int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw InputError("bench: repetitions must be >= 1");
  const SimResult sim = bench_data(n, R, seed);
  const DesignIndex idx = build_design(sim.data, 6);
  const Eigen::VectorXd y = sim.data.response();
  const Eigen::MatrixXd s_corr = (-1.0 * squared_distances(idx.curves, idx.curves).array()).exp();
  const Eigen::MatrixXd d_corr = (-0.5 * squared_distances(idx.grid, idx.grid).array()).exp();
  const auto N = static_cast<Eigen::Index>(idx.observation_count());
  const double noise_var = 1.0;

  double elapsed = 0.0;
  double checksum = 0.0;
  for (int rep = 0; rep < repetitions; ++rep) {
    const auto start = Clock::now();
    Eigen::MatrixXd cov(N, N);
    for (Eigen::Index b = 0; b < N; ++b) {
      const int ib = idx.g_index[b];
      const int rb = idx.f_index[b];
      for (Eigen::Index a = 0; a < N; ++a) {
        cov(a, b) = s_corr(idx.g_index[a], ib) * d_corr(idx.f_index[a], rb);
      }
    }
    cov.diagonal().array() += noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("dense GP covariance not positive definite");
    const Eigen::VectorXd alpha = llt.solve(y);
    elapsed += std::chrono::duration<double>(Clock::now() - start).count();
    checksum += alpha.sum();
  }
  // Keeps the solve observable.
  if (!std::isfinite(checksum)) throw NumericalError("dense GP solve produced non-finite values");
  return {n, R, 0, elapsed / repetitions, repetitions};
}

}  // namespace aabtp
