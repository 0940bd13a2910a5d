#pragma once

#include <cstdint>

namespace aabtp {

struct IterationTiming {
  int n = 0;
  int R = 0;
  int K = 0;
  double seconds = 0.0;  // mean wall time of one unit of work
  int repetitions = 0;
};

// Mean wall time of one full Gibbs sweep on a simulated balanced design with
// n curves, R shared doses and K components. Setup and warm-up sweeps excluded.
IterationTiming time_factorized_iteration(int n, int R, int K, int iterations,
                                          std::uint64_t seed = 1);

// Mean wall time of one dense full-GP iteration on the same design: build the
// (R n) x (R n) product-kernel covariance of all observations plus noise,
// Cholesky-factor it and solve for the response.
IterationTiming time_dense_gp_iteration(int n, int R, int repetitions, std::uint64_t seed = 1);

}  // namespace aabtp
