#include "aabtp/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aabtp/error.hpp"

namespace aabtp {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over a mix of both inputs
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

double gamma_rate(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw InputError("gamma draw needs positive shape and rate");
  }
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  // A draw of exactly 0 is possible in floating point for tiny shapes.
  return std::max(gamma(rng), std::numeric_limits<double>::min());
}

std::size_t sample_log_weights(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw InputError("sample_log_weights: no candidates");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> cumulative(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    total += std::exp(log_weights[i] - top);
    cumulative[i] = total;
  }
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), log_weights.size() - 1);
}

}  // namespace aabtp
