#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace aabtp {

using Rng = std::mt19937_64;

// Deterministic child seed for stream `stream` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

Rng make_rng(std::uint64_t master, std::uint64_t stream = 0);

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng);

// Gamma draw parameterized by shape and *rate*.
double gamma_rate(double shape, double rate, Rng& rng);

// Index drawn with probability proportional to exp(log_weights[i]).
std::size_t sample_log_weights(std::span<const double> log_weights, Rng& rng);

}  // namespace aabtp
