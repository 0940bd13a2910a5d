#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "aabtp/dataset.hpp"
#include "aabtp/kernel.hpp"
#include "aabtp/posterior.hpp"
#include "aabtp/random.hpp"
#include "aabtp/sampler.hpp"

namespace aabtp {

// Moments of f(new) | f(obs) = values for a zero-mean squared-exponential GP.
// New points that coincide exactly with an observed point get that point's value
// and zero variance.
GaussianMoments conditional_moments(const Points& obs_points, const Eigen::VectorXd& obs_values,
                                    const Points& new_points, const KernelParams& p,
                                    double jitter = kDefaultJitter);

Eigen::VectorXd conditional_draw(const Points& obs_points, const Eigen::VectorXd& obs_values,
                                 const Points& new_points, const KernelParams& p, Rng& rng,
                                 double jitter = kDefaultJitter);

enum class PredictMode {
  Joint,     // new curves drawn jointly
  Marginal,  // each new curve drawn from its own conditional; same per-target marginals
};

struct PredictOptions {
  bool include_noise = false;
  double jitter = kDefaultJitter;
  PredictMode mode = PredictMode::Joint;
  std::uint64_t seed = 1;
};

// Targets are new_s x new_d in curve-major order: target = a * |new_d| + b.
struct PredictiveDraws {
  Points target_s;
  Points target_d;
  std::vector<int> target_curve;  // row of new_s for each target
  Eigen::MatrixXd draws;          // snapshots x targets
  bool noise_included = false;

  Eigen::Index target_count() const { return draws.cols(); }
};

// new_d == nullopt predicts on the training grid using the sampled f_k directly.
PredictiveDraws predict_surface(const PosteriorSamples& samples, const DesignIndex& idx,
                                const Points& new_s, const std::optional<Points>& new_d,
                                const PredictOptions& opts = {});

struct IntervalSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Linear interpolation between order statistics: position q * (n - 1).
double empirical_quantile(std::span<const double> sorted, double q);

// Equal-tail interval at `level` plus the mean, one entry per target.
std::vector<IntervalSummary> summarize(const PredictiveDraws& draws, double level);

}  // namespace aabtp
