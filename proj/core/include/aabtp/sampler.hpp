#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "aabtp/dataset.hpp"
#include "aabtp/kernel.hpp"
#include "aabtp/model.hpp"
#include "aabtp/posterior.hpp"
#include "aabtp/random.hpp"

namespace aabtp {

struct ChainConfig {
  int n_iter = 12000;
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  Priors priors;
  double rw_step = 0.1;  // omega random-walk proposal sd
  double jitter = kDefaultJitter;
  int progress_every = 0;  // 0 disables the stderr progress line
  // Draw all f_k from one residual snapshot, concurrently. Not an exact Gibbs scan.
  bool parallel_f = false;

  void validate() const;
};

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Posterior of x ~ N(0, prior) given the diagonal-design likelihood with
// precision `weights` (>= 0) and linear term `linear`:
//   cov  = (prior^{-1} + diag(weights))^{-1},  mean = cov * linear.
// Computed through B = I + W^1/2 prior W^1/2, so prior^{-1} is never formed.
GaussianMoments diagonal_posterior_moments(const Eigen::MatrixXd& prior,
                                           const Eigen::VectorXd& weights,
                                           const Eigen::VectorXd& linear);

// One exact draw from the same posterior; prior_chol is a Cholesky factor of prior.
Eigen::VectorXd diagonal_posterior_draw(const Eigen::MatrixXd& prior,
                                        const Eigen::MatrixXd& prior_chol,
                                        const Eigen::VectorXd& weights,
                                        const Eigen::VectorXd& linear, Rng& rng);

// Single-site Gibbs sampler over one ModelState. Holds the residual Y - fitted
// in sync with the state after every update.
class GibbsSampler {
 public:
  GibbsSampler(const DesignIndex& idx, Eigen::VectorXd y, ChainConfig cfg);

  const ModelState& state() const { return state_; }
  void set_state(ModelState state);
  void set_response(Eigen::VectorXd y);
  const Eigen::VectorXd& response() const { return y_; }
  const ChainConfig& config() const { return cfg_; }
  const DesignIndex& design() const { return idx_; }
  Rng& rng() { return rng_; }
  int iteration() const { return iteration_; }

  // Y* = Y minus every component except component k (k = 0 is f_0).
  Eigen::VectorXd partial_residual(int k) const;
  // k-th component gathered to the observations.
  Eigen::VectorXd component(int k) const;

  // Conditional moments of F[:,k] (k in 0..K) and G[:,k-1] (k in 1..K).
  GaussianMoments f_conditional(int k);
  GaussianMoments g_conditional(int k);

  void update_f(int k);
  void update_g(int k);
  void update_shrinkage();
  void update_tau();
  void update_scales();
  void update_theta();
  void update_omega();
  void update_nu();

  // f_0..f_K, g_1..g_K, shrinkage, tau, scales.
  void sweep();

  double log_likelihood() const;
  // g_k' R(theta_k)^{-1} g_k for k = 1..K (index k-1)
  Eigen::VectorXd g_quadratic_forms();
  double omega_acceptance() const;

 private:
  struct Likelihood {
    Eigen::VectorXd weights;
    Eigen::VectorXd linear;
  };
  Likelihood f_likelihood(int k, const Eigen::VectorXd& ystar) const;
  Likelihood g_likelihood(int k, const Eigen::VectorXd& ystar) const;
  Eigen::MatrixXd f_prior(int k, double omega) const;
  double f_log_density(int k, double omega) const;
  Eigen::VectorXd draw_f(int k, const Eigen::VectorXd& ystar, Rng& rng) const;
  void refresh_residual();
  void parallel_f_updates();

  DesignIndex idx_;
  Eigen::VectorXd y_;
  ChainConfig cfg_;
  Rng rng_;
  ModelState state_;
  Eigen::VectorXd resid_;
  CorrelationCache s_cache_;
  int iteration_ = 0;
  long omega_accepted_ = 0;
  long omega_proposed_ = 0;
};

PosteriorSamples run_chain(const Dataset& data, const DesignIndex& idx, const ChainConfig& cfg);

// Independent chains with seeds derive_seed(cfg.seed, c), run on separate threads.
std::vector<PosteriorSamples> run_chains(const Dataset& data, const DesignIndex& idx,
                                         const ChainConfig& cfg, int chains);

}  // namespace aabtp
