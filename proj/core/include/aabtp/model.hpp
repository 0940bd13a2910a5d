#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "aabtp/dataset.hpp"
#include "aabtp/random.hpp"

namespace aabtp {

// {0.05, 0.10, ..., 4.05}
std::vector<double> default_theta_grid();

struct Priors {
  int K = 15;
  double a1 = 2.0;  // delta_j ~ Ga(a1, 1)
  std::vector<double> theta_grid = default_theta_grid();
  double omega_lower = 0.1;
  double omega_upper = 1.5;
  double tau_shape = 1.0;
  double tau_rate = 1.0;
  // 1/nu ~ Ga(nu_shape, nu_rate)
  double nu_shape = 1.0;
  double nu_rate = 1.0;

  void validate() const;
};

// Latent values and hyperparameters of h(s,d) = f_0(d) + sum_k g_k(s) f_k(d).
//   F : R x (K+1), column 0 is f_0 on the grid
//   G : n x K,     column k-1 is g_k on the curves
//   omega(0) scales f_0, omega(k) scales f_k; theta(k-1) scales g_k.
struct ModelState {
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
  double tau = 1.0;
  double phi = 1.0;
  Eigen::VectorXd delta;
  Eigen::VectorXd theta;
  Eigen::VectorXd omega;
  double nu = 1.0;

  int K() const { return static_cast<int>(G.cols()); }

  // Throws InputError on a non-positive hyperparameter or shape mismatch.
  void validate(const DesignIndex& idx) const;
};

// (phi * prod_{j<=k} delta_j)^{-1}, k in 1..K
double mgp_variance(const ModelState& state, int k);
Eigen::VectorXd mgp_variances(const ModelState& state);

Eigen::VectorXd fitted_values(const ModelState& state, const DesignIndex& idx);

ModelState initial_state(const DesignIndex& idx, const Priors& priors, Rng& rng);

// Flat CSV, one scalar per row: name,indices,value. Matrix indices are "r c".
void write_state_csv(std::ostream& out, const ModelState& state);
ModelState read_state_csv(std::istream& in);

}  // namespace aabtp
