#pragma once

// Random tiny models shared by the sampler tests and the acceptance suite.

#include <random>
#include <string>

#include "aabtp/dataset.hpp"
#include "aabtp/model.hpp"
#include "aabtp/random.hpp"
#include "aabtp/sampler.hpp"
#include "oracles/dense.hpp"

namespace support {

using namespace aabtp;

// n curves in [0,1]^2 observed at a random nonempty subset of R doses (some
// doses repeated), so the design is unbalanced.
inline Dataset tiny_dataset(int n, int R, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d(2, 1);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> s{u(rng), u(rng)};
    // Curve i always covers dose i % R so every grid point is observed.
    for (int r = 0; r < R; ++r) {
      const int copies = (r == i % R || n < R) ? 1 + (u(rng) < 0.3) : (u(rng) < 0.6);
      for (int c = 0; c < copies; ++c) d.add({"c" + std::to_string(i), s, {0.7 * r}, 2.0 * z(rng)});
    }
  }
  return d;
}

inline ModelState random_state(const DesignIndex& idx, const Priors& pr, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  ModelState st = initial_state(idx, pr, rng);
  for (Eigen::Index i = 0; i < st.F.size(); ++i) st.F.data()[i] = z(rng);
  for (Eigen::Index i = 0; i < st.G.size(); ++i) st.G.data()[i] = z(rng);
  st.tau = 0.2 + 2.0 * u(rng);
  st.phi = 0.2 + 2.0 * u(rng);
  st.nu = 0.2 + 2.0 * u(rng);
  for (int k = 0; k < st.K(); ++k) {
    st.delta(k) = 0.5 + 2.0 * u(rng);
    st.theta(k) = pr.theta_grid[static_cast<std::size_t>(u(rng) * pr.theta_grid.size())];
  }
  for (int k = 0; k <= st.K(); ++k) st.omega(k) = pr.omega_lower + (pr.omega_upper - pr.omega_lower) * u(rng);
  return st;
}

struct Instance {
  Dataset data;
  DesignIndex idx;
  ChainConfig cfg;
  ModelState state;
};

inline Instance tiny_instance(int n, int R, int K, Rng& rng) {
  Instance in;
  in.data = tiny_dataset(n, R, rng);
  in.idx = build_design(in.data, 6);
  in.cfg.priors.K = K;
  in.cfg.seed = rng();
  in.state = random_state(in.idx, in.cfg.priors, rng);
  return in;
}

// Dense oracle of the f_k (k = 0..K) or g_k (k = 1..K) full conditional.
inline oracle::Moments dense_conditional(const Instance& in, const Eigen::VectorXd& y, bool is_f, int k) {
  const ModelState& st = in.state;
  const DesignIndex& idx = in.idx;
  const Eigen::MatrixXd If = oracle::incidence(idx.f_index, idx.grid_size());
  const Eigen::MatrixXd Ig = oracle::incidence(idx.g_index, idx.curve_count());
  const Eigen::VectorXd fk = If * st.F.col(k);
  const Eigen::VectorXd own = k == 0 ? fk : Eigen::VectorXd((Ig * st.G.col(k - 1)).cwiseProduct(fk));
  const Eigen::VectorXd ystar = y - oracle::fitted(st, idx) + own;
  const double jitter = in.cfg.jitter;
  if (is_f) {
    const double var = k == 0 ? st.nu : 1.0;
    Eigen::MatrixXd prior = oracle::kernel(idx.grid, idx.grid, st.omega(k), var);
    prior.diagonal().array() += jitter * var;
    const Eigen::MatrixXd X =
        k == 0 ? If : Eigen::MatrixXd((Ig * st.G.col(k - 1)).asDiagonal() * If);
    return oracle::linear_model(prior, X, st.tau, ystar);
  }
  double var = 1.0 / st.phi;
  for (int j = 0; j < k; ++j) var /= st.delta(j);
  Eigen::MatrixXd prior = oracle::kernel(idx.curves, idx.curves, st.theta(k - 1), 1.0);
  prior.diagonal().array() += jitter;
  prior *= var;
  const Eigen::MatrixXd X = fk.asDiagonal() * Ig;
  return oracle::linear_model(prior, X, st.tau, ystar);
}

// Largest absolute difference between sampler and dense-oracle conditionals
// over every f_k and g_k of one instance.
inline double conditional_discrepancy(Instance& in) {
  GibbsSampler s(in.idx, in.data.response(), in.cfg);
  s.set_state(in.state);
  double worst = 0.0;
  auto cmp = [&](const GaussianMoments& got, const oracle::Moments& want) {
    worst = std::max(worst, (got.mean - want.mean).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.cov - want.cov).cwiseAbs().maxCoeff());
  };
  const Eigen::VectorXd y = in.data.response();
  for (int k = 0; k <= in.state.K(); ++k) cmp(s.f_conditional(k), dense_conditional(in, y, true, k));
  for (int k = 1; k <= in.state.K(); ++k) cmp(s.g_conditional(k), dense_conditional(in, y, false, k));
  return worst;
}

}  // namespace support
