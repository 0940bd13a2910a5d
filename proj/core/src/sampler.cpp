#include "aabtp/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <future>
#include <numbers>
#include <string>
#include <thread>

#include <Eigen/Cholesky>

#include "aabtp/error.hpp"

namespace aabtp {

namespace {

// phi ~ Ga(1, 1)
constexpr double kPhiShape = 1.0;
constexpr double kPhiRate = 1.0;

// Lower Cholesky factor of I + scale * W^1/2 C W^1/2, computed in place.
Eigen::MatrixXd factor_B(const Eigen::MatrixXd& corr, double scale, const Eigen::VectorXd& sqrt_w) {
  Eigen::MatrixXd B = (scale * sqrt_w.asDiagonal()) * corr * sqrt_w.asDiagonal();
  B.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(B);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd again = (scale * sqrt_w.asDiagonal()) * corr * sqrt_w.asDiagonal();
    again.diagonal().array() += 1.0;
    return robust_cholesky(again, 1e-12).lower;
  }
  return B;  // lower triangle holds the factor
}

void check_likelihood(const Eigen::MatrixXd& prior, const Eigen::VectorXd& weights,
                      const Eigen::VectorXd& linear) {
  if (prior.rows() != prior.cols() || weights.size() != prior.rows() ||
      linear.size() != prior.rows()) {
    throw InputError("diagonal posterior: dimension mismatch");
  }
  if ((weights.array() < 0.0).any()) throw InputError("diagonal posterior: negative weight");
}

}  // namespace

GaussianMoments diagonal_posterior_moments(const Eigen::MatrixXd& prior,
                                           const Eigen::VectorXd& weights,
                                           const Eigen::VectorXd& linear) {
  check_likelihood(prior, weights, linear);
  const Eigen::VectorXd sqrt_w = weights.array().sqrt();
  const Eigen::MatrixXd LB = factor_B(prior, 1.0, sqrt_w);
  const auto lower = LB.triangularView<Eigen::Lower>();

  // A = LB^{-1} W^1/2 prior, so prior W^1/2 B^{-1} W^1/2 prior = A'A.
  const Eigen::MatrixXd A = lower.solve(sqrt_w.asDiagonal() * prior);
  const Eigen::VectorXd prior_b = prior * linear;
  const Eigen::VectorXd z = lower.solve(sqrt_w.cwiseProduct(prior_b));

  GaussianMoments out;
  out.mean = prior_b - A.transpose() * z;
  out.cov = prior - A.transpose() * A;
  return out;
}

namespace {

// Draw with prior = scale * corr and prior_chol a factor of corr.
Eigen::VectorXd scaled_posterior_draw(const Eigen::MatrixXd& corr, const Eigen::MatrixXd& corr_chol,
                                      double scale, const Eigen::VectorXd& weights,
                                      const Eigen::VectorXd& linear, Rng& rng) {
  const Eigen::Index m = corr.rows();
  const Eigen::VectorXd sqrt_w = weights.array().sqrt();
  const Eigen::MatrixXd LB = factor_B(corr, scale, sqrt_w);
  const auto lower = LB.triangularView<Eigen::Lower>();

  // x = prior^{-1}-free form of (prior^{-1} + W)^{-1} (b + prior^{-1} u + W^1/2 v)
  // with u ~ N(0, prior), v ~ N(0, I).
  Eigen::VectorXd u = corr_chol.triangularView<Eigen::Lower>() * standard_normal(m, rng);
  u *= std::sqrt(scale);
  const Eigen::VectorXd c = linear + sqrt_w.cwiseProduct(standard_normal(m, rng));
  Eigen::VectorXd t = u;
  t.noalias() += scale * (corr.selfadjointView<Eigen::Lower>() * c);
  Eigen::VectorXd r = sqrt_w.cwiseProduct(t);
  lower.solveInPlace(r);
  lower.transpose().solveInPlace(r);
  r = sqrt_w.cwiseProduct(r);
  t.noalias() -= scale * (corr.selfadjointView<Eigen::Lower>() * r);
  return t;
}

}  // namespace

Eigen::VectorXd diagonal_posterior_draw(const Eigen::MatrixXd& prior,
                                        const Eigen::MatrixXd& prior_chol,
                                        const Eigen::VectorXd& weights,
                                        const Eigen::VectorXd& linear, Rng& rng) {
  check_likelihood(prior, weights, linear);
  return scaled_posterior_draw(prior, prior_chol, 1.0, weights, linear, rng);
}

void ChainConfig::validate() const {
  priors.validate();
  if (n_iter < 1) throw InputError("n_iter must be >= 1");
  if (burn_in < 0 || burn_in >= n_iter) throw InputError("burn_in must be in [0, n_iter)");
  if (thin < 1) throw InputError("thin must be >= 1");
  if (!(rw_step > 0.0)) throw InputError("rw_step must be > 0");
  if (!(jitter >= 0.0)) throw InputError("jitter must be >= 0");
  if (progress_every < 0) throw InputError("progress_every must be >= 0");
}

GibbsSampler::GibbsSampler(const DesignIndex& idx, Eigen::VectorXd y, ChainConfig cfg)
    : idx_(idx),
      y_(std::move(y)),
      cfg_(std::move(cfg)),
      rng_(make_rng(cfg_.seed)),
      s_cache_(idx_.curves, cfg_.jitter) {
  cfg_.validate();
  if (static_cast<std::size_t>(y_.size()) != idx_.observation_count()) {
    throw InputError("GibbsSampler: response length does not match the design");
  }
  state_ = initial_state(idx_, cfg_.priors, rng_);
  s_cache_.warm(cfg_.priors.theta_grid);
  refresh_residual();
}

void GibbsSampler::set_state(ModelState state) {
  state.validate(idx_);
  state_ = std::move(state);
  refresh_residual();
}

void GibbsSampler::set_response(Eigen::VectorXd y) {
  if (y.size() != y_.size()) throw InputError("set_response: length mismatch");
  y_ = std::move(y);
  refresh_residual();
}

void GibbsSampler::refresh_residual() { resid_ = y_ - fitted_values(state_, idx_); }

Eigen::VectorXd GibbsSampler::component(int k) const {
  if (k < 0 || k > state_.K()) throw InputError("component index out of range");
  const auto N = static_cast<Eigen::Index>(idx_.observation_count());
  Eigen::VectorXd out(N);
  for (Eigen::Index o = 0; o < N; ++o) {
    const double f = state_.F(idx_.f_index[o], k);
    out(o) = k == 0 ? f : state_.G(idx_.g_index[o], k - 1) * f;
  }
  return out;
}

Eigen::VectorXd GibbsSampler::partial_residual(int k) const { return resid_ + component(k); }

GibbsSampler::Likelihood GibbsSampler::f_likelihood(int k, const Eigen::VectorXd& ystar) const {
  Likelihood like{Eigen::VectorXd::Zero(idx_.grid_size()), Eigen::VectorXd::Zero(idx_.grid_size())};
  for (std::size_t o = 0; o < idx_.observation_count(); ++o) {
    const double x = k == 0 ? 1.0 : state_.G(idx_.g_index[o], k - 1);
    const int r = idx_.f_index[o];
    like.weights(r) += x * x;
    like.linear(r) += x * ystar(static_cast<Eigen::Index>(o));
  }
  like.weights *= state_.tau;
  like.linear *= state_.tau;
  return like;
}

GibbsSampler::Likelihood GibbsSampler::g_likelihood(int k, const Eigen::VectorXd& ystar) const {
  Likelihood like{Eigen::VectorXd::Zero(idx_.curve_count()),
                  Eigen::VectorXd::Zero(idx_.curve_count())};
  for (std::size_t o = 0; o < idx_.observation_count(); ++o) {
    const double x = state_.F(idx_.f_index[o], k);
    const int i = idx_.g_index[o];
    like.weights(i) += x * x;
    like.linear(i) += x * ystar(static_cast<Eigen::Index>(o));
  }
  like.weights *= state_.tau;
  like.linear *= state_.tau;
  return like;
}

Eigen::MatrixXd GibbsSampler::f_prior(int k, double omega) const {
  const KernelParams p{omega, k == 0 ? state_.nu : 1.0};
  return build_cov(idx_.grid, idx_.grid, p, cfg_.jitter).entries;
}

GaussianMoments GibbsSampler::f_conditional(int k) {
  if (k < 0 || k > state_.K()) throw InputError("f_conditional: k out of range");
  const Eigen::VectorXd ystar = partial_residual(k);
  const auto like = f_likelihood(k, ystar);
  return diagonal_posterior_moments(f_prior(k, state_.omega(k)), like.weights, like.linear);
}

GaussianMoments GibbsSampler::g_conditional(int k) {
  if (k < 1 || k > state_.K()) throw InputError("g_conditional: k out of range");
  const Eigen::VectorXd ystar = partial_residual(k);
  const auto like = g_likelihood(k, ystar);
  const double var = mgp_variance(state_, k);
  const Eigen::MatrixXd prior = var * s_cache_.get(state_.theta(k - 1)).corr;
  return diagonal_posterior_moments(prior, like.weights, like.linear);
}

Eigen::VectorXd GibbsSampler::draw_f(int k, const Eigen::VectorXd& ystar, Rng& rng) const {
  const auto like = f_likelihood(k, ystar);
  Eigen::MatrixXd prior = f_prior(k, state_.omega(k));
  Cholesky chol;
  try {
    chol = robust_cholesky(prior, cfg_.jitter);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (f_" + std::to_string(k) + ", iteration " +
                         std::to_string(iteration_) + ")");
  }
  prior.diagonal().array() += chol.extra_jitter;
  return diagonal_posterior_draw(prior, chol.lower, like.weights, like.linear, rng);
}

void GibbsSampler::update_f(int k) {
  if (k < 0 || k > state_.K()) throw InputError("update_f: k out of range");
  const Eigen::VectorXd ystar = partial_residual(k);
  state_.F.col(k) = draw_f(k, ystar, rng_);
  resid_ = ystar - component(k);
}

void GibbsSampler::update_g(int k) {
  if (k < 1 || k > state_.K()) throw InputError("update_g: k out of range");
  const Eigen::VectorXd ystar = partial_residual(k);
  const auto like = g_likelihood(k, ystar);
  const double var = mgp_variance(state_, k);
  const auto& entry = s_cache_.get(state_.theta(k - 1));
  state_.G.col(k - 1) = scaled_posterior_draw(entry.corr, entry.chol.lower, var, like.weights, like.linear, rng_);
  resid_ = ystar - component(k);
}

Eigen::VectorXd GibbsSampler::g_quadratic_forms() {
  Eigen::VectorXd q(state_.K());
  for (int k = 0; k < state_.K(); ++k) {
    const auto& entry = s_cache_.get(state_.theta(k));
    const Eigen::VectorXd v = entry.chol.lower.triangularView<Eigen::Lower>().solve(state_.G.col(k));
    q(k) = v.squaredNorm();
  }
  return q;
}

void GibbsSampler::update_shrinkage() {
  const int K = state_.K();
  const double n = static_cast<double>(idx_.curve_count());
  const Eigen::VectorXd q = g_quadratic_forms();

  double rate = kPhiRate;
  double prod = 1.0;
  for (int i = 0; i < K; ++i) {
    prod *= state_.delta(i);
    rate += 0.5 * prod * q(i);
  }
  state_.phi = gamma_rate(kPhiShape + 0.5 * n * K, rate, rng_);

  for (int k = 0; k < K; ++k) {
    // sum over i >= k of prod_{j <= i, j != k} delta_j * q_i
    double partial = 1.0;
    for (int j = 0; j < k; ++j) partial *= state_.delta(j);
    double sum = 0.0;
    for (int i = k; i < K; ++i) {
      if (i > k) partial *= state_.delta(i);
      sum += partial * q(i);
    }
    const double shape = cfg_.priors.a1 + 0.5 * n * (K - k);
    state_.delta(k) = gamma_rate(shape, 1.0 + 0.5 * state_.phi * sum, rng_);
  }
}

void GibbsSampler::update_tau() {
  refresh_residual();
  const double N = static_cast<double>(y_.size());
  state_.tau = gamma_rate(cfg_.priors.tau_shape + 0.5 * N,
                          cfg_.priors.tau_rate + 0.5 * resid_.squaredNorm(), rng_);
}

void GibbsSampler::update_theta() {
  const auto& grid = cfg_.priors.theta_grid;
  const int K = state_.K();
  const Eigen::VectorXd var = mgp_variances(state_);
  Eigen::MatrixXd logp(static_cast<Eigen::Index>(grid.size()), K);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto& entry = s_cache_.get(grid[j]);
    const Eigen::MatrixXd v = entry.chol.lower.triangularView<Eigen::Lower>().solve(state_.G);
    const double half_logdet = 0.5 * entry.chol.log_det();
    for (int k = 0; k < K; ++k) {
      logp(static_cast<Eigen::Index>(j), k) = -half_logdet - 0.5 * v.col(k).squaredNorm() / var(k);
    }
  }
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd col = logp.col(k);
    state_.theta(k) = grid[sample_log_weights({col.data(), static_cast<std::size_t>(col.size())}, rng_)];
  }
}

double GibbsSampler::f_log_density(int k, double omega) const {
  Eigen::MatrixXd prior = f_prior(k, omega);
  const Cholesky chol = robust_cholesky(prior, cfg_.jitter);
  const Eigen::VectorXd v = chol.lower.triangularView<Eigen::Lower>().solve(state_.F.col(k));
  return -0.5 * chol.log_det() - 0.5 * v.squaredNorm();
}

void GibbsSampler::update_omega() {
  const double a = cfg_.priors.omega_lower;
  const double b = cfg_.priors.omega_upper;
  std::normal_distribution<double> step(0.0, cfg_.rw_step);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k <= state_.K(); ++k) {
    const double current = state_.omega(k);
    double proposal = current + step(rng_);
    while (proposal < a || proposal > b) {
      proposal = proposal < a ? 2.0 * a - proposal : 2.0 * b - proposal;
    }
    const double log_ratio = f_log_density(k, proposal) - f_log_density(k, current);
    ++omega_proposed_;
    if (std::log(unif(rng_)) < log_ratio) {
      state_.omega(k) = proposal;
      ++omega_accepted_;
    }
  }
}

void GibbsSampler::update_nu() {
  const Eigen::MatrixXd corr = build_cov(idx_.grid, idx_.grid, {state_.omega(0), 1.0}, cfg_.jitter).entries;
  const Cholesky chol = robust_cholesky(corr, cfg_.jitter);
  const Eigen::VectorXd v = chol.lower.triangularView<Eigen::Lower>().solve(state_.F.col(0));
  const double R = static_cast<double>(idx_.grid_size());
  const double precision = gamma_rate(cfg_.priors.nu_shape + 0.5 * R,
                                      cfg_.priors.nu_rate + 0.5 * v.squaredNorm(), rng_);
  state_.nu = 1.0 / precision;
}

void GibbsSampler::update_scales() {
  update_theta();
  update_omega();
  update_nu();
}

void GibbsSampler::parallel_f_updates() {
  const int K = state_.K();
  std::vector<std::future<Eigen::VectorXd>> jobs;
  jobs.reserve(K + 1);
  for (int k = 0; k <= K; ++k) {
    jobs.push_back(std::async(std::launch::async, [this, k] {
      Rng rng = make_rng(cfg_.seed, (static_cast<std::uint64_t>(iteration_) << 16) + k + 1);
      return draw_f(k, partial_residual(k), rng);
    }));
  }
  std::vector<Eigen::VectorXd> cols;
  for (auto& job : jobs) cols.push_back(job.get());
  for (int k = 0; k <= K; ++k) state_.F.col(k) = cols[k];
  refresh_residual();
}

void GibbsSampler::sweep() {
  ++iteration_;
  refresh_residual();
  if (cfg_.parallel_f) {
    parallel_f_updates();
  } else {
    for (int k = 0; k <= state_.K(); ++k) update_f(k);
  }
  for (int k = 1; k <= state_.K(); ++k) update_g(k);
  update_shrinkage();
  update_tau();
  update_scales();
}

double GibbsSampler::log_likelihood() const {
  const double N = static_cast<double>(y_.size());
  const Eigen::VectorXd r = y_ - fitted_values(state_, idx_);
  return 0.5 * N * std::log(state_.tau / (2.0 * std::numbers::pi)) - 0.5 * state_.tau * r.squaredNorm();
}

double GibbsSampler::omega_acceptance() const {
  return omega_proposed_ == 0 ? 0.0 : static_cast<double>(omega_accepted_) / omega_proposed_;
}

PosteriorSamples run_chain(const Dataset& data, const DesignIndex& idx, const ChainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw InputError("run_chain: empty dataset");
  if (data.size() != idx.observation_count()) {
    throw InputError("run_chain: dataset and design index disagree on N");
  }
  GibbsSampler sampler(idx, data.response(), cfg);
  const int K = cfg.priors.K;

  PosteriorSamples out;
  out.priors = cfg.priors;
  out.jitter = cfg.jitter;
  out.states.reserve(static_cast<std::size_t>((cfg.n_iter - cfg.burn_in) / cfg.thin));
  auto& tau = out.traces["tau"];
  auto& phi = out.traces["phi"];
  auto& nu = out.traces["nu"];
  auto& loglik = out.traces["loglik"];
  std::vector<std::vector<double>*> varsigma;
  for (int k = 1; k <= K; ++k) varsigma.push_back(&out.traces["varsigma_" + std::to_string(k)]);

  for (int t = 1; t <= cfg.n_iter; ++t) {
    sampler.sweep();
    const auto& s = sampler.state();
    tau.push_back(s.tau);
    phi.push_back(s.phi);
    nu.push_back(s.nu);
    loglik.push_back(sampler.log_likelihood());
    const Eigen::VectorXd var = mgp_variances(s);
    for (int k = 0; k < K; ++k) varsigma[k]->push_back(var(k));
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) {
      out.states.push_back(s);
      out.iterations.push_back(t);
    }
    if (cfg.progress_every > 0 && t % cfg.progress_every == 0) {
      const long active = (var.array() >= 1.0).count();
      std::fprintf(stderr, "[aabtp] iteration %d/%d  tau=%.4g  loglik=%.6g  active=%ld\n", t,
                   cfg.n_iter, s.tau, loglik.back(), active);
    }
  }
  out.omega_acceptance = sampler.omega_acceptance();
  return out;
}

std::vector<PosteriorSamples> run_chains(const Dataset& data, const DesignIndex& idx,
                                         const ChainConfig& cfg, int chains) {
  if (chains < 1) throw InputError("chains must be >= 1");
  if (chains == 1) return {run_chain(data, idx, cfg)};
  std::vector<PosteriorSamples> out(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> threads;
  for (int c = 0; c < chains; ++c) {
    threads.emplace_back([&, c] {
      try {
        ChainConfig chain_cfg = cfg;
        chain_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c) + 1);
        out[c] = run_chain(data, idx, chain_cfg);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace aabtp
