#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aabtp/error.hpp"
#include "aabtp/predict.hpp"
#include "aabtp/sampler.hpp"
#include "support.hpp"

using namespace aabtp;

namespace {

Points random_points(Eigen::Index n, Eigen::Index dim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Points p(n, dim);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

PosteriorSamples short_fit(support::Instance& in, int iters, int burn) {
  in.cfg.n_iter = iters;
  in.cfg.burn_in = burn;
  return run_chain(in.data, in.idx, in.cfg);
}

}  // namespace

TEST_CASE("conditional moments match dense joint-MVN conditioning") {
  Rng rng = make_rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Points obs = random_points(3, 2, rng);
    const Points nw = random_points(2, 2, rng);
    const Eigen::VectorXd v = standard_normal(3, rng);
    const KernelParams p{0.5 + trial * 0.3, 1.5};
    const double jitter = 1e-8;
    const auto got = conditional_moments(obs, v, nw, p, jitter);
    Eigen::MatrixXd k11 = oracle::kernel(obs, obs, p.scale, p.variance);
    k11.diagonal().array() += jitter * p.variance;
    Eigen::MatrixXd k22 = oracle::kernel(nw, nw, p.scale, p.variance);
    k22.diagonal().array() += jitter * p.variance;
    const auto want = oracle::conditional_normal(k11, oracle::kernel(obs, nw, p.scale, p.variance), k22, v);
    CHECK((got.mean - want.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((got.cov - want.cov).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("conditioning interpolates and reverts to the prior far away") {
  Rng rng = make_rng(4);
  const Points obs = random_points(4, 1, rng);
  const Eigen::VectorXd v = standard_normal(4, rng);
  const auto at = conditional_moments(obs, v, obs, {1.0, 2.0}, 1e-12);
  CHECK((at.mean - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(at.cov.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd draw = conditional_draw(obs, v, obs, {1.0, 2.0}, rng, 1e-12);
  CHECK(draw == v);

  Points far(1, 1);
  far << 1e3;
  const auto away = conditional_moments(obs, v, far, {1.0, 2.0});
  CHECK(std::abs(away.mean(0)) < 1e-12);
  CHECK(away.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("conditional input validation") {
  const Points a = Points::Zero(2, 1);
  CHECK_THROWS_AS(conditional_moments(a, Eigen::VectorXd::Zero(3), a, {}), InputError);
  CHECK_THROWS_AS(conditional_moments(a, Eigen::VectorXd::Zero(2), Points::Zero(1, 2), {}), InputError);
}

TEST_CASE("quantiles and summaries") {
  std::vector<double> xs(100);
  std::iota(xs.begin(), xs.end(), 1.0);
  // position q (n - 1): 0.05 * 99 = 4.95 -> 5.95; 0.95 * 99 = 94.05 -> 95.05
  CHECK(empirical_quantile(xs, 0.05) == doctest::Approx(5.95));
  CHECK(empirical_quantile(xs, 0.95) == doctest::Approx(95.05));
  CHECK(empirical_quantile(xs, 0.0) == 1.0);
  CHECK(empirical_quantile(xs, 1.0) == 100.0);

  PredictiveDraws d;
  d.draws = Eigen::MatrixXd::Constant(7, 2, 3.5);
  for (const auto& s : summarize(d, 0.9)) {
    CHECK(s.mean == 3.5);
    CHECK(s.lower == 3.5);
    CHECK(s.upper == 3.5);
  }

  d.draws.resize(100, 1);
  for (int i = 0; i < 100; ++i) d.draws(i, 0) = 100 - i;
  const auto s = summarize(d, 0.9).front();
  CHECK(s.lower == doctest::Approx(5.95));
  CHECK(s.upper == doctest::Approx(95.05));
  CHECK(s.mean == doctest::Approx(50.5));

  Rng rng = make_rng(6);
  d.draws = standard_normal(100000, rng);
  const auto n = summarize(d, 0.9).front();
  CHECK(std::abs(n.lower + 1.6449) < 0.05);
  CHECK(std::abs(n.upper - 1.6449) < 0.05);
}

TEST_CASE("prediction at a training curve reproduces its fitted values") {
  Rng rng = make_rng(9);
  support::Instance in = support::tiny_instance(4, 3, 2, rng);
  const PosteriorSamples ps = short_fit(in, 30, 10);
  Points at(1, 2);
  at.row(0) = in.idx.curves.row(2);
  PredictOptions opts;
  opts.jitter = 1e-12;
  const PredictiveDraws pd = predict_surface(ps, in.idx, at, std::nullopt, opts);
  REQUIRE(pd.target_count() == in.idx.grid_size());
  for (std::size_t t = 0; t < ps.size(); ++t) {
    const ModelState& st = ps.states[t];
    for (Eigen::Index r = 0; r < in.idx.grid_size(); ++r) {
      double h = st.F(r, 0);
      for (int k = 1; k <= st.K(); ++k) h += st.G(2, k - 1) * st.F(r, k);
      CHECK(std::abs(pd.draws(static_cast<Eigen::Index>(t), r) - h) < 1e-10);
    }
  }
}

TEST_CASE("all-zero loadings give the baseline f_0 draws") {
  Rng rng = make_rng(10);
  support::Instance in = support::tiny_instance(3, 3, 2, rng);
  PosteriorSamples ps = short_fit(in, 6, 2);
  for (auto& st : ps.states) {
    st.G.setZero();
    st.F.rightCols(st.K()).setZero();
  }
  const Points nw = random_points(3, 2, rng);
  // On the training grid f_k = 0 exactly, so only f_0 is left.
  const PredictiveDraws pd = predict_surface(ps, in.idx, nw, std::nullopt, {});
  const Eigen::Index R = in.idx.grid_size();
  for (Eigen::Index t = 0; t < pd.draws.rows(); ++t)
    for (Eigen::Index a = 0; a < 3; ++a)
      for (Eigen::Index b = 0; b < R; ++b)
        CHECK(pd.draws(t, a * R + b) == ps.states[static_cast<std::size_t>(t)].F(b, 0));
}

TEST_CASE("layout, determinism and noise") {
  Rng rng = make_rng(12);
  support::Instance in = support::tiny_instance(4, 3, 2, rng);
  const PosteriorSamples ps = short_fit(in, 60, 10);
  const Points nw = random_points(2, 2, rng);
  PredictOptions opts;
  opts.seed = 5;
  const PredictiveDraws a = predict_surface(ps, in.idx, nw, std::nullopt, opts);
  CHECK(a.target_count() == 2 * in.idx.grid_size());
  CHECK(a.target_curve[in.idx.grid_size()] == 1);
  CHECK(a.target_d.row(1) == in.idx.grid.row(1));
  CHECK(a.draws.rows() == static_cast<Eigen::Index>(ps.size()));
  const PredictiveDraws b = predict_surface(ps, in.idx, nw, std::nullopt, opts);
  CHECK(a.draws == b.draws);

  opts.mode = PredictMode::Marginal;
  const PredictiveDraws m = predict_surface(ps, in.idx, nw, std::nullopt, opts);
  CHECK(m.draws.allFinite());

  opts.mode = PredictMode::Joint;
  opts.include_noise = true;
  const PredictiveDraws noisy = predict_surface(ps, in.idx, nw, std::nullopt, opts);
  CHECK(noisy.noise_included);
  auto var = [](const Eigen::VectorXd& x) { return (x.array() - x.mean()).square().mean(); };
  for (Eigen::Index j = 0; j < a.target_count(); ++j) {
    // Same seed, same latent stream; the noise is added on top.
    CHECK(var(noisy.draws.col(j)) >= 0.5 * var(a.draws.col(j)));
  }
  CHECK_THROWS_AS(predict_surface(PosteriorSamples{}, in.idx, nw, std::nullopt, {}), InputError);
  CHECK_THROWS_AS(predict_surface(ps, in.idx, Points::Zero(1, 3), std::nullopt, {}), InputError);
}

TEST_CASE("joint and marginal modes agree in distribution per target") {
  Rng rng = make_rng(14);
  support::Instance in = support::tiny_instance(4, 2, 1, rng);
  PosteriorSamples ps = short_fit(in, 3, 2);
  ps.states.assign(20000, ps.states.front());
  const Points nw = random_points(2, 2, rng);
  PredictOptions opts;
  const PredictiveDraws j = predict_surface(ps, in.idx, nw, std::nullopt, opts);
  opts.mode = PredictMode::Marginal;
  const PredictiveDraws m = predict_surface(ps, in.idx, nw, std::nullopt, opts);
  for (Eigen::Index c = 0; c < j.target_count(); ++c) {
    const double sj = std::sqrt((j.draws.col(c).array() - j.draws.col(c).mean()).square().mean());
    const double sm = std::sqrt((m.draws.col(c).array() - m.draws.col(c).mean()).square().mean());
    CHECK(std::abs(j.draws.col(c).mean() - m.draws.col(c).mean()) < 0.05 * (sj + 1e-3) + 1e-3);
    CHECK(sm == doctest::Approx(sj).epsilon(0.05));
  }
}

TEST_CASE("properties: variance grows with distance, intervals bracket the median") {
  Rng rng = make_rng(15);
  const Points obs = random_points(5, 2, rng);
  const Eigen::VectorXd v = standard_normal(5, rng);
  double last = -1.0;
  for (double r : {0.0, 0.1, 0.3, 0.6, 1.0, 2.0, 5.0}) {
    Points p(1, 2);
    p << 1.0 + r, 1.0 + r;
    const double var = conditional_moments(obs, v, p, {1.3, 1.0}).cov(0, 0);
    CHECK(var >= last - 1e-12);
    last = var;
  }

  PredictiveDraws d;
  d.draws.resize(301, 20);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (Eigen::Index i = 0; i < d.draws.size(); ++i) d.draws.data()[i] = std::pow(u(rng), 3);
  for (double level : {0.5, 0.8, 0.9, 0.99}) {
    const auto s = summarize(d, level);
    for (Eigen::Index j = 0; j < 20; ++j) {
      std::vector<double> col(d.draws.col(j).data(), d.draws.col(j).data() + 301);
      std::sort(col.begin(), col.end());
      CHECK(s[static_cast<std::size_t>(j)].lower <= col[150]);
      CHECK(col[150] <= s[static_cast<std::size_t>(j)].upper);
    }
  }
}
