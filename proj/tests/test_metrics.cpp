#include <doctest.h>

#include <cmath>
#include <numeric>
#include <algorithm>
#include <random>

#include "aabtp/error.hpp"
#include "aabtp/metrics.hpp"
#include "aabtp/random.hpp"
#include "oracles/dense.hpp"

using namespace aabtp;

TEST_CASE("evaluate: trivial cases") {
  const std::vector<double> t{1.0, 4.0, 2.0, 8.0};
  const auto same = evaluate(t, t);
  CHECK(same.mspe == 0.0);
  CHECK(same.mae == 0.0);
  CHECK(same.correlation == doctest::Approx(1.0));
  CHECK(same.n_targets == 4);

  std::vector<double> shifted = t;
  for (auto& v : shifted) v += 3.0;
  const auto s = evaluate(shifted, t);
  CHECK(s.mspe == doctest::Approx(9.0));
  CHECK(s.mae == doctest::Approx(3.0));
  CHECK(s.correlation == doctest::Approx(1.0));

  CHECK_THROWS_AS(evaluate(t, std::vector<double>{1.0}), InputError);
  CHECK_THROWS_AS(evaluate(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}), InputError);
}

TEST_CASE("evaluate matches direct arithmetic on random vectors") {
  Rng rng = make_rng(1);
  std::normal_distribution<double> z(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(10), b(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = z(rng);
      b[i] = 0.5 * a[i] + z(rng);
    }
    double se = 0, ae = 0, ma = 0, mb = 0;
    for (int i = 0; i < 10; ++i) {
      se += (a[i] - b[i]) * (a[i] - b[i]);
      ae += std::abs(a[i] - b[i]);
      ma += a[i] / 10;
      mb += b[i] / 10;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < 10; ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    const auto r = evaluate(a, b);
    CHECK(std::abs(r.mspe - se / 10) < 1e-12);
    CHECK(std::abs(r.mae - ae / 10) < 1e-12);
    CHECK(std::abs(r.correlation - sab / std::sqrt(saa * sbb)) < 1e-12);
    // Jensen: MAE <= sqrt(MSPE)
    CHECK(r.mae <= std::sqrt(r.mspe) + 1e-12);
    CHECK(std::abs(r.correlation) <= 1.0);
  }
}

TEST_CASE("trimmed mean") {
  std::vector<double> v(20);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(trimmed_mean(v, 0.0) == doctest::Approx(10.5));
  CHECK(trimmed_mean(v, 0.05) == doctest::Approx(10.5));
  std::vector<double> skew{1, 2, 3, 4, 5, 6, 7, 8, 9, 100};
  CHECK(trimmed_mean(skew, 0.1) == doctest::Approx(5.5));

  std::vector<double> h(100, 1.0);
  h[37] = 1e6;
  const double with = trimmed_mean(h, 0.05);
  h[37] = 1e12;
  CHECK(trimmed_mean(h, 0.05) == with);
  CHECK(with == 1.0);
  CHECK_THROWS_AS(trimmed_mean(v, 0.5), InputError);
}

TEST_CASE("binomial CDF and critical values against direct summation") {
  for (int n : {1, 5, 8, 30}) {
    for (double p : {0.1, 0.2, 0.3}) {
      for (int k = 0; k <= n; ++k) {
        CHECK(binomial_cdf(k, n, p) == doctest::Approx(oracle::binomial_cdf(k, n, p)).epsilon(1e-10));
      }
    }
  }
  // Binomial(8, 0.10): P(X <= 1) = 0.8131, P(X <= 2) = 0.9619
  CHECK(binomial_critical_value(8, 0.10, 0.9) == 2);
  for (int n : {3, 7, 8, 12}) {
    for (double p : {0.1, 0.2, 0.3}) {
      const int c = binomial_critical_value(n, p, 0.9);
      CHECK(oracle::binomial_cdf(c, n, p) >= 0.9);
      if (c > 0) CHECK(oracle::binomial_cdf(c - 1, n, p) < 0.9);
    }
  }
}

TEST_CASE("coverage check") {
  PredictiveDraws d;
  d.draws.resize(1000, 3);
  Rng rng = make_rng(2);
  for (Eigen::Index i = 0; i < d.draws.size(); ++i) d.draws.data()[i] = std::normal_distribution<double>()(rng);
  d.target_curve = {0, 0, 1};

  std::vector<CurveObservations> inside{{"a", {0, 1}, {0.0, 0.1}}, {"b", {2}, {-0.2}}};
  const auto all = coverage_check(d, inside, 0.05, 0.9);
  CHECK(all.pass_fraction == 1.0);
  CHECK(all.curves[0].count == 0);

  std::vector<CurveObservations> outside{{"a", {0, 1}, {10.0, -10.0}}};
  const auto none = coverage_check(d, outside, 0.05, 0.9);
  CHECK(none.curves[0].count == 2);
  CHECK_FALSE(none.curves[0].pass);
  CHECK(none.pass_fraction == 0.0);

  CHECK_THROWS_AS(coverage_check(d, inside, 0.6, 0.9), InputError);
  std::vector<CurveObservations> bad{{"z", {7}, {0.0}}};
  CHECK_THROWS_AS(coverage_check(d, bad, 0.05, 0.9), InputError);
}

TEST_CASE("well-calibrated predictive passes at about the test level") {
  // Each curve: 7 observations drawn from the same law as the predictive draws.
  Rng rng = make_rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  const int curves = 2000, per = 7;
  PredictiveDraws d;
  d.draws.resize(2000, per);
  for (Eigen::Index i = 0; i < d.draws.size(); ++i) d.draws.data()[i] = z(rng);
  std::vector<CurveObservations> obs;
  for (int c = 0; c < curves; ++c) {
    CurveObservations co{"c" + std::to_string(c), {}, {}};
    for (int j = 0; j < per; ++j) {
      co.target.push_back(j);
      co.y.push_back(z(rng));
    }
    obs.push_back(std::move(co));
  }
  for (double p : {0.05, 0.10, 0.15}) {
    const auto r = coverage_check(d, obs, p, 0.9);
    CHECK(r.pass_fraction >= 0.88);
    CHECK(r.pass_fraction <= 0.99);
  }
}

TEST_CASE("group_observations matches curve id and rounded dose") {
  PredictiveDraws d;
  d.draws = Eigen::MatrixXd::Zero(2, 4);
  d.target_curve = {0, 0, 1, 1};
  d.target_d.resize(4, 1);
  d.target_d << 0.0, 0.38, 0.0, 0.38;
  Dataset data(1, 1);
  data.add({"y", {0.1}, {0.375}, 1.0});
  data.add({"x", {0.2}, {0.0}, 2.0});
  data.add({"y", {0.1}, {0.0}, 3.0});
  const auto g = group_observations(d, {"x", "y"}, data, 2);
  REQUIRE(g.size() == 2);
  CHECK(g[0].curve_id == "y");
  CHECK(g[0].target == std::vector<Eigen::Index>{3, 2});
  CHECK(g[1].target == std::vector<Eigen::Index>{0});
  data.add({"q", {0.3}, {0.0}, 0.0});
  CHECK_THROWS_AS(group_observations(d, {"x", "y"}, data, 2), InputError);
}

TEST_CASE("properties: permutation and monotone-transform invariance") {
  Rng rng = make_rng(9);
  std::vector<double> v(57);
  for (auto& x : v) x = std::normal_distribution<double>()(rng);
  std::vector<double> w = v;
  std::shuffle(w.begin(), w.end(), rng);
  CHECK(trimmed_mean(v, 0.1) == doctest::Approx(trimmed_mean(w, 0.1)).epsilon(1e-14));

  PredictiveDraws d;
  d.draws.resize(200, 6);
  for (Eigen::Index i = 0; i < d.draws.size(); ++i) d.draws.data()[i] = std::normal_distribution<double>()(rng);
  std::vector<CurveObservations> obs{{"a", {0, 1, 2}, {0.1, 2.5, -1.9}}, {"b", {3, 4, 5}, {1.7, -0.2, 0.0}}};
  PredictiveDraws e = d;
  e.draws = d.draws.unaryExpr([](double x) { return std::exp(x); });
  auto eobs = obs;
  for (auto& c : eobs)
    for (auto& y : c.y) y = std::exp(y);
  for (double p : {0.05, 0.1, 0.15}) {
    const auto r1 = coverage_check(d, obs, p, 0.9), r2 = coverage_check(e, eobs, p, 0.9);
    for (std::size_t i = 0; i < r1.curves.size(); ++i) CHECK(r1.curves[i].count == r2.curves[i].count);
  }
}
