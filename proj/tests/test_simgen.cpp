#include <doctest.h>

#include <filesystem>
#include <map>

#include "aabtp/error.hpp"
#include "aabtp/simgen.hpp"

using namespace aabtp;

TEST_CASE("Hill response") {
  CHECK(hill_response(10.0, 2.0, 0.0, 2.0) == 0.0);
  CHECK(hill_response(10.0, 2.0, 2.0, 2.0) == doctest::Approx(5.0));
  CHECK(hill_response(10.0, 0.0, 1.0, 2.0) == 10.0);
  CHECK(hill_response(0.0, 4.5, 3.0, 2.0) == 0.0);
  CHECK(hill_response(8.0, 1.5, 3.0, 3.0) == doctest::Approx(8.0 * 27.0 / (3.375 + 27.0)));
}

TEST_CASE("generate follows the magnitude and half-max formulas") {
  SimConfig cfg;
  cfg.n_curves = 300;
  cfg.seed = 2;
  const SimResult sim = generate(cfg);
  REQUIRE(sim.magnitude.size() == 300);
  CHECK(sim.data.size() == 300 * 7);
  CHECK(sim.truth.size() == sim.data.size());
  bool some_flat = false, some_active = false;
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(sim.magnitude[i] >= 0.0);
    CHECK(sim.half_max[i] == doctest::Approx(std::max(4.5 - sim.magnitude[i], 0.0)));
    some_flat |= sim.magnitude[i] == 0.0;
    some_active |= sim.magnitude[i] > 5.0;
  }
  CHECK(some_flat);
  CHECK(some_active);
  for (std::size_t o = 0; o < sim.data.size(); ++o) {
    const auto& r = sim.data[o];
    CHECK(sim.truth[o].curve_id == r.curve_id);
    CHECK(sim.truth[o].d == r.d[0]);
    for (double s : r.s) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    if (r.d[0] == 0.0) CHECK(sim.truth[o].h == 0.0);
  }
}

TEST_CASE("noise-free simulation equals the truth and seeds are reproducible") {
  SimConfig cfg;
  cfg.n_curves = 50;
  cfg.noise_sd = 0.0;
  cfg.dim_s = 3;
  const SimResult a = generate(cfg);
  for (std::size_t o = 0; o < a.data.size(); ++o) CHECK(a.data[o].y == a.truth[o].h);
  CHECK(a.data.dim_s() == 3);
  const SimResult b = generate(cfg);
  CHECK(b.data[17].y == a.data[17].y);
  cfg.seed = 99;
  CHECK(generate(cfg).data[17].s != a.data[17].s);
}

TEST_CASE("truth CSV round trip") {
  SimConfig cfg;
  cfg.n_curves = 5;
  const SimResult sim = generate(cfg);
  const auto path = std::filesystem::temp_directory_path() / "aabtp_truth_test.csv";
  write_truth_csv(path, sim.truth);
  const auto back = read_truth_csv(path);
  REQUIRE(back.size() == sim.truth.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].curve_id == sim.truth[i].curve_id);
    CHECK(back[i].d == sim.truth[i].d);
    CHECK(back[i].h == sim.truth[i].h);
  }
  std::filesystem::remove(path);
}

TEST_CASE("SimConfig validation") {
  SimConfig cfg;
  cfg.n_curves = 0;
  CHECK_THROWS_AS(generate(cfg), InputError);
  cfg = SimConfig{};
  cfg.doses.clear();
  CHECK_THROWS_AS(generate(cfg), InputError);
  cfg = SimConfig{};
  cfg.noise_sd = -1.0;
  CHECK_THROWS_AS(generate(cfg), InputError);
}

TEST_CASE("properties: 0 <= h <= nu, monotone in dose, bounded maximum") {
  double max_h = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.noise_sd = 0.0;
    const SimResult sim = generate(cfg);
    std::map<std::string, std::size_t> curve;
    for (std::size_t i = 0, c = 0; i < sim.data.size(); ++i) {
      if (curve.emplace(sim.data[i].curve_id, c).second) ++c;
    }
    for (std::size_t i = 0; i < sim.truth.size(); ++i) {
      const double nu = sim.magnitude[curve.at(sim.truth[i].curve_id)];
      CHECK(sim.truth[i].h >= 0.0);
      CHECK(sim.truth[i].h <= nu + 1e-12);
      if (i > 0 && sim.truth[i - 1].curve_id == sim.truth[i].curve_id && sim.truth[i - 1].d <= sim.truth[i].d) {
        CHECK(sim.truth[i - 1].h <= sim.truth[i].h + 1e-12);
      }
      max_h = std::max(max_h, sim.truth[i].h);
    }
  }
  CHECK(max_h > 5.0);
  CHECK(max_h <= 55.0);
}
