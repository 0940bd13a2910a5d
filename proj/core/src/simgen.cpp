#include "aabtp/simgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "aabtp/csv.hpp"
#include "aabtp/error.hpp"
#include "aabtp/kernel.hpp"
#include "aabtp/random.hpp"

namespace aabtp {

void SimConfig::validate() const {
  if (dim_s < 1) throw InputError("dim_s must be >= 1");
  if (n_curves < 1) throw InputError("n_curves must be >= 1");
  if (doses.empty()) throw InputError("doses must be nonempty");
  for (double d : doses) {
    if (!(d >= 0.0)) throw InputError("doses must be >= 0");
  }
  if (!(hill_m > 0.0)) throw InputError("hill_m must be > 0");
  if (!(z_scale > 0.0)) throw InputError("z_scale must be > 0");
  if (!(noise_sd >= 0.0)) throw InputError("noise_sd must be >= 0");
}

double hill_response(double magnitude, double half_max, double d, double m) {
  if (d <= 0.0) return 0.0;
  if (half_max <= 0.0) return magnitude;
  const double dm = std::pow(d, m);
  return magnitude * dm / (std::pow(half_max, m) + dm);
}

SimResult generate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Points s(cfg.n_curves, cfg.dim_s);
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = unif(rng);

  const Cholesky chol = robust_cholesky(build_cov(s, s, {cfg.z_scale, 1.0}).entries);
  const Eigen::VectorXd z = chol.lower * standard_normal(cfg.n_curves, rng);

  SimResult out;
  out.data = Dataset(cfg.dim_s, 1);
  const int width = cfg.n_curves < 10000 ? 4 : static_cast<int>(std::log10(cfg.n_curves)) + 1;
  for (int i = 0; i < cfg.n_curves; ++i) {
    const double magnitude = 11.0 * std::max(z(i), 0.0);
    const double half_max = std::max(4.5 - magnitude, 0.0);
    out.magnitude.push_back(magnitude);
    out.half_max.push_back(half_max);

    char id[32];
    std::snprintf(id, sizeof id, "c%0*d", width, i + 1);
    std::vector<double> si(s.row(i).data(), s.row(i).data() + cfg.dim_s);
    for (double d : cfg.doses) {
      const double h = hill_response(magnitude, half_max, d, cfg.hill_m);
      out.data.add({id, si, {d}, h + cfg.noise_sd * noise(rng)});
      out.truth.push_back({id, d, h});
    }
  }
  return out;
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthRow>& truth) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "curve_id,d,h_true\n";
  for (const auto& t : truth) {
    out << t.curve_id << ',' << csv::format(t.d) << ',' << csv::format(t.h) << '\n';
  }
}

std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t row = 0;
  if (!csv::next_line(in, line, row) ||
      csv::split(line) != std::vector<std::string>{"curve_id", "d", "h_true"}) {
    throw ParseError("expected header curve_id,d,h_true", row);
  }
  std::vector<TruthRow> out;
  while (csv::next_line(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 3) throw ParseError("expected 3 fields", row);
    out.push_back({f[0], csv::parse_double(f[1], row), csv::parse_double(f[2], row)});
  }
  return out;
}

}  // namespace aabtp
