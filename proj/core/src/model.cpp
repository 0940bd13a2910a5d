#include "aabtp/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "aabtp/csv.hpp"
#include "aabtp/error.hpp"

namespace aabtp {

std::vector<double> default_theta_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 81; ++i) grid.push_back(i / 20.0);
  return grid;
}

void Priors::validate() const {
  if (K < 1) throw InputError("K must be >= 1");
  if (!(a1 > 0.0)) throw InputError("a1 must be > 0");
  if (theta_grid.empty()) throw InputError("theta grid must be nonempty");
  if (!std::is_sorted(theta_grid.begin(), theta_grid.end()) ||
      std::adjacent_find(theta_grid.begin(), theta_grid.end()) != theta_grid.end()) {
    throw InputError("theta grid must be strictly ascending");
  }
  if (!(theta_grid.front() > 0.0)) throw InputError("theta grid values must be > 0");
  if (!(omega_lower > 0.0) || !(omega_lower < omega_upper)) {
    throw InputError("omega bounds must satisfy 0 < a < b");
  }
  if (!(tau_shape > 0.0) || !(tau_rate > 0.0)) throw InputError("tau prior must be positive");
  if (!(nu_shape > 0.0) || !(nu_rate > 0.0)) throw InputError("nu prior must be positive");
}

void ModelState::validate(const DesignIndex& idx) const {
  const int k = K();
  if (F.rows() != idx.grid_size() || F.cols() != k + 1) {
    throw InputError("ModelState: F must be R x (K+1)");
  }
  if (G.rows() != idx.curve_count()) throw InputError("ModelState: G must be n x K");
  if (delta.size() != k || theta.size() != k || omega.size() != k + 1) {
    throw InputError("ModelState: hyperparameter vector lengths do not match K");
  }
  if (!(tau > 0.0) || !(phi > 0.0) || !(nu > 0.0) || (delta.array() <= 0.0).any() ||
      (theta.array() <= 0.0).any() || (omega.array() <= 0.0).any()) {
    throw InputError("ModelState: hyperparameters must be positive");
  }
}

double mgp_variance(const ModelState& state, int k) {
  if (k < 1 || k > state.K()) {
    throw InputError("mgp_variance: k = " + std::to_string(k) + " outside 1.." +
                     std::to_string(state.K()));
  }
  double precision = state.phi;
  for (int j = 0; j < k; ++j) precision *= state.delta(j);
  return 1.0 / precision;
}

Eigen::VectorXd mgp_variances(const ModelState& state) {
  Eigen::VectorXd out(state.K());
  double precision = state.phi;
  for (int k = 0; k < state.K(); ++k) {
    precision *= state.delta(k);
    out(k) = 1.0 / precision;
  }
  return out;
}

Eigen::VectorXd fitted_values(const ModelState& state, const DesignIndex& idx) {
  const auto N = static_cast<Eigen::Index>(idx.observation_count());
  Eigen::VectorXd out(N);
  for (Eigen::Index o = 0; o < N; ++o) {
    const int r = idx.f_index[o];
    const int i = idx.g_index[o];
    double h = state.F(r, 0);
    for (int k = 1; k <= state.K(); ++k) h += state.G(i, k - 1) * state.F(r, k);
    out(o) = h;
  }
  return out;
}

ModelState initial_state(const DesignIndex& idx, const Priors& priors, Rng& rng) {
  priors.validate();
  const int K = priors.K;
  ModelState s;
  std::normal_distribution<double> small(0.0, 0.1);
  s.F.resize(idx.grid_size(), K + 1);
  s.G.resize(idx.curve_count(), K);
  for (Eigen::Index c = 0; c < s.F.cols(); ++c)
    for (Eigen::Index r = 0; r < s.F.rows(); ++r) s.F(r, c) = small(rng);
  for (Eigen::Index c = 0; c < s.G.cols(); ++c)
    for (Eigen::Index r = 0; r < s.G.rows(); ++r) s.G(r, c) = small(rng);
  s.tau = 1.0;
  s.phi = 1.0;
  s.nu = 1.0;
  s.delta = Eigen::VectorXd::Constant(K, priors.a1);
  // Median of the grid; the lower middle element for even sizes keeps it on the grid.
  const auto& grid = priors.theta_grid;
  s.theta = Eigen::VectorXd::Constant(K, grid[(grid.size() - 1) / 2]);
  s.omega = Eigen::VectorXd::Constant(K + 1, 0.5 * (priors.omega_lower + priors.omega_upper));
  return s;
}

void write_state_csv(std::ostream& out, const ModelState& s) {
  out << "name,indices,value\n";
  const auto scalar = [&](const char* name, double v) {
    out << name << ",," << csv::format(v) << '\n';
  };
  const auto vec = [&](const char* name, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << name << ',' << i << ',' << csv::format(v(i)) << '\n';
  };
  const auto mat = [&](const char* name, const Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        out << name << ',' << r << ' ' << c << ',' << csv::format(m(r, c)) << '\n';
  };
  scalar("tau", s.tau);
  scalar("phi", s.phi);
  scalar("nu", s.nu);
  vec("delta", s.delta);
  vec("theta", s.theta);
  vec("omega", s.omega);
  mat("F", s.F);
  mat("G", s.G);
}

ModelState read_state_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  if (!csv::next_line(in, line, row) || csv::split(line) != std::vector<std::string>{"name", "indices", "value"}) {
    throw ParseError("expected header name,indices,value", row);
  }
  std::map<std::string, double> scalars;
  std::map<std::string, std::map<std::pair<long, long>, double>> arrays;
  while (csv::next_line(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 3) throw ParseError("expected 3 fields", row);
    const double v = csv::parse_double(f[2], row);
    if (f[1].empty()) {
      scalars[f[0]] = v;
      continue;
    }
    std::istringstream ix(f[1]);
    long a = -1, b = 0;
    ix >> a;
    if (!(ix >> b)) b = 0;
    if (a < 0 || b < 0) throw ParseError("bad indices '" + f[1] + "'", row);
    arrays[f[0]][{a, b}] = v;
  }
  const auto need_scalar = [&](const std::string& name) {
    const auto it = scalars.find(name);
    if (it == scalars.end()) throw ParseError("missing scalar " + name, 0);
    return it->second;
  };
  const auto to_matrix = [&](const std::string& name) {
    const auto& entries = arrays[name];
    long rows = 0, cols = 0;
    for (const auto& [ij, v] : entries) {
      rows = std::max(rows, ij.first + 1);
      cols = std::max(cols, ij.second + 1);
    }
    if (static_cast<long>(entries.size()) != rows * cols) {
      throw ParseError("incomplete array " + name, 0);
    }
    Eigen::MatrixXd m(rows, cols);
    for (const auto& [ij, v] : entries) m(ij.first, ij.second) = v;
    return m;
  };
  ModelState s;
  s.tau = need_scalar("tau");
  s.phi = need_scalar("phi");
  s.nu = need_scalar("nu");
  s.delta = to_matrix("delta").col(0);
  s.theta = to_matrix("theta").col(0);
  s.omega = to_matrix("omega").col(0);
  s.F = to_matrix("F");
  s.G = to_matrix("G");
  return s;
}

}  // namespace aabtp
