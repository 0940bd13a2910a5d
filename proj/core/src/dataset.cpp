#include "aabtp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "aabtp/csv.hpp"
#include "aabtp/error.hpp"

namespace aabtp {

Dataset::Dataset(int dim_s, int dim_d) : dim_s_(dim_s), dim_d_(dim_d) {
  if (dim_s < 1 || dim_d < 1) throw InputError("Dataset: dimensions must be >= 1");
}

void Dataset::add(Observation obs) {
  if (static_cast<int>(obs.s.size()) != dim_s_ || static_cast<int>(obs.d.size()) != dim_d_) {
    throw InputError("Dataset::add: observation dimensions do not match the dataset");
  }
  rows_.push_back(std::move(obs));
}

std::vector<std::string> Dataset::curve_ids() const {
  std::vector<std::string> ids;
  std::set<std::string_view> seen;
  for (const auto& r : rows_) {
    if (seen.insert(r.curve_id).second) ids.push_back(r.curve_id);
  }
  return ids;
}

std::size_t Dataset::curve_count() const {
  std::set<std::string_view> seen;
  for (const auto& r : rows_) seen.insert(r.curve_id);
  return seen.size();
}

Eigen::VectorXd Dataset::response() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows_[i].y;
  return y;
}

void Dataset::standardize_s() {
  if (rows_.empty()) return;
  // Moments over curves, not rows, so heavily sampled curves do not dominate.
  std::map<std::string_view, const std::vector<double>*> curves;
  for (const auto& r : rows_) curves.emplace(r.curve_id, &r.s);
  const double n = static_cast<double>(curves.size());
  std::vector<double> mean(dim_s_, 0.0), sd(dim_s_, 0.0);
  for (const auto& [id, s] : curves) {
    for (int j = 0; j < dim_s_; ++j) mean[j] += (*s)[j] / n;
  }
  for (const auto& [id, s] : curves) {
    for (int j = 0; j < dim_s_; ++j) sd[j] += ((*s)[j] - mean[j]) * ((*s)[j] - mean[j]);
  }
  for (int j = 0; j < dim_s_; ++j) {
    sd[j] = n > 1 ? std::sqrt(sd[j] / (n - 1)) : 0.0;
    if (!(sd[j] > 0.0)) sd[j] = 1.0;
  }
  for (auto& r : rows_) {
    for (int j = 0; j < dim_s_; ++j) r.s[j] = (r.s[j] - mean[j]) / sd[j];
  }
}

namespace {

struct Layout {
  int dim_s = 0;
  int dim_d = 0;
};

bool column_run(const std::vector<std::string>& header, std::size_t& pos, char prefix,
                int& count) {
  count = 0;
  while (pos < header.size() && header[pos] == std::string(1, prefix) + std::to_string(count + 1)) {
    ++count;
    ++pos;
  }
  return count > 0;
}

Layout parse_header(const std::vector<std::string>& header) {
  Layout layout;
  std::size_t pos = 0;
  if (header.empty() || header[0] != "curve_id") {
    throw ParseError("header must start with curve_id", 1);
  }
  pos = 1;
  if (!column_run(header, pos, 's', layout.dim_s)) throw ParseError("missing column s1", 1);
  if (!column_run(header, pos, 'd', layout.dim_d)) throw ParseError("missing column d1", 1);
  if (pos >= header.size() || header[pos] != "y") throw ParseError("missing column y", 1);
  if (pos + 1 != header.size()) {
    throw ParseError("unexpected column '" + header[pos + 1] + "'", 1);
  }
  return layout;
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  if (!csv::next_line(in, line, row)) throw ParseError("empty file", 0);
  const Layout layout = parse_header(csv::split(line));
  Dataset data(layout.dim_s, layout.dim_d);
  const std::size_t width = 1 + layout.dim_s + layout.dim_d + 1;

  std::unordered_map<std::string, std::vector<double>> curve_s;
  while (csv::next_line(in, line, row)) {
    const auto fields = csv::split(line);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()),
                       row);
    }
    Observation obs;
    obs.curve_id = fields[0];
    if (obs.curve_id.empty()) throw ParseError("empty curve_id", row);
    std::size_t f = 1;
    for (int j = 0; j < layout.dim_s; ++j) obs.s.push_back(csv::parse_double(fields[f++], row));
    for (int j = 0; j < layout.dim_d; ++j) obs.d.push_back(csv::parse_double(fields[f++], row));
    obs.y = csv::parse_double(fields[f], row);

    const auto [it, inserted] = curve_s.emplace(obs.curve_id, obs.s);
    if (!inserted && it->second != obs.s) {
      throw ParseError("curve '" + obs.curve_id + "' has a different s vector than its first row",
                       row);
    }
    data.add(std::move(obs));
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "curve_id";
  for (int j = 1; j <= data.dim_s(); ++j) out << ",s" << j;
  for (int j = 1; j <= data.dim_d(); ++j) out << ",d" << j;
  out << ",y\n";
  for (const auto& r : data.rows()) {
    out << r.curve_id;
    for (double v : r.s) out << ',' << csv::format(v);
    for (double v : r.d) out << ',' << csv::format(v);
    out << ',' << csv::format(r.y) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, data);
}

double round_significant(double value, int sig_digits) {
  if (sig_digits < 1) throw InputError("sig_digits must be >= 1");
  if (value == 0.0 || !std::isfinite(value)) return value;
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(value))));
  const int decimals = sig_digits - 1 - magnitude;
  // Scale by an exact power of ten on whichever side keeps the result representable.
  if (decimals >= 0) {
    const double factor = std::pow(10.0, decimals);
    return std::round(value * factor) / factor;
  }
  const double factor = std::pow(10.0, -decimals);
  return std::round(value / factor) * factor;
}

DesignIndex build_design(const Dataset& data, int sig_digits) {
  if (data.empty()) throw InputError("build_design: empty dataset");
  if (sig_digits < 1) throw InputError("build_design: sig_digits must be >= 1");

  DesignIndex idx;
  idx.sig_digits = sig_digits;
  const std::size_t N = data.size();
  const int P = data.dim_s();
  const int Q = data.dim_d();

  std::vector<std::vector<double>> rounded(N);
  std::map<std::vector<double>, int> grid_pos;  // lexicographic
  for (std::size_t o = 0; o < N; ++o) {
    rounded[o].reserve(Q);
    for (double v : data[o].d) rounded[o].push_back(round_significant(v, sig_digits));
    grid_pos.emplace(rounded[o], 0);
  }
  idx.grid.resize(static_cast<Eigen::Index>(grid_pos.size()), Q);
  int r = 0;
  for (auto& [point, pos] : grid_pos) {
    pos = r;
    for (int j = 0; j < Q; ++j) idx.grid(r, j) = point[j];
    ++r;
  }

  std::unordered_map<std::string, int> curve_pos;
  std::vector<const std::vector<double>*> curve_s;
  idx.f_index.resize(N);
  idx.g_index.resize(N);
  for (std::size_t o = 0; o < N; ++o) {
    const auto& obs = data[o];
    const auto [it, inserted] = curve_pos.emplace(obs.curve_id, static_cast<int>(curve_s.size()));
    if (inserted) {
      curve_s.push_back(&obs.s);
      idx.curve_ids.push_back(obs.curve_id);
    } else if (*curve_s[it->second] != obs.s) {
      throw InputError("build_design: curve '" + obs.curve_id + "' has inconsistent s");
    }
    idx.g_index[o] = it->second;
    idx.f_index[o] = grid_pos.at(rounded[o]);
  }
  idx.curves.resize(static_cast<Eigen::Index>(curve_s.size()), P);
  for (std::size_t i = 0; i < curve_s.size(); ++i) {
    for (int j = 0; j < P; ++j) idx.curves(static_cast<Eigen::Index>(i), j) = (*curve_s[i])[j];
  }
  return idx;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, std::size_t n_train,
                                          std::uint64_t seed) {
  const auto ids = data.curve_ids();
  if (n_train == 0 || n_train >= ids.size()) {
    throw InputError("split_holdout: n_train must be in (0, " + std::to_string(ids.size()) + ")");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates: std::shuffle's draw pattern is implementation-defined.
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::set<std::string_view> train_ids;
  for (std::size_t i = 0; i < n_train; ++i) train_ids.insert(ids[order[i]]);

  Dataset train(data.dim_s(), data.dim_d());
  Dataset holdout(data.dim_s(), data.dim_d());
  for (const auto& r : data.rows()) {
    (train_ids.count(r.curve_id) ? train : holdout).add(r);
  }
  return {std::move(train), std::move(holdout)};
}

}  // namespace aabtp
