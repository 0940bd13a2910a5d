#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "aabtp/kernel.hpp"

namespace aabtp {

struct Observation {
  std::string curve_id;
  std::vector<double> s;
  std::vector<double> d;
  double y = 0.0;
};

// Observed curves in file order. All rows of one curve share the same s vector.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int dim_s, int dim_d);

  void add(Observation obs);

  int dim_s() const { return dim_s_; }
  int dim_d() const { return dim_d_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<Observation>& rows() const { return rows_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }

  // Distinct curve ids in order of first appearance.
  std::vector<std::string> curve_ids() const;
  std::size_t curve_count() const;

  Eigen::VectorXd response() const;

  // Zero-mean, unit-variance s columns (constant columns are only centered).
  void standardize_s();

 private:
  int dim_s_ = 0;
  int dim_d_ = 0;
  std::vector<Observation> rows_;
};

// Header: curve_id,s1..sP,d1..dQ,y
Dataset load_csv(const std::filesystem::path& path);
Dataset read_csv(std::istream& in);
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);

// Unique input grid and curve set plus the per-observation gather maps.
// Indices are 0-based.
struct DesignIndex {
  Points grid;                         // R x Q, sorted lexicographically
  Points curves;                       // n x P, order of first appearance
  std::vector<std::string> curve_ids;  // length n
  std::vector<int> f_index;            // length N, into grid rows
  std::vector<int> g_index;            // length N, into curve rows
  int sig_digits = 2;

  Eigen::Index grid_size() const { return grid.rows(); }
  Eigen::Index curve_count() const { return curves.rows(); }
  std::size_t observation_count() const { return f_index.size(); }
};

inline constexpr int kDefaultSigDigits = 2;

double round_significant(double value, int sig_digits);

DesignIndex build_design(const Dataset& data, int sig_digits = kDefaultSigDigits);

// Curve-level random split; returns (train, holdout), each in original row order.
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, std::size_t n_train,
                                          std::uint64_t seed);

}  // namespace aabtp
