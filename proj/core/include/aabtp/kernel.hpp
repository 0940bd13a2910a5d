#pragma once

#include <map>
#include <span>

#include <Eigen/Core>

namespace aabtp {

// One point per row; rows are contiguous so a point is viewable as a span.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const Points& pts, Eigen::Index i) {
  return {pts.data() + i * pts.cols(), static_cast<std::size_t>(pts.cols())};
}

inline constexpr double kDefaultJitter = 1e-8;

// Squared-exponential kernel variance * exp(-scale * |x - x'|^2).
struct KernelParams {
  double scale = 1.0;
  double variance = 1.0;

  void validate() const;
};

double sq_exp(std::span<const double> x, std::span<const double> x2, const KernelParams& p);

struct CovMatrix {
  Eigen::MatrixXd entries;
  double jitter = 0.0;
};

Eigen::MatrixXd squared_distances(const Points& a, const Points& b);

// Entry (i,j) = sq_exp(a_i, b_j). When a and b are the same point set the
// diagonal also receives jitter * variance.
CovMatrix build_cov(const Points& a, const Points& b, const KernelParams& p,
                    double jitter = kDefaultJitter);

struct Cholesky {
  Eigen::MatrixXd lower;
  // Extra diagonal added on top of the input to make the factorization succeed.
  double extra_jitter = 0.0;

  double log_det() const;
};

// Lower Cholesky factor of a symmetric matrix. On failure the diagonal is bumped
// by base_jitter * mean(diag) * 10^t, t = 0, 1, ..., before giving up.
Cholesky robust_cholesky(const Eigen::MatrixXd& m, double base_jitter = kDefaultJitter,
                         int max_escalations = 8);

// Cached unit-variance correlation factors exp(-scale * D^2) + jitter * I for a
// fixed point set, keyed by scale. Not thread-safe; one cache per chain.
class CorrelationCache {
 public:
  struct Entry {
    Eigen::MatrixXd corr;  // includes the diagonal jitter actually used
    Cholesky chol;
  };

  CorrelationCache(Points points, double jitter);

  const Entry& get(double scale);
  void warm(std::span<const double> scales);

  const Points& points() const { return points_; }
  const Eigen::MatrixXd& sq_dist() const { return sqdist_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return points_.rows(); }

 private:
  Points points_;
  Eigen::MatrixXd sqdist_;
  double jitter_;
  std::map<double, Entry> entries_;
};

}  // namespace aabtp
