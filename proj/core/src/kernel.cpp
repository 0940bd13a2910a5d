#include "aabtp/kernel.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "aabtp/error.hpp"

namespace aabtp {

void KernelParams::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("kernel scale must be > 0");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InputError("kernel variance must be > 0");
  }
}

double sq_exp(std::span<const double> x, std::span<const double> x2, const KernelParams& p) {
  if (x.size() != x2.size()) {
    throw InputError("sq_exp: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(x2.size()) + ")");
  }
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - x2[i];
    dist2 += diff * diff;
  }
  return p.variance * std::exp(-p.scale * dist2);
}

Eigen::MatrixXd squared_distances(const Points& a, const Points& b) {
  if (a.cols() != b.cols()) throw InputError("squared_distances: dimension mismatch");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    }
  }
  return out;
}

CovMatrix build_cov(const Points& a, const Points& b, const KernelParams& p, double jitter) {
  p.validate();
  if (a.rows() == 0 || b.rows() == 0) throw InputError("build_cov: empty point list");
  if (a.cols() != b.cols()) throw InputError("build_cov: dimension mismatch");
  if (jitter < 0.0) throw InputError("build_cov: jitter must be >= 0");

  CovMatrix cov;
  cov.entries = (-p.scale * squared_distances(a, b).array()).exp().matrix() * p.variance;
  const bool same = &a == &b || (a.rows() == b.rows() && a == b);
  if (same) {
    cov.entries.diagonal().array() += jitter * p.variance;
    cov.jitter = jitter * p.variance;
  }
  return cov;
}

double Cholesky::log_det() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

Cholesky robust_cholesky(const Eigen::MatrixXd& m, double base_jitter, int max_escalations) {
  if (m.rows() != m.cols()) throw InputError("robust_cholesky: matrix not square");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

  const double ref = std::max(m.diagonal().mean(), 1e-300);
  double bump = std::max(base_jitter, 1e-12) * ref;
  for (int t = 0; t < max_escalations; ++t, bump *= 10.0) {
    Eigen::MatrixXd bumped = m;
    bumped.diagonal().array() += bump;
    llt.compute(bumped);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), bump};
  }
  throw NumericalError("Cholesky factorization failed after jitter escalation to " +
                       std::to_string(bump / 10.0));
}

CorrelationCache::CorrelationCache(Points points, double jitter)
    : points_(std::move(points)), jitter_(jitter) {
  if (points_.rows() == 0) throw InputError("CorrelationCache: empty point set");
  sqdist_ = squared_distances(points_, points_);
}

const CorrelationCache::Entry& CorrelationCache::get(double scale) {
  if (const auto it = entries_.find(scale); it != entries_.end()) return it->second;
  KernelParams{scale, 1.0}.validate();
  Entry e;
  e.corr = (-scale * sqdist_.array()).exp().matrix();
  e.corr.diagonal().array() += jitter_;
  e.chol = robust_cholesky(e.corr, jitter_);
  e.corr.diagonal().array() += e.chol.extra_jitter;
  e.chol.extra_jitter = 0.0;
  return entries_.emplace(scale, std::move(e)).first->second;
}

void CorrelationCache::warm(std::span<const double> scales) {
  for (const double s : scales) get(s);
}

}  // namespace aabtp
