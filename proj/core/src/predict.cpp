#include "aabtp/predict.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "aabtp/error.hpp"

namespace aabtp {

namespace {

// For each row of new_pts, the index of an identical row of obs, or -1.
std::vector<int> coincident_rows(const Points& obs, const Points& new_pts) {
  std::map<std::vector<double>, int> lookup;
  for (Eigen::Index i = 0; i < obs.rows(); ++i) {
    const auto r = row_span(obs, i);
    lookup.emplace(std::vector<double>(r.begin(), r.end()), static_cast<int>(i));
  }
  std::vector<int> out(static_cast<std::size_t>(new_pts.rows()), -1);
  for (Eigen::Index a = 0; a < new_pts.rows(); ++a) {
    const auto r = row_span(new_pts, a);
    if (const auto it = lookup.find(std::vector<double>(r.begin(), r.end())); it != lookup.end()) {
      out[static_cast<std::size_t>(a)] = it->second;
    }
  }
  return out;
}

Points select_rows(const Points& pts, const std::vector<Eigen::Index>& rows) {
  Points out(static_cast<Eigen::Index>(rows.size()), pts.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts.row(rows[i]);
  return out;
}

void check_conditioning_inputs(const Points& obs, const Eigen::VectorXd& values,
                               const Points& new_pts, const KernelParams& p) {
  p.validate();
  if (obs.rows() == 0) throw InputError("conditional: no observed points");
  if (values.size() != obs.rows()) throw InputError("conditional: values/points length mismatch");
  if (new_pts.rows() == 0) throw InputError("conditional: no new points");
  if (new_pts.cols() != obs.cols()) throw InputError("conditional: dimension mismatch");
}

}  // namespace

GaussianMoments conditional_moments(const Points& obs_points, const Eigen::VectorXd& obs_values,
                                    const Points& new_points, const KernelParams& p,
                                    double jitter) {
  check_conditioning_inputs(obs_points, obs_values, new_points, p);
  const Eigen::Index m = new_points.rows();
  const auto same = coincident_rows(obs_points, new_points);

  GaussianMoments out{Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, m)};
  std::vector<Eigen::Index> free;
  for (Eigen::Index a = 0; a < m; ++a) {
    if (same[a] >= 0) {
      out.mean(a) = obs_values(same[a]);
    } else {
      free.push_back(a);
    }
  }
  if (free.empty()) return out;

  const Points free_pts = select_rows(new_points, free);
  const Cholesky chol = robust_cholesky(build_cov(obs_points, obs_points, p, jitter).entries, jitter);
  const auto L = chol.lower.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd A = L.solve(build_cov(obs_points, free_pts, p, 0.0).entries);
  const Eigen::VectorXd alpha = L.solve(obs_values);
  const Eigen::VectorXd mean = A.transpose() * alpha;
  const Eigen::MatrixXd cov = build_cov(free_pts, free_pts, p, jitter).entries - A.transpose() * A;
  for (std::size_t i = 0; i < free.size(); ++i) {
    out.mean(free[i]) = mean(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < free.size(); ++j) {
      out.cov(free[i], free[j]) = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

Eigen::VectorXd conditional_draw(const Points& obs_points, const Eigen::VectorXd& obs_values,
                                 const Points& new_points, const KernelParams& p, Rng& rng,
                                 double jitter) {
  const GaussianMoments mom = conditional_moments(obs_points, obs_values, new_points, p, jitter);
  const auto same = coincident_rows(obs_points, new_points);
  std::vector<Eigen::Index> free;
  for (Eigen::Index a = 0; a < new_points.rows(); ++a) {
    if (same[a] < 0) free.push_back(a);
  }
  Eigen::VectorXd out = mom.mean;
  if (free.empty()) return out;
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd cov(nf, nf);
  for (Eigen::Index i = 0; i < nf; ++i)
    for (Eigen::Index j = 0; j < nf; ++j) cov(i, j) = mom.cov(free[i], free[j]);
  const Cholesky chol = robust_cholesky(cov, std::max(jitter, 1e-12));
  const Eigen::VectorXd z = chol.lower * standard_normal(nf, rng);
  for (Eigen::Index i = 0; i < nf; ++i) out(free[i]) += z(i);
  return out;
}

namespace {

// Kriging pieces for unit-variance loadings at the new curves, for one scale.
struct LoadingPredictor {
  Eigen::MatrixXd weights_t;  // L^{-1} R(obs, free): n x n_free
  Eigen::VectorXd marginal_sd;
  Eigen::MatrixXd joint_chol;
};

class LoadingPredictors {
 public:
  LoadingPredictors(const DesignIndex& idx, const Points& new_s, double jitter, PredictMode mode)
      : cache_(idx.curves, jitter), jitter_(jitter), mode_(mode) {
    same_ = coincident_rows(idx.curves, new_s);
    std::vector<Eigen::Index> free;
    for (Eigen::Index a = 0; a < new_s.rows(); ++a) {
      if (same_[a] < 0) free.push_back(a);
    }
    free_ = free;
    free_pts_ = select_rows(new_s, free);
    if (!free_.empty()) cross_sqdist_ = squared_distances(idx.curves, free_pts_);
  }

  const std::vector<int>& coincident() const { return same_; }
  const std::vector<Eigen::Index>& free_rows() const { return free_; }

  const LoadingPredictor& get(double scale) {
    if (const auto it = preds_.find(scale); it != preds_.end()) return it->second;
    LoadingPredictor pred;
    if (!free_.empty()) {
      const auto& entry = cache_.get(scale);
      const Eigen::MatrixXd cross = (-scale * cross_sqdist_.array()).exp().matrix();
      pred.weights_t = entry.chol.lower.triangularView<Eigen::Lower>().solve(cross);
      const Eigen::VectorXd var =
          (1.0 + jitter_ - pred.weights_t.colwise().squaredNorm().array()).max(0.0).matrix();
      pred.marginal_sd = var.array().sqrt();
      if (mode_ == PredictMode::Joint) {
        Eigen::MatrixXd cov = build_cov(free_pts_, free_pts_, {scale, 1.0}, jitter_).entries -
                              pred.weights_t.transpose() * pred.weights_t;
        pred.joint_chol = robust_cholesky(cov, std::max(jitter_, 1e-12)).lower;
      }
    }
    return preds_.emplace(scale, std::move(pred)).first->second;
  }

  const Eigen::MatrixXd& chol(double scale) { return cache_.get(scale).chol.lower; }

 private:
  CorrelationCache cache_;
  double jitter_;
  PredictMode mode_;
  std::vector<int> same_;
  std::vector<Eigen::Index> free_;
  Points free_pts_;
  Eigen::MatrixXd cross_sqdist_;
  std::map<double, LoadingPredictor> preds_;
};

}  // namespace

PredictiveDraws predict_surface(const PosteriorSamples& samples, const DesignIndex& idx,
                                const Points& new_s, const std::optional<Points>& new_d,
                                const PredictOptions& opts) {
  if (samples.empty()) throw InputError("predict_surface: no posterior samples");
  if (new_s.rows() == 0) throw InputError("predict_surface: new_S is empty");
  if (new_s.cols() != idx.curves.cols()) throw InputError("predict_surface: s dimension mismatch");
  if (new_d && (new_d->rows() == 0 || new_d->cols() != idx.grid.cols())) {
    throw InputError("predict_surface: d points empty or of the wrong dimension");
  }
  if (!(opts.jitter >= 0.0)) throw InputError("predict_surface: jitter must be >= 0");

  const Points& D = new_d ? *new_d : idx.grid;
  const Eigen::Index nS = new_s.rows();
  const Eigen::Index nD = D.rows();
  const int K = samples.states.front().K();

  PredictiveDraws out;
  out.noise_included = opts.include_noise;
  out.target_s.resize(nS * nD, new_s.cols());
  out.target_d.resize(nS * nD, D.cols());
  out.target_curve.resize(static_cast<std::size_t>(nS * nD));
  for (Eigen::Index a = 0; a < nS; ++a) {
    for (Eigen::Index b = 0; b < nD; ++b) {
      out.target_s.row(a * nD + b) = new_s.row(a);
      out.target_d.row(a * nD + b) = D.row(b);
      out.target_curve[static_cast<std::size_t>(a * nD + b)] = static_cast<int>(a);
    }
  }
  out.draws.resize(static_cast<Eigen::Index>(samples.size()), nS * nD);

  LoadingPredictors loadings(idx, new_s, opts.jitter, opts.mode);
  const auto& same = loadings.coincident();
  const auto& free = loadings.free_rows();
  const auto n_free = static_cast<Eigen::Index>(free.size());

  for (std::size_t t = 0; t < samples.size(); ++t) {
    const ModelState& st = samples.states[t];
    if (st.K() != K || st.G.rows() != idx.curve_count() || st.F.rows() != idx.grid_size()) {
      throw InputError("predict_surface: snapshot does not match the design");
    }
    Rng rng = make_rng(opts.seed, t);

    Eigen::MatrixXd g_new(nS, K);
    for (int k = 1; k <= K; ++k) {
      const double theta = st.theta(k - 1);
      const double sd = std::sqrt(mgp_variance(st, k));
      const auto& g = st.G.col(k - 1);
      for (Eigen::Index a = 0; a < nS; ++a) {
        if (same[a] >= 0) g_new(a, k - 1) = g(same[a]);
      }
      if (n_free == 0) continue;
      const auto& pred = loadings.get(theta);
      const Eigen::VectorXd alpha = loadings.chol(theta).triangularView<Eigen::Lower>().solve(g);
      Eigen::VectorXd draw = pred.weights_t.transpose() * alpha;
      const Eigen::VectorXd z = standard_normal(n_free, rng);
      if (opts.mode == PredictMode::Joint) {
        draw += (pred.joint_chol.triangularView<Eigen::Lower>() * z) * sd;
      } else {
        draw += sd * pred.marginal_sd.cwiseProduct(z);
      }
      for (Eigen::Index i = 0; i < n_free; ++i) g_new(free[i], k - 1) = draw(i);
    }

    Eigen::MatrixXd f_new(nD, K + 1);
    if (!new_d) {
      f_new = st.F;
    } else {
      for (int k = 0; k <= K; ++k) {
        const KernelParams p{st.omega(k), k == 0 ? st.nu : 1.0};
        f_new.col(k) = conditional_draw(idx.grid, st.F.col(k), D, p, rng, opts.jitter);
      }
    }

    Eigen::MatrixXd h = g_new * f_new.rightCols(K).transpose();
    h.rowwise() += f_new.col(0).transpose();
    if (opts.include_noise) {
      const double noise_sd = 1.0 / std::sqrt(st.tau);
      h += noise_sd * standard_normal(nS * nD, rng).reshaped(nD, nS).transpose();
    }
    const auto row = static_cast<Eigen::Index>(t);
    for (Eigen::Index a = 0; a < nS; ++a) out.draws.block(row, a * nD, 1, nD) = h.row(a);
  }
  return out;
}

double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("empirical_quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("empirical_quantile: q must be in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<IntervalSummary> summarize(const PredictiveDraws& draws, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("summarize: level must be in (0, 1)");
  if (draws.draws.rows() < 2) throw InputError("summarize: need at least 2 draws");
  std::vector<IntervalSummary> out(static_cast<std::size_t>(draws.target_count()));
  std::vector<double> col(static_cast<std::size_t>(draws.draws.rows()));
  for (Eigen::Index j = 0; j < draws.target_count(); ++j) {
    for (Eigen::Index t = 0; t < draws.draws.rows(); ++t) col[static_cast<std::size_t>(t)] = draws.draws(t, j);
    std::sort(col.begin(), col.end());
    auto& s = out[static_cast<std::size_t>(j)];
    s.mean = draws.draws.col(j).mean();
    s.lower = empirical_quantile(col, 0.5 * (1.0 - level));
    s.upper = empirical_quantile(col, 0.5 * (1.0 + level));
  }
  return out;
}

}  // namespace aabtp
