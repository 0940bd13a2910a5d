#include "aabtp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "aabtp/error.hpp"

namespace aabtp {

EvalReport evaluate(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw InputError("evaluate: length mismatch");
  if (pred.size() < 2) throw InputError("evaluate: need at least 2 targets");
  const double n = static_cast<double>(pred.size());
  double sq = 0.0, abs = 0.0, mp = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    sq += e * e;
    abs += std::fabs(e);
    mp += pred[i];
    mt += truth[i];
  }
  mp /= n;
  mt /= n;
  double spp = 0.0, stt = 0.0, spt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    spp += (pred[i] - mp) * (pred[i] - mp);
    stt += (truth[i] - mt) * (truth[i] - mt);
    spt += (pred[i] - mp) * (truth[i] - mt);
  }
  if (!(spp > 0.0) || !(stt > 0.0)) {
    throw InputError("evaluate: correlation undefined for a constant vector");
  }
  EvalReport r;
  r.mspe = sq / n;
  r.mae = abs / n;
  r.correlation = std::clamp(spt / std::sqrt(spp * stt), -1.0, 1.0);
  r.n_targets = pred.size();
  return r;
}

double trimmed_mean(std::span<const double> values, double tail_frac) {
  if (!(tail_frac >= 0.0 && tail_frac < 0.5)) throw InputError("trimmed_mean: tail_frac must be in [0, 0.5)");
  const auto cut = static_cast<std::size_t>(std::floor(tail_frac * static_cast<double>(values.size())));
  if (values.size() <= 2 * cut) throw InputError("trimmed_mean: nothing left after trimming");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sum = std::accumulate(sorted.begin() + static_cast<std::ptrdiff_t>(cut),
                                     sorted.end() - static_cast<std::ptrdiff_t>(cut), 0.0);
  return sum / static_cast<double>(sorted.size() - 2 * cut);
}

double binomial_cdf(int count, int trials, double prob) {
  if (trials < 0 || !(prob >= 0.0 && prob <= 1.0)) throw InputError("binomial_cdf: bad parameters");
  if (count < 0) return 0.0;
  if (count >= trials) return 1.0;
  double total = 0.0;
  for (int c = 0; c <= count; ++c) {
    const double log_pmf = std::lgamma(trials + 1.0) - std::lgamma(c + 1.0) -
                           std::lgamma(trials - c + 1.0) + c * std::log(prob) +
                           (trials - c) * std::log1p(-prob);
    total += std::exp(log_pmf);
  }
  return std::min(total, 1.0);
}

int binomial_critical_value(int trials, double prob, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("binomial_critical_value: level must be in (0, 1)");
  for (int c = 0; c < trials; ++c) {
    if (binomial_cdf(c, trials, prob) >= level) return c;
  }
  return trials;
}

CoverageResult coverage_check(const PredictiveDraws& draws,
                              const std::vector<CurveObservations>& observations, double p,
                              double test_level) {
  if (!(p > 0.0 && p < 0.5)) throw InputError("coverage_check: p must be in (0, 0.5)");
  if (!(test_level > 0.0 && test_level < 1.0)) throw InputError("coverage_check: test_level must be in (0, 1)");
  if (draws.draws.rows() == 0) throw InputError("coverage_check: no predictive draws");

  CoverageResult out;
  out.p = p;
  out.test_level = test_level;
  std::vector<double> col(static_cast<std::size_t>(draws.draws.rows()));
  std::map<Eigen::Index, std::pair<double, double>> bounds;
  const auto target_bounds = [&](Eigen::Index j) {
    if (const auto it = bounds.find(j); it != bounds.end()) return it->second;
    for (Eigen::Index t = 0; t < draws.draws.rows(); ++t) col[static_cast<std::size_t>(t)] = draws.draws(t, j);
    std::sort(col.begin(), col.end());
    const std::pair<double, double> b{empirical_quantile(col, p), empirical_quantile(col, 1.0 - p)};
    bounds.emplace(j, b);
    return b;
  };

  int passed = 0;
  for (const auto& curve : observations) {
    if (curve.target.empty() || curve.target.size() != curve.y.size()) {
      throw InputError("coverage_check: curve '" + curve.curve_id + "' has no draws");
    }
    CurveCoverage cc;
    cc.curve_id = curve.curve_id;
    cc.n_obs = static_cast<int>(curve.y.size());
    for (std::size_t i = 0; i < curve.y.size(); ++i) {
      const Eigen::Index j = curve.target[i];
      if (j < 0 || j >= draws.target_count()) {
        throw InputError("coverage_check: curve '" + curve.curve_id + "' has no draws");
      }
      const auto [lo, hi] = target_bounds(j);
      if (curve.y[i] < lo || curve.y[i] > hi) ++cc.count;
    }
    cc.critical_value = binomial_critical_value(cc.n_obs, 2.0 * p, test_level);
    cc.pass = cc.count <= cc.critical_value;
    passed += cc.pass ? 1 : 0;
    out.curves.push_back(std::move(cc));
  }
  out.pass_fraction = observations.empty() ? 0.0 : static_cast<double>(passed) / observations.size();
  return out;
}

std::vector<CurveObservations> group_observations(const PredictiveDraws& draws,
                                                  const std::vector<std::string>& new_curve_ids,
                                                  const Dataset& data, int sig_digits) {
  std::map<std::pair<std::string, std::vector<double>>, Eigen::Index> lookup;
  for (Eigen::Index j = 0; j < draws.target_count(); ++j) {
    const auto a = static_cast<std::size_t>(draws.target_curve[static_cast<std::size_t>(j)]);
    if (a >= new_curve_ids.size()) throw InputError("group_observations: curve id list too short");
    std::vector<double> d(static_cast<std::size_t>(draws.target_d.cols()));
    for (Eigen::Index q = 0; q < draws.target_d.cols(); ++q) {
      d[static_cast<std::size_t>(q)] = round_significant(draws.target_d(j, q), sig_digits);
    }
    lookup.emplace(std::make_pair(new_curve_ids[a], std::move(d)), j);
  }

  std::vector<CurveObservations> out;
  std::map<std::string, std::size_t> pos;
  for (const auto& obs : data.rows()) {
    std::vector<double> d;
    for (double v : obs.d) d.push_back(round_significant(v, sig_digits));
    const auto it = lookup.find({obs.curve_id, d});
    if (it == lookup.end()) {
      throw InputError("group_observations: no predictive target for curve '" + obs.curve_id + "'");
    }
    auto [p, inserted] = pos.emplace(obs.curve_id, out.size());
    if (inserted) out.push_back({obs.curve_id, {}, {}});
    out[p->second].target.push_back(it->second);
    out[p->second].y.push_back(obs.y);
  }
  return out;
}

}  // namespace aabtp
