#pragma once

#include <span>
#include <string>
#include <vector>

#include "aabtp/dataset.hpp"
#include "aabtp/predict.hpp"

namespace aabtp {

struct EvalReport {
  double mspe = 0.0;
  double mae = 0.0;
  double correlation = 0.0;
  std::size_t n_targets = 0;
};

EvalReport evaluate(std::span<const double> pred_mean, std::span<const double> truth);

// Mean after dropping floor(tail_frac * n) values from each end of the sorted input.
double trimmed_mean(std::span<const double> values, double tail_frac);

double binomial_cdf(int count, int trials, double prob);

// Smallest c with P(Binomial(trials, prob) <= c) >= level.
int binomial_critical_value(int trials, double prob, double level);

// Observations of one held-out curve and the draw column each one is scored against.
struct CurveObservations {
  std::string curve_id;
  std::vector<Eigen::Index> target;
  std::vector<double> y;
};

struct CurveCoverage {
  std::string curve_id;
  int n_obs = 0;
  int count = 0;
  int critical_value = 0;
  bool pass = false;
};

struct CoverageResult {
  double p = 0.0;
  double test_level = 0.0;
  std::vector<CurveCoverage> curves;
  double pass_fraction = 0.0;
};

// Counts observations below the p-quantile or above the (1-p)-quantile of their
// target's predictive draws; a curve passes when the count is at most the
// Binomial(n_obs, 2p) critical value at test_level.
CoverageResult coverage_check(const PredictiveDraws& draws,
                              const std::vector<CurveObservations>& observations, double p,
                              double test_level);

// Match each observation of `data` to the target with the same curve (by id,
// using new_curve_ids for the rows of new_s) and the same rounded d.
// Throws InputError when an observation has no target.
std::vector<CurveObservations> group_observations(const PredictiveDraws& draws,
                                                  const std::vector<std::string>& new_curve_ids,
                                                  const Dataset& data, int sig_digits);

}  // namespace aabtp
