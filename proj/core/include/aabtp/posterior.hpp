#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aabtp/model.hpp"

namespace aabtp {

// Thinned post-burn-in snapshots plus per-iteration scalar traces.
struct PosteriorSamples {
  std::vector<ModelState> states;
  std::vector<int> iterations;  // 1-based sweep number of each snapshot
  // tau, phi, nu, loglik, varsigma_1..varsigma_K; one value per sweep.
  std::map<std::string, std::vector<double>> traces;
  Priors priors;
  double jitter = 0.0;
  double omega_acceptance = 0.0;

  bool empty() const { return states.empty(); }
  std::size_t size() const { return states.size(); }
};

// Mean over snapshots of #{k : varsigma_k >= threshold}.
double effective_basis_count(const PosteriorSamples& samples, double threshold = 1.0);

// Posterior mean of each varsigma_k.
Eigen::VectorXd mean_mgp_variances(const PosteriorSamples& samples);

// Long-format snapshot dump: snapshot,iteration,name,indices,value.
void write_samples_csv(const std::filesystem::path& path, const PosteriorSamples& samples);
std::vector<ModelState> read_samples_csv(const std::filesystem::path& path,
                                         std::vector<int>* iterations = nullptr);

// One file per series: <dir>/trace_<name>.csv with columns iteration,value.
void write_traces(const std::filesystem::path& dir, const PosteriorSamples& samples);

// Concatenate chains (independent seeds) into one sample set. Traces are dropped.
PosteriorSamples merge_chains(std::vector<PosteriorSamples> chains);

}  // namespace aabtp
