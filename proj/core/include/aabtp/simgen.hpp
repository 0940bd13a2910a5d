#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aabtp/dataset.hpp"

namespace aabtp {

// Hill-shaped dose-response curves whose magnitude and half-max dose vary over a
// unit hypercube of descriptors via the latent GP z(s).
struct SimConfig {
  int dim_s = 2;
  int n_curves = 1000;
  std::vector<double> doses = {0.0, 0.375, 0.75, 1.5, 3.0, 4.5, 6.0};
  double hill_m = 2.0;
  double z_scale = 4.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TruthRow {
  std::string curve_id;
  double d = 0.0;
  double h = 0.0;
};

struct SimResult {
  Dataset data;
  std::vector<TruthRow> truth;  // same order as data rows
  std::vector<double> magnitude;  // nu(s_i) per curve
  std::vector<double> half_max;   // kappa(s_i) per curve
};

// nu d^m / (kappa^m + d^m); nu for d > 0 when kappa = 0, and 0 at d = 0.
double hill_response(double magnitude, double half_max, double d, double m);

SimResult generate(const SimConfig& cfg);

// Header: curve_id,d,h_true
void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthRow>& truth);
std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path);

}  // namespace aabtp
