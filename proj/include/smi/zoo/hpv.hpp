#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smi/model.hpp"

namespace smi::zoo {

/// Per-population counts: Y_i cancer cases in T_i women-years, Z_i HPV-positive of N_i sampled.
struct HpvData {
  std::vector<std::int64_t> y;
  std::vector<double> t;
  std::vector<std::int64_t> z;
  std::vector<std::int64_t> n;

  std::size_t populations() const { return y.size(); }
  /// data_error on length mismatch, negative counts, T_i <= 0, N_i < 1 or Z_i > N_i.
  void validate() const;
  TwoModuleData as_data() const;
};

struct HpvParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::vector<double> phi; ///< prevalences in (0, 1)
};

struct HpvPriorSpec {
  double theta_mean = 0.0;
  double theta_sd = 10.0;
  double phi_beta_a = 1.0;
  double phi_beta_b = 1.0;

  void validate() const;
};

/**
 * Poisson-Binomial model:
 *   Z_i ~ Binomial(N_i, phi_i),   Y_i ~ Poisson(T_i exp(theta1 + theta2 phi_i)).
 *
 * The model's phi coordinates are logit(phi_i); the phi prior includes the Jacobian of the
 * logistic map. theta = (theta1, theta2). Z rows are (Z_i, N_i), Y rows are (Y_i, T_i).
 */
TwoModuleModel hpv_model(const HpvData& data, const HpvPriorSpec& prior = {});

HpvData hpv_simulate(const HpvParams& params, const std::vector<double>& t, const std::vector<std::int64_t>& n,
                     std::uint64_t seed);

/// CSV with header `pop,Y,T,Z,N`.
HpvData read_hpv_csv(const std::filesystem::path& path);
void write_hpv_csv(const std::filesystem::path& path, const HpvData& data);

double logit(double p);
double logistic(double x);

} // namespace smi::zoo
