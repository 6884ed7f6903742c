#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "smi/model.hpp"
#include "smi/types.hpp"

/// Closed-form treatment of the biased-data model
///   Z_i ~ N(phi, sigma_z^2),  Y_j ~ N(phi + theta, sigma_y^2),
///   phi ~ N(0, sigma_phi^2) (sigma_phi = inf: flat),  theta ~ N(0, sigma_theta^2),
///   theta_tilde ~ N(0, sigma_theta_tilde^2).
namespace smi::gaussian {

struct GaussianHyper {
  double sigma_z = 2.0;
  double sigma_y = 1.0;
  double sigma_phi = std::numeric_limits<double>::infinity();
  double sigma_theta = 0.5;
  double sigma_theta_tilde = 0.5;

  void validate() const;
  /// 1/sigma_phi^2, zero for the flat prior.
  double phi_prior_precision() const { return std::isinf(sigma_phi) ? 0.0 : 1.0 / (sigma_phi * sigma_phi); }
};

struct GaussianSuffStats {
  std::int64_t n = 0;
  std::int64_t m = 0;
  double z_bar = 0.0;
  double y_bar = 0.0;

  void validate() const;
  static GaussianSuffStats from_observations(const Observations& z, const Observations& y);
};

struct TrueGenerative {
  double phi_star = 0.0;
  double theta_star = 1.0;
};

struct MvnDist {
  Vector mean;
  Matrix cov;

  Index dim() const { return mean.size(); }
  /// Symmetric within 1e-12 and eigenvalues >= -1e-10, else numerical_error.
  void validate() const;
  MvnDist marginal(const std::vector<Index>& idx) const;
  double log_density(const Vector& x) const;
};

/// Precision matrix and linear term of a Gaussian in information form.
struct GaussianInformation {
  Matrix precision;
  Vector linear;
};

/// Inverse of a symmetric positive definite matrix; numerical_error when the condition number reaches 1e12.
Matrix invert_spd(const Matrix& precision);

MvnDist from_information(const GaussianInformation& info);

/// Information form of the eta-SMI posterior over (phi, theta, theta_tilde).
GaussianInformation smi_posterior_information(const GaussianSuffStats& stats, const GaussianHyper& hyper, Eta eta);

/// eta-SMI posterior over (phi, theta, theta_tilde) as a trivariate normal.
MvnDist smi_posterior_moments(const GaussianSuffStats& stats, const GaussianHyper& hyper, Eta eta);

/// Joint normal over (z0, y0, phi, theta) for new data under the (phi, theta) marginal of `posterior`.
MvnDist predictive_moments(const MvnDist& posterior, const GaussianHyper& hyper);
MvnDist predictive_moments(const GaussianSuffStats& stats, const GaussianHyper& hyper, Eta eta);

struct ElpdEstimate {
  double elpd = 0.0;
  double mc_se = 0.0;
};

/// Monte Carlo elpd of the (z0, y0) predictive under the true generative density.
ElpdEstimate exact_elpd(const MvnDist& predictive, const TrueGenerative& truth, const GaussianHyper& hyper,
                        std::int64_t n_mc, std::uint64_t seed);

struct SquaredErrors {
  double phi = 0.0;
  double theta = 0.0;
  double theta_tilde = 0.0;
};

SquaredErrors squared_errors(const MvnDist& posterior, const TrueGenerative& truth);

struct SimulatedDataset {
  Vector z;
  Vector y;
  GaussianSuffStats stats;

  TwoModuleData as_data() const;
};

/// Draws Z (all n values first) then Y from one Rng stream seeded with `seed`.
SimulatedDataset simulate_dataset(const TrueGenerative& truth, const GaussianHyper& hyper, std::int64_t n,
                                  std::int64_t m, std::uint64_t seed);

/// The biased-data model as a generic two-module model, including the closed-form log p(Y|phi).
TwoModuleModel gaussian_biased_model(const GaussianHyper& hyper);

/** Sequential belief updates in the Gaussian family.
 *
 * Starts from the prior over (phi, theta, theta_tilde) and applies the SMI loss one data
 * block at a time, with the current belief standing in for the prior at every step. The
 * log p(Y|phi) correction of a Y block is computed from the current conditional of theta
 * given phi, so any ordering of blocks can be compared with the batch posterior.
 */
class SmiGaussianBelief {
public:
  SmiGaussianBelief(const GaussianHyper& hyper, Eta eta);

  void observe_z(std::int64_t n, double z_bar);
  void observe_y(std::int64_t m, double y_bar);

  const GaussianInformation& information() const { return info_; }
  MvnDist moments() const { return from_information(info_); }

private:
  GaussianHyper hyper_;
  Eta eta_;
  GaussianInformation info_;
};

} // namespace smi::gaussian
