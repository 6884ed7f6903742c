#pragma once

#include <functional>
#include <string>
#include <vector>

#include "smi/types.hpp"

namespace smi {

/// Data for the two modules: Z informs phi only, Y informs (phi, theta).
struct TwoModuleData {
  Observations z;
  Observations y;
};

/** Two-module model contract.
 *
 * Module 1 ties Z to phi, module 2 ties Y to (phi, theta). The auxiliary copy theta_tilde
 * lives in theta's prior family; set log_prior_theta_tilde to give it its own
 * hyperparameters, otherwise log_prior_theta is reused. The prior over (phi, theta,
 * theta_tilde) is taken to factorize.
 *
 * Log-densities return -inf outside the support and never +inf or NaN.
 */
struct TwoModuleModel {
  using PhiDensity = std::function<double(const Vector& phi)>;
  using ZLik = std::function<double(const Vector& phi, const Observations& z)>;
  using YLik = std::function<double(const Vector& phi, const Vector& theta, const Observations& y)>;
  using ZPointwise = std::function<Vector(const Vector& phi, const Observations& z)>;
  using YPointwise = std::function<Vector(const Vector& phi, const Vector& theta, const Observations& y)>;
  using YMarginal = std::function<double(const Vector& phi, const Observations& y)>;

  std::string name;
  Index dim_phi = 0;
  Index dim_theta = 0;

  ZLik log_z_lik;
  YLik log_y_lik;
  PhiDensity log_prior_phi;
  PhiDensity log_prior_theta;
  PhiDensity log_prior_theta_tilde; ///< optional
  YMarginal log_y_marginal;         ///< optional: closed-form log p(Y|phi), conjugate models only

  ZPointwise z_pointwise; ///< optional: per-row log p(Z_j|phi), needed for WAIC on Z
  YPointwise y_pointwise; ///< optional: per-row log p(Y_j|phi,theta), needed for WAIC on Y

  Vector phi_init;   ///< starting point for stage 1
  Vector theta_init; ///< prior mean of theta; starts the first stage-2 sub-chain

  std::vector<std::string> phi_names;
  std::vector<std::string> theta_names;

  double theta_tilde_prior(const Vector& theta_tilde) const {
    return log_prior_theta_tilde ? log_prior_theta_tilde(theta_tilde) : log_prior_theta(theta_tilde);
  }
  bool has_y_marginal() const noexcept { return static_cast<bool>(log_y_marginal); }

  /// Throws contract_error unless dims, callables and initial points are coherent.
  void validate() const;
};

/// Joint parameter point (phi, theta, theta_tilde).
struct SmiParams {
  Vector phi;
  Vector theta;
  Vector theta_tilde;
};

/// log p(Z|phi) + eta log p(Y|phi,theta_tilde) + log p(phi) + log p(theta_tilde), unnormalized.
double power_stage1_logpdf(const TwoModuleModel& model, const Vector& phi, const Vector& theta_tilde,
                           const TwoModuleData& data, Eta eta);

/// log p(Y|phi,theta) + log p(theta); reads only Y.
double stage2_conditional_logpdf(const TwoModuleModel& model, const Vector& theta, const Vector& phi,
                                 const Observations& y);

/// -log p(Z|phi) - log p(Y|phi,theta) + log p(Y|phi). Requires log_y_marginal.
double cut_log_loss(const TwoModuleModel& model, const Vector& phi, const Vector& theta,
                    const TwoModuleData& data);

/// -log p(Z|phi) - eta log p(Y|phi,theta_tilde) - log p(Y|phi,theta) + log p(Y|phi). Requires log_y_marginal.
double smi_log_loss(const TwoModuleModel& model, const SmiParams& params, const TwoModuleData& data, Eta eta);

/// log p(phi) + log p(theta) + log p(theta_tilde).
double log_prior(const TwoModuleModel& model, const SmiParams& params);

} // namespace smi
