#include "smi/model.hpp"

#include <cmath>
#include <limits>

namespace smi {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

void check_dim(const Vector& v, Index expected, const char* what, const TwoModuleModel& model) {
  if (v.size() != expected)
    throw contract_error(std::string(what) + " has dimension " + std::to_string(v.size()) + ", model '" +
                         model.name + "' expects " + std::to_string(expected));
}

void require_marginal(const TwoModuleModel& model) {
  if (!model.has_y_marginal())
    throw capability_error("model '" + model.name + "' has no closed-form log p(Y|phi); loss evaluation needs it");
}

// -inf terms short-circuit so that inf - inf never produces NaN
bool dead(double x) { return x == neg_inf || std::isnan(x); }

} // namespace

void TwoModuleModel::validate() const {
  if (dim_phi < 1 || dim_theta < 1) throw contract_error("model '" + name + "': dimensions must be positive");
  if (!log_z_lik || !log_y_lik || !log_prior_phi || !log_prior_theta)
    throw contract_error("model '" + name + "': required log-density callable missing");
  check_dim(phi_init, dim_phi, "phi_init", *this);
  check_dim(theta_init, dim_theta, "theta_init", *this);
  if (!phi_names.empty() && static_cast<Index>(phi_names.size()) != dim_phi)
    throw contract_error("model '" + name + "': phi_names size mismatch");
  if (!theta_names.empty() && static_cast<Index>(theta_names.size()) != dim_theta)
    throw contract_error("model '" + name + "': theta_names size mismatch");
}

double power_stage1_logpdf(const TwoModuleModel& model, const Vector& phi, const Vector& theta_tilde,
                           const TwoModuleData& data, Eta eta) {
  check_dim(phi, model.dim_phi, "phi", model);
  check_dim(theta_tilde, model.dim_theta, "theta_tilde", model);

  double lp = model.log_prior_phi(phi);
  if (dead(lp)) return neg_inf;
  const double lpt = model.theta_tilde_prior(theta_tilde);
  if (dead(lpt)) return neg_inf;
  lp += lpt;
  const double lz = model.log_z_lik(phi, data.z);
  if (dead(lz)) return neg_inf;
  lp += lz;
  if (eta.value() > 0.0) {
    const double ly = model.log_y_lik(phi, theta_tilde, data.y);
    if (dead(ly)) return neg_inf;
    lp += eta.value() * ly;
  }
  return lp;
}

double stage2_conditional_logpdf(const TwoModuleModel& model, const Vector& theta, const Vector& phi,
                                 const Observations& y) {
  check_dim(phi, model.dim_phi, "phi", model);
  check_dim(theta, model.dim_theta, "theta", model);

  const double lp = model.log_prior_theta(theta);
  if (dead(lp)) return neg_inf;
  const double ly = model.log_y_lik(phi, theta, y);
  if (dead(ly)) return neg_inf;
  return lp + ly;
}

double cut_log_loss(const TwoModuleModel& model, const Vector& phi, const Vector& theta,
                    const TwoModuleData& data) {
  require_marginal(model);
  check_dim(phi, model.dim_phi, "phi", model);
  check_dim(theta, model.dim_theta, "theta", model);
  return -model.log_z_lik(phi, data.z) - model.log_y_lik(phi, theta, data.y) +
         model.log_y_marginal(phi, data.y);
}

double smi_log_loss(const TwoModuleModel& model, const SmiParams& params, const TwoModuleData& data, Eta eta) {
  require_marginal(model);
  check_dim(params.phi, model.dim_phi, "phi", model);
  check_dim(params.theta, model.dim_theta, "theta", model);
  check_dim(params.theta_tilde, model.dim_theta, "theta_tilde", model);
  double loss = -model.log_z_lik(params.phi, data.z) - model.log_y_lik(params.phi, params.theta, data.y) +
                model.log_y_marginal(params.phi, data.y);
  if (eta.value() > 0.0) loss -= eta.value() * model.log_y_lik(params.phi, params.theta_tilde, data.y);
  return loss;
}

double log_prior(const TwoModuleModel& model, const SmiParams& params) {
  check_dim(params.phi, model.dim_phi, "phi", model);
  check_dim(params.theta, model.dim_theta, "theta", model);
  check_dim(params.theta_tilde, model.dim_theta, "theta_tilde", model);
  return model.log_prior_phi(params.phi) + model.log_prior_theta(params.theta) +
         model.theta_tilde_prior(params.theta_tilde);
}

} // namespace smi
