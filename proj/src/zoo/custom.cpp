#include "smi/zoo/custom.hpp"

#include <cmath>

#include "smi/errors.hpp"

namespace smi::zoo {

namespace {

double location_logpdf(Family family, double x, double loc, double scale, double dof) {
  const double r = (x - loc) / scale;
  if (family == Family::normal) return -0.5 * std::log(2.0 * M_PI) - std::log(scale) - 0.5 * r * r;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * M_PI) - std::log(scale) -
         0.5 * (dof + 1.0) * std::log1p(r * r / dof);
}

double normal_logpdf(double x, double mean, double sd) {
  const double r = (x - mean) / sd;
  return -0.5 * std::log(2.0 * M_PI) - std::log(sd) - 0.5 * r * r;
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw config_error(std::string("custom model: ") + what + " must be positive");
}

} // namespace

Family parse_family(const std::string& name) {
  if (name == "normal") return Family::normal;
  if (name == "student-t" || name == "student_t") return Family::student_t;
  throw config_error("unknown likelihood family '" + name + "' (normal | student-t)");
}

std::string to_string(Family family) { return family == Family::normal ? "normal" : "student-t"; }

void CustomSpec::validate() const {
  require_positive(scale_z, "scale_z");
  require_positive(scale_y, "scale_y");
  require_positive(dof, "dof");
  require_positive(phi_prior_sd, "phi_prior_sd");
  require_positive(theta_prior_sd, "theta_prior_sd");
  require_positive(theta_tilde_prior_sd, "theta_tilde_prior_sd");
}

TwoModuleModel custom_model(const CustomSpec& spec) {
  spec.validate();
  const CustomSpec s = spec;

  TwoModuleModel model;
  model.name = "custom";
  model.dim_phi = 1;
  model.dim_theta = 1;
  model.z_pointwise = [s](const Vector& phi, const Observations& z) {
    Vector out(z.rows());
    for (Index i = 0; i < z.rows(); ++i)
      out(i) = location_logpdf(s.family_z, z(i, 0), phi(0), s.scale_z, s.dof);
    return out;
  };
  model.y_pointwise = [s](const Vector& phi, const Vector& theta, const Observations& y) {
    Vector out(y.rows());
    for (Index j = 0; j < y.rows(); ++j)
      out(j) = location_logpdf(s.family_y, y(j, 0), phi(0) + theta(0), s.scale_y, s.dof);
    return out;
  };
  model.log_z_lik = [pw = model.z_pointwise](const Vector& phi, const Observations& z) { return pw(phi, z).sum(); };
  model.log_y_lik = [pw = model.y_pointwise](const Vector& phi, const Vector& theta, const Observations& y) {
    return pw(phi, theta, y).sum();
  };
  model.log_prior_phi = [s](const Vector& phi) { return normal_logpdf(phi(0), s.phi_prior_mean, s.phi_prior_sd); };
  model.log_prior_theta = [s](const Vector& theta) {
    return normal_logpdf(theta(0), s.theta_prior_mean, s.theta_prior_sd);
  };
  model.log_prior_theta_tilde = [s](const Vector& tt) {
    return normal_logpdf(tt(0), s.theta_prior_mean, s.theta_tilde_prior_sd);
  };
  model.phi_init = Vector::Constant(1, s.phi_prior_mean);
  model.theta_init = Vector::Constant(1, s.theta_prior_mean);
  model.phi_names = {"phi"};
  model.theta_names = {"theta"};
  return model;
}

} // namespace smi::zoo
