#pragma once

#include <string>

#include "smi/model.hpp"

namespace smi::zoo {

enum class Family { normal, student_t };

Family parse_family(const std::string& name);
std::string to_string(Family family);

/// Location model Z_i ~ F(phi, scale_z), Y_j ~ F(phi + theta, scale_y) with normal priors.
struct CustomSpec {
  Family family_z = Family::normal;
  Family family_y = Family::normal;
  double scale_z = 1.0;
  double scale_y = 1.0;
  double dof = 5.0; ///< Student-t degrees of freedom
  double phi_prior_mean = 0.0;
  double phi_prior_sd = 10.0;
  double theta_prior_mean = 0.0;
  double theta_prior_sd = 1.0;
  double theta_tilde_prior_sd = 1.0;

  void validate() const;
};

TwoModuleModel custom_model(const CustomSpec& spec);

} // namespace smi::zoo
