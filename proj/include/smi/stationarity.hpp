#pragma once

#include <Eigen/SparseCore>

#include "smi/types.hpp"

namespace smi::mcmc {

/// Two-module model with phi and theta on finite grids of size k_phi and k_theta.
struct DiscreteTwoModuleSpec {
  Vector log_z_lik;             ///< log p(Z|phi_i), length k_phi
  Matrix log_y_lik;             ///< log p(Y|phi_i, theta_j), k_phi x k_theta
  Vector log_prior_phi;         ///< length k_phi
  Vector log_prior_theta;       ///< length k_theta
  Vector log_prior_theta_tilde; ///< empty: log_prior_theta
  Eta eta{0.0};

  Index k_phi() const { return log_z_lik.size(); }
  Index k_theta() const { return log_prior_theta.size(); }
  Index n_states() const { return k_phi() * k_theta() * k_theta(); }
  /// Flat index of (phi, theta_tilde, theta).
  Index state(Index phi, Index theta_tilde, Index theta) const {
    return (phi * k_theta() + theta_tilde) * k_theta() + theta;
  }
  void validate() const;
};

inline constexpr Index kMaxDiscreteStates = 10000;

/// SMI posterior over (phi, theta_tilde, theta) from exp(-smi loss) x prior, normalized.
Vector discrete_smi_posterior(const DiscreteTwoModuleSpec& spec);

/** Transition matrix of the two-stage kernel.
 *
 * Stage 1 is a Metropolis step on the (phi, theta_tilde) grid proposing one of the four
 * neighbours with probability 1/4 each (moves off the grid are rejected). Stage 2 draws theta
 * exactly from p(theta | Y, phi'). Row-stochastic.
 */
Eigen::SparseMatrix<double, Eigen::RowMajor> two_stage_transition_matrix(const DiscreteTwoModuleSpec& spec);

/// max |(pi K - pi)_k| for the exact SMI posterior pi. capacity_error above kMaxDiscreteStates.
double two_stage_kernel_stationarity(const DiscreteTwoModuleSpec& spec);

} // namespace smi::mcmc
