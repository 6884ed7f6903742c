#include "smi/stationarity.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "smi/errors.hpp"

namespace smi::mcmc {

namespace {

double log_sum_exp(const Vector& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

const Vector& theta_tilde_prior(const DiscreteTwoModuleSpec& spec) {
  return spec.log_prior_theta_tilde.size() > 0 ? spec.log_prior_theta_tilde : spec.log_prior_theta;
}

/// Unnormalized stage-1 target log p(Z|phi) + eta log p(Y|phi,tt) + priors on the grid.
Matrix stage1_log_target(const DiscreteTwoModuleSpec& spec) {
  const double eta = spec.eta.value();
  const Vector& ltt = theta_tilde_prior(spec);
  Matrix out(spec.k_phi(), spec.k_theta());
  for (Index i = 0; i < spec.k_phi(); ++i)
    for (Index t = 0; t < spec.k_theta(); ++t)
      out(i, t) = spec.log_z_lik(i) + (eta == 0.0 ? 0.0 : eta * spec.log_y_lik(i, t)) + spec.log_prior_phi(i) + ltt(t);
  return out;
}

/// Row i: p(theta | Y, phi_i).
Matrix stage2_conditionals(const DiscreteTwoModuleSpec& spec) {
  Matrix out(spec.k_phi(), spec.k_theta());
  for (Index i = 0; i < spec.k_phi(); ++i) {
    const Vector lp = spec.log_y_lik.row(i).transpose() + spec.log_prior_theta;
    out.row(i) = (lp.array() - log_sum_exp(lp)).exp().transpose();
  }
  return out;
}

} // namespace

void DiscreteTwoModuleSpec::validate() const {
  if (k_phi() < 1 || k_theta() < 1) throw contract_error("discrete model needs at least one phi and one theta value");
  if (log_y_lik.rows() != k_phi() || log_y_lik.cols() != k_theta())
    throw contract_error("log_y_lik must be k_phi x k_theta");
  if (log_prior_phi.size() != k_phi()) throw contract_error("log_prior_phi must have length k_phi");
  if (log_prior_theta_tilde.size() != 0 && log_prior_theta_tilde.size() != k_theta())
    throw contract_error("log_prior_theta_tilde must be empty or have length k_theta");
  if (n_states() > kMaxDiscreteStates)
    throw capacity_error("discrete model has " + std::to_string(n_states()) + " states, limit is " +
                         std::to_string(kMaxDiscreteStates));
}

Vector discrete_smi_posterior(const DiscreteTwoModuleSpec& spec) {
  spec.validate();
  const double eta = spec.eta.value();
  const Vector& ltt = theta_tilde_prior(spec);
  Vector log_marg(spec.k_phi());
  for (Index i = 0; i < spec.k_phi(); ++i)
    log_marg(i) = log_sum_exp(spec.log_y_lik.row(i).transpose() + spec.log_prior_theta);

  Vector logp(spec.n_states());
  for (Index i = 0; i < spec.k_phi(); ++i)
    for (Index tt = 0; tt < spec.k_theta(); ++tt)
      for (Index t = 0; t < spec.k_theta(); ++t) {
        const double loss = -spec.log_z_lik(i) - eta * spec.log_y_lik(i, tt) - spec.log_y_lik(i, t) + log_marg(i);
        logp(spec.state(i, tt, t)) = -loss + spec.log_prior_phi(i) + spec.log_prior_theta(t) + ltt(tt);
      }
  return (logp.array() - log_sum_exp(logp)).exp();
}

Eigen::SparseMatrix<double, Eigen::RowMajor> two_stage_transition_matrix(const DiscreteTwoModuleSpec& spec) {
  spec.validate();
  const Index kp = spec.k_phi();
  const Index kt = spec.k_theta();
  const Matrix target = stage1_log_target(spec);
  const Matrix cond = stage2_conditionals(spec);

  const Index moves[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<Index, double>> stage1; // (target flat index i * kt + tt, probability)
  for (Index i = 0; i < kp; ++i)
    for (Index tt = 0; tt < kt; ++tt) {
      stage1.clear();
      double stay = 1.0;
      for (const auto& mv : moves) {
        const Index ni = i + mv[0];
        const Index nt = tt + mv[1];
        if (ni < 0 || ni >= kp || nt < 0 || nt >= kt) continue;
        const double diff = target(ni, nt) - target(i, tt);
        const double a = diff >= 0.0 ? 1.0 : std::exp(diff);
        stage1.emplace_back(ni * kt + nt, 0.25 * a);
        stay -= 0.25 * a;
      }
      stage1.emplace_back(i * kt + tt, stay);

      for (const auto& [to1, p1] : stage1) {
        const Index ni = to1 / kt;
        const Index nt = to1 % kt;
        for (Index t = 0; t < kt; ++t)
          for (Index nth = 0; nth < kt; ++nth)
            triplets.emplace_back(spec.state(i, tt, t), spec.state(ni, nt, nth), p1 * cond(ni, nth));
      }
    }
  Eigen::SparseMatrix<double, Eigen::RowMajor> k(spec.n_states(), spec.n_states());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

double two_stage_kernel_stationarity(const DiscreteTwoModuleSpec& spec) {
  const Vector pi = discrete_smi_posterior(spec);
  const auto k = two_stage_transition_matrix(spec);
  const Vector pk = (pi.transpose() * k).transpose();
  return (pk - pi).cwiseAbs().maxCoeff();
}

} // namespace smi::mcmc
