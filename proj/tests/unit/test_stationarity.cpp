#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "smi/errors.hpp"
#include "smi/stationarity.hpp"

using namespace smi;
using namespace smi::mcmc;

namespace {

DiscreteTwoModuleSpec toy(Index kp, Index kt, double eta) {
  DiscreteTwoModuleSpec s;
  s.log_z_lik.resize(kp);
  s.log_y_lik.resize(kp, kt);
  s.log_prior_phi.resize(kp);
  s.log_prior_theta.resize(kt);
  for (Index i = 0; i < kp; ++i) {
    s.log_z_lik(i) = -0.3 * static_cast<double>(i * i) + 0.2 * static_cast<double>(i);
    s.log_prior_phi(i) = std::log(1.0 + static_cast<double>(i));
    for (Index t = 0; t < kt; ++t)
      s.log_y_lik(i, t) = -std::pow(static_cast<double>(i + t) - 1.5, 2) + 0.1 * static_cast<double>(t);
  }
  for (Index t = 0; t < kt; ++t)
    s.log_prior_theta(t) = -0.5 * static_cast<double>(t);
  s.eta = Eta(eta);
  return s;
}

/// Stationary vector of a row-stochastic matrix by a dense linear solve.
Vector stationary(const Matrix& K) {
  const Index n = K.rows();
  Matrix A = K.transpose() - Matrix::Identity(n, n);
  A.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  return A.fullPivLu().solve(b);
}

double lse(const Vector& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

} // namespace

TEST_CASE("2x2x2 toy model: the SMI posterior is stationary") {
  for (double eta : {0.0, 0.3, 1.0})
    CHECK(two_stage_kernel_stationarity(toy(2, 2, eta)) <= 1e-12);
  CHECK(two_stage_kernel_stationarity(toy(4, 3, 0.6)) <= 1e-12);
}

TEST_CASE("transition matrix is row-stochastic") {
  const Matrix K = two_stage_transition_matrix(toy(3, 3, 0.4));
  CHECK((K.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-13);
  CHECK(K.minCoeff() >= 0.0);
}

TEST_CASE("eta = 0: stationary vector is the enumerated cut posterior") {
  const auto s = toy(3, 2, 0.0);
  const Vector pi = stationary(two_stage_transition_matrix(s));
  // cut: p(phi|Z) p(theta|Y,phi) p(theta_tilde) with theta_tilde from its prior
  Vector lp_phi = s.log_z_lik + s.log_prior_phi;
  lp_phi.array() -= lse(lp_phi);
  Vector lp_tt = s.log_prior_theta;
  lp_tt.array() -= lse(lp_tt);
  for (Index i = 0; i < 3; ++i) {
    Vector cond = s.log_y_lik.row(i).transpose() + s.log_prior_theta;
    cond.array() -= lse(cond);
    for (Index tt = 0; tt < 2; ++tt)
      for (Index t = 0; t < 2; ++t)
        CHECK(pi(s.state(i, tt, t)) == doctest::Approx(std::exp(lp_phi(i) + lp_tt(tt) + cond(t))).epsilon(1e-10));
  }
}

TEST_CASE("eta = 1: (phi, theta) marginal is the enumerated full posterior") {
  const auto s = toy(3, 3, 1.0);
  const Vector pi = stationary(two_stage_transition_matrix(s));
  Matrix joint(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index t = 0; t < 3; ++t)
      joint(i, t) = std::exp(s.log_z_lik(i) + s.log_y_lik(i, t) + s.log_prior_phi(i) + s.log_prior_theta(t));
  joint /= joint.sum();
  for (Index i = 0; i < 3; ++i)
    for (Index t = 0; t < 3; ++t) {
      double m = 0;
      for (Index tt = 0; tt < 3; ++tt)
        m += pi(s.state(i, tt, t));
      CHECK(m == doctest::Approx(joint(i, t)).epsilon(1e-10));
    }
}

TEST_CASE("state-space limit and shape checks") {
  CHECK_THROWS_AS(two_stage_kernel_stationarity(toy(200, 10, 0.5)), capacity_error);
  auto s = toy(2, 2, 0.5);
  s.log_y_lik.resize(3, 2);
  CHECK_THROWS_AS(two_stage_kernel_stationarity(s), contract_error);
}
