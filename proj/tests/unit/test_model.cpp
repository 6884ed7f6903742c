#include <doctest.h>

#include <cmath>
#include <limits>

#include "smi/errors.hpp"
#include "smi/gaussian.hpp"
#include "smi/model.hpp"
#include "support.hpp"

using namespace smi;
using test_support::normal_logpdf;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

TwoModuleData small_data() {
  return {test_support::column({-0.4, 0.3, 1.1, -0.2, 0.5}), test_support::column({1.3, 0.7, 1.9, 1.2})};
}

/// theta restricted to (0, inf) to exercise the support convention.
TwoModuleModel positive_theta_model() {
  TwoModuleModel m = gaussian::gaussian_biased_model({});
  m.name = "positive-theta";
  m.log_prior_theta = [](const Vector& t) {
    return t(0) > 0.0 ? normal_logpdf(t(0), 0.0, 1.0) : -std::numeric_limits<double>::infinity();
  };
  m.log_prior_theta_tilde = nullptr;
  m.theta_init = v1(1.0);
  return m;
}

} // namespace

TEST_CASE("stage-1 target: hand-evaluated standard normals give -log(2 pi)") {
  gaussian::GaussianHyper h;
  h.sigma_z = 1.0;
  h.sigma_theta = h.sigma_theta_tilde = 1.0;
  const auto model = gaussian::gaussian_biased_model(h);
  const TwoModuleData data{test_support::column({0.0}), test_support::column({3.0, -2.0})};
  CHECK(power_stage1_logpdf(model, v1(0.0), v1(0.0), data, Eta(0.0)) == doctest::Approx(-std::log(2.0 * M_PI)));
}

TEST_CASE("stage-1 target at the endpoints") {
  const auto model = gaussian::gaussian_biased_model({});
  const auto data = small_data();
  const Vector phi = v1(0.2), tt = v1(0.9);
  const double base = model.log_z_lik(phi, data.z) + model.log_prior_phi(phi) + model.theta_tilde_prior(tt);

  CHECK(power_stage1_logpdf(model, phi, tt, data, Eta(0.0)) == doctest::Approx(base));
  TwoModuleData other = data;
  other.y(0, 0) = 100.0;
  CHECK(power_stage1_logpdf(model, phi, tt, other, Eta(0.0)) == power_stage1_logpdf(model, phi, tt, data, Eta(0.0)));

  const double joint = base + model.log_y_lik(phi, tt, data.y);
  CHECK(power_stage1_logpdf(model, phi, tt, data, Eta(1.0)) == doctest::Approx(joint));
  CHECK(power_stage1_logpdf(model, phi, tt, data, Eta(0.25)) ==
        doctest::Approx(base + 0.25 * model.log_y_lik(phi, tt, data.y)));
}

TEST_CASE("stage-2 conditional mode matches completing the square") {
  gaussian::GaussianHyper h;
  const auto model = gaussian::gaussian_biased_model(h);
  const auto data = small_data();
  const double phi = 0.35, m = 4.0;
  const double ybar = data.y.col(0).mean();
  const double mode = (m * (ybar - phi) / (h.sigma_y * h.sigma_y)) / (m / (h.sigma_y * h.sigma_y) + 1.0 / 0.25);
  const double f0 = stage2_conditional_logpdf(model, v1(mode), v1(phi), data.y);
  for (double d : {1e-3, -1e-3, 0.1, -0.1})
    CHECK(stage2_conditional_logpdf(model, v1(mode + d), v1(phi), data.y) < f0);
  const double eps = 1e-5;
  const double deriv = (stage2_conditional_logpdf(model, v1(mode + eps), v1(phi), data.y) -
                        stage2_conditional_logpdf(model, v1(mode - eps), v1(phi), data.y)) /
                       (2 * eps);
  CHECK(std::abs(deriv) < 1e-6);
}

TEST_CASE("stage-2 conditional ignores module 1 and returns -inf off support") {
  auto model = positive_theta_model();
  const auto data = small_data();
  const double a = stage2_conditional_logpdf(model, v1(0.7), v1(0.1), data.y);
  model.log_z_lik = [](const Vector&, const Observations&) { return 123.0; };
  CHECK(stage2_conditional_logpdf(model, v1(0.7), v1(0.1), data.y) == a);
  CHECK(stage2_conditional_logpdf(model, v1(-0.5), v1(0.1), data.y) == -std::numeric_limits<double>::infinity());
  CHECK(power_stage1_logpdf(model, v1(0.0), v1(-1.0), data, Eta(0.5)) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("losses: eta = 0 reduces SMI to cut, theta differences independent of eta") {
  const auto model = gaussian::gaussian_biased_model({});
  const auto data = small_data();
  const Vector phi = v1(-0.1), th = v1(0.8);
  for (double tt : {-1.0, 0.0, 2.5})
    CHECK(smi_log_loss(model, {phi, th, v1(tt)}, data, Eta(0.0)) == cut_log_loss(model, phi, th, data));

  const double d_ref = smi_log_loss(model, {phi, v1(0.3), v1(0.0)}, data, Eta(0.0)) -
                       smi_log_loss(model, {phi, v1(1.2), v1(0.0)}, data, Eta(0.0));
  for (double eta : {0.2, 0.7, 1.0})
    for (double tt : {-0.5, 1.5}) {
      const double d = smi_log_loss(model, {phi, v1(0.3), v1(tt)}, data, Eta(eta)) -
                       smi_log_loss(model, {phi, v1(1.2), v1(tt)}, data, Eta(eta));
      CHECK(d == doctest::Approx(d_ref).epsilon(1e-12));
    }
}

TEST_CASE("cut loss matches the full-Bayes loss up to a constant when p(Y|phi) is flat") {
  auto model = gaussian::gaussian_biased_model({});
  model.log_y_marginal = [](const Vector&, const Observations&) { return -7.0; };
  const auto data = small_data();
  auto full_nll = [&](double p, double t) {
    return -model.log_z_lik(v1(p), data.z) - model.log_y_lik(v1(p), v1(t), data.y);
  };
  const double c = cut_log_loss(model, v1(0.0), v1(0.0), data) - full_nll(0.0, 0.0);
  for (double p : {-1.0, 0.4})
    for (double t : {0.2, 1.7})
      CHECK(cut_log_loss(model, v1(p), v1(t), data) - full_nll(p, t) == doctest::Approx(c));
}

TEST_CASE("cut loss by 2-d quadrature matches p(phi|Z) p(theta|Y,phi)") {
  gaussian::GaussianHyper h; // flat phi prior
  const auto model = gaussian::gaussian_biased_model(h);
  const auto data = small_data();
  const double n = 5, m = 4, zbar = data.z.col(0).mean(), ybar = data.y.col(0).mean();
  const double sd_phi = h.sigma_z / std::sqrt(n);
  const double prec_t = m / (h.sigma_y * h.sigma_y) + 1.0 / (h.sigma_theta * h.sigma_theta);
  auto oracle = [&](double p, double t) {
    const double mu_t = (m * (ybar - p) / (h.sigma_y * h.sigma_y)) / prec_t;
    return std::exp(normal_logpdf(p, zbar, sd_phi) + normal_logpdf(t, mu_t, 1.0 / std::sqrt(prec_t)));
  };

  const int k = 241;
  const double t_mid = (m * (ybar - zbar)) / prec_t;
  const double t_sd = std::sqrt(1.0 / prec_t + sd_phi * sd_phi * std::pow(m / prec_t, 2));
  const auto ps = test_support::nodes(zbar - 7 * sd_phi, zbar + 7 * sd_phi, k);
  const auto ts = test_support::nodes(t_mid - 7 * t_sd, t_mid + 7 * t_sd, k);
  const auto wp = test_support::trapezoid(ps.front(), ps.back(), k);
  const auto wt = test_support::trapezoid(ts.front(), ts.back(), k);
  Matrix dens(k, k);
  double z = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const Vector p = v1(ps[i]), t = v1(ts[j]);
      dens(i, j) = std::exp(-cut_log_loss(model, p, t, data) + model.log_prior_phi(p) + model.log_prior_theta(t));
      z += wp[i] * wt[j] * dens(i, j);
    }
  double worst = 0;
  for (int i = k / 4; i < 3 * k / 4; i += 5)
    for (int j = k / 4; j < 3 * k / 4; j += 5)
      worst = std::max(worst, std::abs(dens(i, j) / z / oracle(ps[i], ts[j]) - 1.0));
  CHECK(worst < 1e-6);
}

TEST_CASE("contract and capability errors") {
  auto model = gaussian::gaussian_biased_model({});
  const auto data = small_data();
  CHECK_THROWS_AS(power_stage1_logpdf(model, Vector::Zero(2), v1(0), data, Eta(0.5)), contract_error);
  CHECK_THROWS_AS(stage2_conditional_logpdf(model, Vector::Zero(3), v1(0), data.y), contract_error);
  CHECK_THROWS_AS(Eta(1.5), contract_error);
  CHECK_THROWS_AS(Eta(-0.01), contract_error);
  model.log_y_marginal = nullptr;
  try {
    (void)cut_log_loss(model, v1(0), v1(0), data);
    FAIL("expected capability_error");
  } catch (const capability_error& e) {
    CHECK(std::string(e.what()).find("gaussian-biased") != std::string::npos);
  }
  CHECK_THROWS_AS(smi_log_loss(model, {v1(0), v1(0), v1(0)}, data, Eta(0.3)), capability_error);
  model.dim_theta = 0;
  CHECK_THROWS_AS(model.validate(), contract_error);
}

TEST_CASE("pure functions: repeated calls are bit-identical") {
  const auto model = gaussian::gaussian_biased_model({});
  const auto data = small_data();
  const SmiParams p{v1(0.123), v1(0.456), v1(-0.789)};
  const double a = smi_log_loss(model, p, data, Eta(0.37));
  CHECK(smi_log_loss(model, p, data, Eta(0.37)) == a);
  CHECK(log_prior(model, p) == log_prior(model, p));
}
