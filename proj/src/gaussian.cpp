#include "smi/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smi/rng.hpp"

namespace smi::gaussian {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // log(2 pi)

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw contract_error(std::string(name) + " must be > 0");
}

double normal_logpdf(double x, double mean, double sd) {
  const double r = (x - mean) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * r * r;
}

} // namespace

void GaussianHyper::validate() const {
  require_positive(sigma_z, "sigma_z");
  require_positive(sigma_y, "sigma_y");
  require_positive(sigma_phi, "sigma_phi");
  require_positive(sigma_theta, "sigma_theta");
  require_positive(sigma_theta_tilde, "sigma_theta_tilde");
  if (!std::isfinite(sigma_z) || !std::isfinite(sigma_y) || !std::isfinite(sigma_theta) ||
      !std::isfinite(sigma_theta_tilde))
    throw contract_error("only sigma_phi may be infinite");
}

void GaussianSuffStats::validate() const {
  if (n < 1 || m < 1) throw contract_error("sufficient statistics need n >= 1 and m >= 1");
  if (!std::isfinite(z_bar) || !std::isfinite(y_bar)) throw contract_error("sample means must be finite");
}

GaussianSuffStats GaussianSuffStats::from_observations(const Observations& z, const Observations& y) {
  if (z.rows() < 1 || y.rows() < 1 || z.cols() < 1 || y.cols() < 1)
    throw contract_error("need at least one Z and one Y observation");
  return {z.rows(), y.rows(), z.col(0).mean(), y.col(0).mean()};
}

void MvnDist::validate() const {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw numerical_error("MvnDist: covariance shape does not match mean");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw numerical_error("MvnDist: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw numerical_error("MvnDist: covariance not positive semi-definite");
}

MvnDist MvnDist::marginal(const std::vector<Index>& idx) const {
  const auto k = static_cast<Index>(idx.size());
  MvnDist out{Vector(k), Matrix(k, k)};
  for (Index i = 0; i < k; ++i) {
    out.mean(i) = mean(idx[i]);
    for (Index j = 0; j < k; ++j)
      out.cov(i, j) = cov(idx[i], idx[j]);
  }
  return out;
}

double MvnDist::log_density(const Vector& x) const {
  if (x.size() != dim()) throw contract_error("MvnDist::log_density: dimension mismatch");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw numerical_error("MvnDist::log_density: covariance not positive definite");
  const Vector r = llt.matrixL().solve(x - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(dim()) * kLog2Pi + logdet + r.squaredNorm());
}

Matrix invert_spd(const Matrix& precision) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(precision, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e12) {
    std::ostringstream msg;
    msg << "precision matrix is singular or ill-conditioned (eigenvalues in [" << lo << ", " << hi
        << "], condition number " << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) << ")";
    throw numerical_error(msg.str());
  }
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw numerical_error("precision matrix Cholesky factorization failed");
  Matrix inv = llt.solve(Matrix::Identity(precision.rows(), precision.cols()));
  return 0.5 * (inv + inv.transpose());
}

MvnDist from_information(const GaussianInformation& info) {
  MvnDist out;
  out.cov = invert_spd(info.precision);
  out.mean = out.cov * info.linear;
  return out;
}

GaussianInformation smi_posterior_information(const GaussianSuffStats& stats, const GaussianHyper& hyper, Eta eta) {
  stats.validate();
  hyper.validate();
  const double n = static_cast<double>(stats.n);
  const double m = static_cast<double>(stats.m);
  const double e = eta.value();
  const double sz2 = hyper.sigma_z * hyper.sigma_z;
  const double sy2 = hyper.sigma_y * hyper.sigma_y;
  const double st2 = hyper.sigma_theta * hyper.sigma_theta;
  const double stt2 = hyper.sigma_theta_tilde * hyper.sigma_theta_tilde;
  const double k = m / sy2;
  // -log p(Y|phi) feedback correction, from integrating theta against its prior
  const double cut = m / (sy2 + m * st2);

  GaussianInformation info{Matrix::Zero(3, 3), Vector::Zero(3)};
  auto& P = info.precision;
  P(0, 0) = n / sz2 + k * (1.0 + e) - cut + hyper.phi_prior_precision();
  P(0, 1) = P(1, 0) = k;
  P(0, 2) = P(2, 0) = e * k;
  P(1, 1) = k + 1.0 / st2;
  P(2, 2) = e * k + 1.0 / stt2;

  info.linear(0) = n * stats.z_bar / sz2 + k * stats.y_bar * (1.0 + e) - stats.y_bar * cut;
  info.linear(1) = k * stats.y_bar;
  info.linear(2) = e * k * stats.y_bar;
  return info;
}

MvnDist smi_posterior_moments(const GaussianSuffStats& stats, const GaussianHyper& hyper, Eta eta) {
  return from_information(smi_posterior_information(stats, hyper, eta));
}

MvnDist predictive_moments(const MvnDist& posterior, const GaussianHyper& hyper) {
  if (posterior.dim() < 2) throw contract_error("predictive_moments: posterior must cover (phi, theta)");
  hyper.validate();
  const MvnDist pt = posterior.marginal({0, 1});
  const Matrix q = invert_spd(pt.cov);
  const double a = q(0, 0), b = q(0, 1), c = q(1, 1);
  const double d = pt.mean(0), e = pt.mean(1);
  const double iz = 1.0 / (hyper.sigma_z * hyper.sigma_z);
  const double iy = 1.0 / (hyper.sigma_y * hyper.sigma_y);

  GaussianInformation info{Matrix::Zero(4, 4), Vector::Zero(4)};
  auto& P = info.precision;
  // order: z0, y0, phi, theta
  P(0, 0) = iz;
  P(0, 2) = P(2, 0) = -iz;
  P(1, 1) = iy;
  P(1, 2) = P(2, 1) = -iy;
  P(1, 3) = P(3, 1) = -iy;
  P(2, 2) = a + iz + iy;
  P(2, 3) = P(3, 2) = b + iy;
  P(3, 3) = c + iy;
  info.linear(2) = a * d + b * e;
  info.linear(3) = b * d + c * e;
  return from_information(info);
}

MvnDist predictive_moments(const GaussianSuffStats& stats, const GaussianHyper& hyper, Eta eta) {
  return predictive_moments(smi_posterior_moments(stats, hyper, eta), hyper);
}

ElpdEstimate exact_elpd(const MvnDist& predictive, const TrueGenerative& truth, const GaussianHyper& hyper,
                        std::int64_t n_mc, std::uint64_t seed) {
  if (n_mc < 100) throw contract_error("exact_elpd: n_mc must be >= 100");
  if (predictive.dim() < 2) throw contract_error("exact_elpd: predictive must cover (z0, y0)");
  const MvnDist zy = predictive.marginal({0, 1});
  Eigen::LLT<Matrix> llt(zy.cov);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT()(0, 0) > 0.0) || !(llt.matrixLLT()(1, 1) > 0.0))
    throw numerical_error("exact_elpd: predictive (z0, y0) covariance is not positive definite");
  const Eigen::Matrix2d L = llt.matrixL().toDenseMatrix();
  const double logdet = 2.0 * (std::log(L(0, 0)) + std::log(L(1, 1)));
  const double norm = -kLog2Pi - 0.5 * logdet;

  Rng rng(seed);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    const double z = truth.phi_star + hyper.sigma_z * rng.normal();
    const double y = truth.phi_star + truth.theta_star + hyper.sigma_y * rng.normal();
    // forward substitution with the 2x2 Cholesky factor
    const double r0 = (z - zy.mean(0)) / L(0, 0);
    const double r1 = (y - zy.mean(1) - L(1, 0) * r0) / L(1, 1);
    const double lp = norm - 0.5 * (r0 * r0 + r1 * r1);
    const double delta = lp - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (lp - mean);
  }
  const double var = m2 / static_cast<double>(n_mc - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_mc))};
}

SquaredErrors squared_errors(const MvnDist& posterior, const TrueGenerative& truth) {
  if (posterior.dim() != 3) throw contract_error("squared_errors: expects the (phi, theta, theta_tilde) posterior");
  const auto sq = [](double x) { return x * x; };
  return {posterior.cov(0, 0) + sq(posterior.mean(0) - truth.phi_star),
          posterior.cov(1, 1) + sq(posterior.mean(1) - truth.theta_star),
          posterior.cov(2, 2) + sq(posterior.mean(2) - truth.theta_star)};
}

TwoModuleData SimulatedDataset::as_data() const {
  TwoModuleData d;
  d.z = Observations(z.size(), 1);
  d.z.col(0) = z;
  d.y = Observations(y.size(), 1);
  d.y.col(0) = y;
  return d;
}

SimulatedDataset simulate_dataset(const TrueGenerative& truth, const GaussianHyper& hyper, std::int64_t n,
                                  std::int64_t m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw contract_error("simulate_dataset: need n >= 1 and m >= 1");
  hyper.validate();
  Rng rng(seed);
  SimulatedDataset out{Vector(n), Vector(m), {}};
  for (Index i = 0; i < n; ++i)
    out.z(i) = truth.phi_star + hyper.sigma_z * rng.normal();
  for (Index j = 0; j < m; ++j)
    out.y(j) = truth.phi_star + truth.theta_star + hyper.sigma_y * rng.normal();
  out.stats = {n, m, out.z.mean(), out.y.mean()};
  return out;
}

TwoModuleModel gaussian_biased_model(const GaussianHyper& hyper) {
  hyper.validate();
  const double sz = hyper.sigma_z, sy = hyper.sigma_y, st = hyper.sigma_theta;
  const double stt = hyper.sigma_theta_tilde, sp = hyper.sigma_phi;

  TwoModuleModel model;
  model.name = "gaussian-biased";
  model.dim_phi = 1;
  model.dim_theta = 1;

  model.log_z_lik = [sz](const Vector& phi, const Observations& z) {
    const auto r = (z.col(0).array() - phi(0)) / sz;
    return -static_cast<double>(z.rows()) * (0.5 * kLog2Pi + std::log(sz)) - 0.5 * r.square().sum();
  };
  model.log_y_lik = [sy](const Vector& phi, const Vector& theta, const Observations& y) {
    const auto r = (y.col(0).array() - phi(0) - theta(0)) / sy;
    return -static_cast<double>(y.rows()) * (0.5 * kLog2Pi + std::log(sy)) - 0.5 * r.square().sum();
  };
  model.z_pointwise = [sz](const Vector& phi, const Observations& z) {
    Vector out(z.rows());
    for (Index i = 0; i < z.rows(); ++i)
      out(i) = normal_logpdf(z(i, 0), phi(0), sz);
    return out;
  };
  model.y_pointwise = [sy](const Vector& phi, const Vector& theta, const Observations& y) {
    Vector out(y.rows());
    for (Index j = 0; j < y.rows(); ++j)
      out(j) = normal_logpdf(y(j, 0), phi(0) + theta(0), sy);
    return out;
  };
  if (std::isinf(sp))
    model.log_prior_phi = [](const Vector&) { return 0.0; };
  else
    model.log_prior_phi = [sp](const Vector& phi) { return normal_logpdf(phi(0), 0.0, sp); };
  model.log_prior_theta = [st](const Vector& theta) { return normal_logpdf(theta(0), 0.0, st); };
  model.log_prior_theta_tilde = [stt](const Vector& tt) { return normal_logpdf(tt(0), 0.0, stt); };

  // Y | phi ~ N(phi 1, sy^2 I + st^2 11'), inverted with Sherman-Morrison
  model.log_y_marginal = [sy, st](const Vector& phi, const Observations& y) {
    const double m = static_cast<double>(y.rows());
    const double sy2 = sy * sy, st2 = st * st;
    const auto r = y.col(0).array() - phi(0);
    const double s1 = r.sum();
    const double s2 = r.square().sum();
    const double denom = sy2 + m * st2;
    const double quad = (s2 - st2 * s1 * s1 / denom) / sy2;
    const double logdet = (m - 1.0) * std::log(sy2) + std::log(denom);
    return -0.5 * (m * kLog2Pi + logdet + quad);
  };

  model.phi_init = Vector::Zero(1);
  model.theta_init = Vector::Zero(1);
  model.phi_names = {"phi"};
  model.theta_names = {"theta"};
  return model;
}

SmiGaussianBelief::SmiGaussianBelief(const GaussianHyper& hyper, Eta eta) : hyper_(hyper), eta_(eta) {
  hyper_.validate();
  info_.precision = Matrix::Zero(3, 3);
  info_.linear = Vector::Zero(3);
  info_.precision(0, 0) = hyper_.phi_prior_precision();
  info_.precision(1, 1) = 1.0 / (hyper_.sigma_theta * hyper_.sigma_theta);
  info_.precision(2, 2) = 1.0 / (hyper_.sigma_theta_tilde * hyper_.sigma_theta_tilde);
}

void SmiGaussianBelief::observe_z(std::int64_t n, double z_bar) {
  if (n < 1) throw contract_error("observe_z: empty block");
  const double k = static_cast<double>(n) / (hyper_.sigma_z * hyper_.sigma_z);
  info_.precision(0, 0) += k;
  info_.linear(0) += k * z_bar;
}

void SmiGaussianBelief::observe_y(std::int64_t m, double y_bar) {
  if (m < 1) throw contract_error("observe_y: empty block");
  const double sy2 = hyper_.sigma_y * hyper_.sigma_y;
  const double k = static_cast<double>(m) / sy2;
  const double e = eta_.value();
  auto& P = info_.precision;
  auto& h = info_.linear;

  // Current conditional of (theta, theta_tilde) given phi: mean = A - B phi.
  const Eigen::Matrix2d Prr = P.block<2, 2>(1, 1);
  const Eigen::Matrix2d Crr = Prr.inverse();
  const Eigen::Vector2d A = Crr * h.segment<2>(1);
  const Eigen::Vector2d B = Crr * P.block<2, 1>(1, 0);
  // Under the current belief, y_bar | phi ~ N(phi + A0 - B0 phi, sy^2/m + Var(theta|phi)).
  const double slope = 1.0 - B(0);
  const double v = sy2 / static_cast<double>(m) + Crr(0, 0);
  // dividing by p(Y|phi) removes its quadratic in phi
  P(0, 0) -= slope * slope / v;
  h(0) -= slope * (y_bar - A(0)) / v;

  P(0, 0) += k * (1.0 + e);
  P(0, 1) += k;
  P(1, 0) += k;
  P(1, 1) += k;
  P(0, 2) += e * k;
  P(2, 0) += e * k;
  P(2, 2) += e * k;
  h(0) += k * y_bar * (1.0 + e);
  h(1) += k * y_bar;
  h(2) += e * k * y_bar;
}

} // namespace smi::gaussian
