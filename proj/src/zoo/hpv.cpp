#include "smi/zoo/hpv.hpp"

#include <cmath>
#include <limits>

#include "smi/errors.hpp"
#include "smi/io.hpp"
#include "smi/rng.hpp"

namespace smi::zoo {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log(1 / (1 + exp(-x))) without overflow.
double log_logistic(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double binomial_logpmf(double k, double n, double logit_p) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * log_logistic(logit_p) +
         (n - k) * log_logistic(-logit_p);
}

double poisson_logpmf(double k, double log_mu) {
  const double mu = std::exp(log_mu);
  if (!std::isfinite(mu)) return neg_inf;
  return k * log_mu - mu - std::lgamma(k + 1.0);
}

} // namespace

double logit(double p) { return std::log(p) - std::log1p(-p); }
double logistic(double x) { return std::exp(log_logistic(x)); }

void HpvData::validate() const {
  const std::size_t k = y.size();
  if (k == 0) throw data_error("HPV data needs at least one population");
  if (t.size() != k || z.size() != k || n.size() != k)
    throw data_error("HPV data columns Y, T, Z, N must have equal length");
  for (std::size_t i = 0; i < k; ++i) {
    const std::string where = "population " + std::to_string(i + 1) + ": ";
    if (y[i] < 0) throw data_error(where + "Y must be nonnegative");
    if (!(t[i] > 0.0) || !std::isfinite(t[i])) throw data_error(where + "T must be positive");
    if (n[i] < 1) throw data_error(where + "N must be positive");
    if (z[i] < 0) throw data_error(where + "Z must be nonnegative");
    if (z[i] > n[i])
      throw data_error(where + "Z = " + std::to_string(z[i]) + " exceeds N = " + std::to_string(n[i]));
  }
}

TwoModuleData HpvData::as_data() const {
  const Index k = static_cast<Index>(populations());
  TwoModuleData d{Observations(k, 2), Observations(k, 2)};
  for (Index i = 0; i < k; ++i) {
    const auto u = static_cast<std::size_t>(i);
    d.z(i, 0) = static_cast<double>(z[u]);
    d.z(i, 1) = static_cast<double>(n[u]);
    d.y(i, 0) = static_cast<double>(y[u]);
    d.y(i, 1) = t[u];
  }
  return d;
}

void HpvPriorSpec::validate() const {
  if (!(theta_sd > 0.0) || !std::isfinite(theta_sd)) throw config_error("hpv theta prior sd must be positive");
  if (!(phi_beta_a > 0.0) || !(phi_beta_b > 0.0)) throw config_error("hpv phi Beta prior parameters must be positive");
}

TwoModuleModel hpv_model(const HpvData& data, const HpvPriorSpec& prior) {
  data.validate();
  prior.validate();
  const Index k = static_cast<Index>(data.populations());

  TwoModuleModel model;
  model.name = "hpv";
  model.dim_phi = k;
  model.dim_theta = 2;

  model.z_pointwise = [](const Vector& phi, const Observations& z) {
    Vector out(z.rows());
    for (Index i = 0; i < z.rows(); ++i)
      out(i) = binomial_logpmf(z(i, 0), z(i, 1), phi(i));
    return out;
  };
  model.y_pointwise = [](const Vector& phi, const Vector& theta, const Observations& y) {
    Vector out(y.rows());
    for (Index i = 0; i < y.rows(); ++i)
      out(i) = poisson_logpmf(y(i, 0), std::log(y(i, 1)) + theta(0) + theta(1) * logistic(phi(i)));
    return out;
  };
  model.log_z_lik = [pw = model.z_pointwise](const Vector& phi, const Observations& z) { return pw(phi, z).sum(); };
  model.log_y_lik = [pw = model.y_pointwise](const Vector& phi, const Vector& theta, const Observations& y) {
    return pw(phi, theta, y).sum();
  };

  const double a = prior.phi_beta_a, b = prior.phi_beta_b;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  // Beta(a, b) on phi_i plus the Jacobian phi_i (1 - phi_i) of the logistic map
  model.log_prior_phi = [a, b, log_beta](const Vector& x) {
    double lp = 0.0;
    for (Index i = 0; i < x.size(); ++i)
      lp += a * log_logistic(x(i)) + b * log_logistic(-x(i)) - log_beta;
    return lp;
  };
  const double mu = prior.theta_mean, sd = prior.theta_sd;
  model.log_prior_theta = [mu, sd](const Vector& theta) {
    const double c = -0.5 * std::log(2.0 * M_PI) - std::log(sd);
    const auto r = (theta.array() - mu) / sd;
    return 2.0 * c - 0.5 * r.square().sum();
  };

  model.phi_init = Vector(k);
  for (Index i = 0; i < k; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double p = (static_cast<double>(data.z[u]) + 0.5) / (static_cast<double>(data.n[u]) + 1.0);
    model.phi_init(i) = logit(p);
  }
  model.theta_init = Vector::Constant(2, mu);
  for (Index i = 0; i < k; ++i)
    model.phi_names.push_back("logit_phi" + std::to_string(i + 1));
  model.theta_names = {"theta1", "theta2"};
  return model;
}

HpvData hpv_simulate(const HpvParams& params, const std::vector<double>& t, const std::vector<std::int64_t>& n,
                     std::uint64_t seed) {
  const std::size_t k = params.phi.size();
  if (t.size() != k || n.size() != k) throw contract_error("hpv_simulate: phi, T and N must have equal length");
  for (double p : params.phi)
    if (!(p > 0.0 && p < 1.0)) throw contract_error("hpv_simulate: every phi must lie in (0, 1)");

  Rng rng(seed);
  HpvData data;
  data.t = t;
  data.n = n;
  for (std::size_t i = 0; i < k; ++i) {
    data.z.push_back(rng.binomial(n[i], params.phi[i]));
    data.y.push_back(rng.poisson(t[i] * std::exp(params.theta1 + params.theta2 * params.phi[i])));
  }
  data.validate();
  return data;
}

HpvData read_hpv_csv(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path);
  const std::size_t cy = table.column("Y"), ct = table.column("T"), cz = table.column("Z"), cn = table.column("N");
  HpvData data;
  for (const auto& row : table.rows) {
    data.y.push_back(io::parse_int(row[cy]));
    data.t.push_back(io::parse_double(row[ct]));
    data.z.push_back(io::parse_int(row[cz]));
    data.n.push_back(io::parse_int(row[cn]));
  }
  data.validate();
  return data;
}

void write_hpv_csv(const std::filesystem::path& path, const HpvData& data) {
  io::CsvWriter w({"pop", "Y", "T", "Z", "N"});
  for (std::size_t i = 0; i < data.populations(); ++i) {
    w.cell(static_cast<long long>(i + 1)).cell(static_cast<long long>(data.y[i])).cell(data.t[i]);
    w.cell(static_cast<long long>(data.z[i])).cell(static_cast<long long>(data.n[i]));
    w.end_row();
  }
  io::write_text(path, w.str());
}

} // namespace smi::zoo
