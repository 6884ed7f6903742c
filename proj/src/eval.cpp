#include "smi/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "smi/errors.hpp"
#include "smi/io.hpp"
#include "smi/parallel.hpp"

namespace smi::eval {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

double min_ess(const mcmc::SampleMatrix& samples) {
  if (samples.rows() < 100) return nan_v;
  return mcmc::diagnostics(samples).ess.minCoeff();
}

SweepRow score_waic(const TwoModuleModel& model, const TwoModuleData& data, Eta eta, const mcmc::ChainConfig& cfg,
                    const WaicScorer& scorer, mcmc::SampleMatrix* keep) {
  mcmc::ChainConfig row_cfg = cfg;
  row_cfg.seed = eta_seed(cfg.seed, eta);
  row_cfg.threads = 1;
  mcmc::SampleMatrix samples = mcmc::nested_smi_sampler(model, data, eta, row_cfg);
  const WaicResult w = waic(pointwise_log_lik(model, data, samples, scorer.target));

  SweepRow row;
  row.eta = eta.value();
  if (!std::isfinite(w.elpd_waic)) throw numerical_error("non-finite elpd estimate");
  row.elpd_hat = w.elpd_waic;
  row.se = w.se;
  row.estimator = Estimator::waic;
  row.ess_min = min_ess(samples);
  row.p_waic = w.p_waic;
  row.unreliable = w.unreliable;
  if (keep) *keep = std::move(samples);
  return row;
}

SweepRow score_exact(const TwoModuleData& data, Eta eta, const mcmc::ChainConfig& cfg,
                     const ExactGaussianScorer& scorer) {
  const auto stats = gaussian::GaussianSuffStats::from_observations(data.z, data.y);
  const auto pred = gaussian::predictive_moments(stats, scorer.hyper, eta);
  const auto est = gaussian::exact_elpd(pred, scorer.truth, scorer.hyper, scorer.n_mc, derive_seed(cfg.seed, "elpd"));
  SweepRow row;
  row.eta = eta.value();
  row.elpd_hat = est.elpd;
  row.se = est.mc_se;
  row.estimator = Estimator::exact;
  row.ess_min = static_cast<double>(scorer.n_mc);
  return row;
}

} // namespace

std::string to_string(Target target) {
  switch (target) {
  case Target::z: return "z";
  case Target::y: return "y";
  case Target::both: return "both";
  }
  return "?";
}

Target parse_target(const std::string& name) {
  if (name == "z") return Target::z;
  if (name == "y") return Target::y;
  if (name == "both") return Target::both;
  throw config_error("unknown prediction target '" + name + "' (z | y | both)");
}

std::string to_string(Estimator estimator) {
  switch (estimator) {
  case Estimator::waic: return "waic";
  case Estimator::exact: return "exact";
  case Estimator::loo: return "loo";
  }
  return "?";
}

void LogLikMatrix::validate() const {
  if (values.rows() < 2) throw contract_error("log-likelihood matrix needs at least 2 draws");
  if (values.cols() < 1) throw contract_error("log-likelihood matrix has no data points");
  for (Index j = 0; j < values.cols(); ++j)
    for (Index s = 0; s < values.rows(); ++s) {
      const double v = values(s, j);
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw contract_error("log-likelihood matrix contains NaN or +inf at draw " + std::to_string(s) + ", point " +
                             std::to_string(j));
    }
}

WaicResult waic(const LogLikMatrix& ll) {
  ll.validate();
  const Index S = ll.values.rows();
  const Index n = ll.values.cols();
  WaicResult out;
  out.pointwise.resize(n);
  for (Index j = 0; j < n; ++j) {
    const auto col = ll.values.col(j);
    const double mx = col.maxCoeff();
    const double lppd = mx + std::log((col.array() - mx).exp().sum() / static_cast<double>(S));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(S - 1);
    out.pointwise(j) = lppd - var;
    out.p_waic += var;
    if (var > kWaicUnreliable) ++out.unreliable;
  }
  out.elpd_waic = out.pointwise.sum();
  if (n > 1) {
    const double mean = out.pointwise.mean();
    const double var = (out.pointwise.array() - mean).square().sum() / static_cast<double>(n - 1);
    out.se = std::sqrt(static_cast<double>(n) * var);
  }
  return out;
}

LogLikMatrix pointwise_log_lik(const TwoModuleModel& model, const TwoModuleData& data,
                               const mcmc::SampleMatrix& samples, Target target) {
  const Index dp = model.dim_phi, dt = model.dim_theta;
  if (samples.cols() != dp + 2 * dt) throw contract_error("sample matrix does not match the model's SMI layout");
  const bool want_z = target != Target::y;
  const bool want_y = target != Target::z;
  if (want_z && !model.z_pointwise) throw capability_error("model '" + model.name + "' has no pointwise log p(Z|phi)");
  if (want_y && !model.y_pointwise)
    throw capability_error("model '" + model.name + "' has no pointwise log p(Y|phi,theta)");

  const Index nz = want_z ? data.z.rows() : 0;
  const Index ny = want_y ? data.y.rows() : 0;
  LogLikMatrix ll;
  ll.target = target;
  ll.values.resize(samples.rows(), nz + ny);
  for (Index s = 0; s < samples.rows(); ++s) {
    const Vector phi = samples.draws.row(s).head(dp).transpose();
    const Vector theta = samples.draws.row(s).tail(dt).transpose();
    if (want_z) ll.values.row(s).head(nz) = model.z_pointwise(phi, data.z).transpose();
    if (want_y) ll.values.row(s).tail(ny) = model.y_pointwise(phi, theta, data.y).transpose();
  }
  return ll;
}

std::string EtaSweepTable::to_csv() const {
  io::CsvWriter w({"eta", "elpd_hat", "se", "estimator", "ess_min", "status"});
  for (const auto& r : rows) {
    w.cell(r.eta).cell(r.elpd_hat).cell(r.se).cell(to_string(r.estimator)).cell(r.ess_min).cell(r.status);
    w.end_row();
  }
  return w.str();
}

std::size_t EtaSweepTable::failed() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok(); }));
}

std::vector<Eta> default_grid(int j) {
  if (j < 2) throw contract_error("eta grid needs at least 2 points");
  std::vector<Eta> grid;
  for (int i = 0; i < j; ++i)
    grid.emplace_back(i == j - 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(j - 1));
  return grid;
}

std::vector<Eta> validate_grid(std::vector<Eta> grid) {
  std::sort(grid.begin(), grid.end());
  if (grid.empty() || grid.front().value() != 0.0 || grid.back().value() != 1.0)
    throw contract_error("eta grid must contain both 0 and 1");
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw contract_error("eta grid contains duplicate values");
  return grid;
}

std::uint64_t eta_seed(std::uint64_t master, Eta eta) {
  return derive_seed(derive_seed(master, "eta"), std::bit_cast<std::uint64_t>(eta.value()));
}

EtaSweepTable eta_sweep(const TwoModuleModel& model, const TwoModuleData& data, const std::vector<Eta>& grid,
                        const mcmc::ChainConfig& cfg, const Scorer& scorer, const SweepOptions& options) {
  const std::vector<Eta> sorted = validate_grid(grid);
  EtaSweepTable table;
  table.rows.resize(sorted.size());
  if (options.keep_samples) table.samples.resize(sorted.size());

  parallel_for(sorted.size(), options.threads, [&](std::size_t i) {
    const Eta eta = sorted[i];
    SweepRow& row = table.rows[i];
    try {
      if (const auto* w = std::get_if<WaicScorer>(&scorer))
        row = score_waic(model, data, eta, cfg, *w, options.keep_samples ? &table.samples[i] : nullptr);
      else
        row = score_exact(data, eta, cfg, std::get<ExactGaussianScorer>(scorer));
    } catch (const std::exception& e) {
      row = SweepRow{};
      row.eta = eta.value();
      row.elpd_hat = nan_v;
      row.se = nan_v;
      row.ess_min = nan_v;
      row.estimator = std::holds_alternative<WaicScorer>(scorer) ? Estimator::waic : Estimator::exact;
      std::string what = e.what();
      std::replace(what.begin(), what.end(), ',', ';');
      std::replace(what.begin(), what.end(), '\n', ' ');
      row.status = "failed: " + what;
    }
  });
  return table;
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1 || window % 2 == 0) throw contract_error("moving-average window must be a positive odd integer");
  if (window == 1) return values;
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double sum = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k)
      sum += values[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::size_t argmax_prefer_last(const std::vector<double>& values) {
  if (values.empty()) throw selection_error("cannot select from an empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] >= values[best]) best = i;
  return best;
}

Selection select_eta(const EtaSweepTable& table, int window) {
  Selection sel;
  std::vector<double> raw;
  for (const auto& r : table.rows)
    if (r.ok() && std::isfinite(r.elpd_hat)) {
      sel.eta.push_back(r.eta);
      raw.push_back(r.elpd_hat);
    }
  if (raw.empty()) throw selection_error("every row of the sweep failed; nothing to select");
  sel.curve = moving_average(raw, window);
  sel.eta_star = Eta(sel.eta[argmax_prefer_last(sel.curve)]);
  return sel;
}

} // namespace smi::eval
