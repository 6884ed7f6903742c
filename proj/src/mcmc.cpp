#include "smi/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smi/parallel.hpp"

namespace smi::mcmc {

namespace {

constexpr std::int64_t kTuneBatch = 50;
constexpr double kAcceptLow = 0.2;
constexpr double kAcceptHigh = 0.5;

/// Metropolis state machine shared by the main chain and the stage-2 sub-chains.
class RandomWalk {
public:
  RandomWalk(const LogDensity& target, Vector x, Vector scales, ProposalKind kind, Rng& rng)
      : target_(target), x_(std::move(x)), scales_(std::move(scales)), kind_(kind), rng_(rng),
        proposal_(x_.size()), accepted_(Vector::Zero(x_.size())), proposed_(Vector::Zero(x_.size())) {
    logp_ = target_(x_);
  }

  void step() {
    if (kind_ == ProposalKind::joint) {
      for (Index i = 0; i < x_.size(); ++i)
        proposal_(i) = x_(i) + scales_(i) * rng_.normal();
      if (accept(target_(proposal_))) {
        x_.swap(proposal_);
        accepted_.array() += 1.0;
      }
      proposed_.array() += 1.0;
      return;
    }
    for (Index i = 0; i < x_.size(); ++i) {
      const double old = x_(i);
      x_(i) = old + scales_(i) * rng_.normal();
      const double lp = target_(x_);
      if (accept(lp))
        accepted_(i) += 1.0;
      else
        x_(i) = old;
      proposed_(i) += 1.0;
    }
  }

  void reset_counts() {
    accepted_.setZero();
    proposed_.setZero();
  }

  /// Overall acceptance; for componentwise proposals, the mean over coordinates.
  double accept_rate() const {
    const double p = proposed_.sum();
    return p > 0.0 ? accepted_.sum() / p : 0.0;
  }
  double accept_rate(Index i) const { return proposed_(i) > 0.0 ? accepted_(i) / proposed_(i) : 0.0; }
  double accepted_total() const { return accepted_.sum(); }

  const Vector& state() const { return x_; }
  Vector& scales() { return scales_; }
  ProposalKind kind() const { return kind_; }

private:
  bool accept(double lp_new) {
    if (std::isnan(lp_new) || lp_new == -std::numeric_limits<double>::infinity()) return false;
    const double log_ratio = lp_new - logp_;
    if (log_ratio >= 0.0 || std::log(rng_.uniform_pos()) < log_ratio) {
      logp_ = lp_new;
      return true;
    }
    return false;
  }

  const LogDensity& target_;
  Vector x_;
  Vector scales_;
  ProposalKind kind_;
  Rng& rng_;
  Vector proposal_;
  double logp_ = 0.0;
  Vector accepted_;
  Vector proposed_;
};

double band_factor(double rate) {
  if (rate == 0.0) return 0.3;
  if (rate < kAcceptLow) return 0.6;
  if (rate > kAcceptHigh) return 1.6;
  return 1.0;
}

/// Batch-wise scale adaptation toward acceptance in [0.2, 0.5]. Halfway through, scales are
/// reset from the spread of the states visited so far so that their ratios match the target.
void tune(RandomWalk& walk, std::int64_t iters) {
  if (iters <= 0) return;
  const Index d = walk.state().size();
  const std::int64_t half = iters / 2;
  std::vector<Vector> history;
  history.reserve(static_cast<std::size_t>(half));

  for (std::int64_t it = 0; it < iters; ++it) {
    walk.step();
    if (it >= half / 2 && it < half) history.push_back(walk.state());

    if (it + 1 == half && history.size() >= 20) {
      Vector mean = Vector::Zero(d);
      for (const auto& h : history)
        mean += h;
      mean /= static_cast<double>(history.size());
      Vector var = Vector::Zero(d);
      for (const auto& h : history)
        var.array() += (h - mean).array().square();
      var /= static_cast<double>(history.size() - 1);
      const double factor = walk.kind() == ProposalKind::joint ? 2.38 / std::sqrt(static_cast<double>(d)) : 2.4;
      for (Index i = 0; i < d; ++i)
        if (var(i) > 0.0) walk.scales()(i) = factor * std::sqrt(var(i));
      walk.reset_counts();
      continue;
    }
    if ((it + 1) % kTuneBatch == 0) {
      if (walk.kind() == ProposalKind::joint) {
        walk.scales() *= band_factor(walk.accept_rate());
      } else {
        for (Index i = 0; i < d; ++i)
          walk.scales()(i) *= band_factor(walk.accept_rate(i));
      }
      walk.reset_counts();
    }
  }
  walk.reset_counts();
}

void check_finite_start(double lp) {
  if (!std::isfinite(lp)) throw contract_error("initial state has non-finite log density (out of support?)");
}

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  for (Index i = 0; i < d; ++i)
    names.push_back("x" + std::to_string(i));
  return names;
}

Vector stage2_scales_for(const ChainConfig& cfg, Index dim_phi, Index dim_theta) {
  if (cfg.stage2_scales.size() > 0) {
    if (cfg.stage2_scales.size() != dim_theta) throw contract_error("stage2_scales dimension must equal dim_theta");
    return cfg.stage2_scales;
  }
  return cfg.proposal_scales.segment(dim_phi, dim_theta);
}

} // namespace

std::string to_string(ProposalKind kind) { return kind == ProposalKind::joint ? "joint" : "componentwise"; }
std::string to_string(Stage2Mode mode) { return mode == Stage2Mode::warm_start ? "warm-start" : "parallel"; }

void ChainConfig::validate(Index dim) const {
  if (n1 < 1) throw contract_error("n1 must be >= 1");
  if (n2 < 1) throw contract_error("n2 must be >= 1");
  if (burnin < 0) throw contract_error("burnin must be >= 0");
  if (thin < 1) throw contract_error("thin must be >= 1");
  if (tune_iters < 0) throw contract_error("tune_iters must be >= 0");
  if (proposal_scales.size() != dim)
    throw contract_error("proposal_scales has dimension " + std::to_string(proposal_scales.size()) + ", expected " +
                         std::to_string(dim));
  if (!(proposal_scales.array() > 0.0).all() || !proposal_scales.allFinite())
    throw contract_error("proposal scales must be positive and finite");
  if (stage2_scales.size() > 0 && (!(stage2_scales.array() > 0.0).all() || !stage2_scales.allFinite()))
    throw contract_error("stage-2 proposal scales must be positive and finite");
}

Index SampleMatrix::column_index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw contract_error("no sample column named '" + name + "'");
  return static_cast<Index>(it - names.begin());
}

SampleMatrix rw_metropolis_chain(const LogDensity& target, const Vector& init, const ChainConfig& cfg) {
  cfg.validate(init.size());
  check_finite_start(target(init));

  Rng rng(cfg.seed);
  RandomWalk walk(target, init, cfg.proposal_scales, cfg.proposal, rng);
  tune(walk, cfg.tune_iters);
  for (std::int64_t it = 0; it < cfg.burnin; ++it)
    walk.step();
  walk.reset_counts();

  SampleMatrix out;
  out.draws.resize(cfg.n1, init.size());
  for (std::int64_t s = 0; s < cfg.n1; ++s) {
    for (std::int64_t t = 0; t < cfg.thin; ++t)
      walk.step();
    out.draws.row(s) = walk.state().transpose();
  }
  out.names = default_names(init.size());
  out.seed = cfg.seed;
  out.accept_rate = walk.accept_rate();
  out.all_rejected = walk.accepted_total() == 0.0;
  out.scales = walk.scales();
  return out;
}

Stage2Result stage2_sweep(const TwoModuleModel& model, const Observations& y, const Matrix& phi_draws,
                          const ChainConfig& cfg) {
  if (phi_draws.cols() != model.dim_phi) throw contract_error("stage2_sweep: phi draws have the wrong width");
  const Index S = phi_draws.rows();
  const Index dt = model.dim_theta;
  Vector scales = stage2_scales_for(cfg, model.dim_phi, dt);
  const std::uint64_t stage2_seed = derive_seed(cfg.seed, "stage2");

  Stage2Result out;
  out.theta.resize(S, dt);
  if (S == 0) {
    out.scales = scales;
    return out;
  }

  if (cfg.tune_iters > 0) {
    const Vector phi0 = phi_draws.row(0).transpose();
    const LogDensity pilot = [&](const Vector& theta) { return stage2_conditional_logpdf(model, theta, phi0, y); };
    check_finite_start(pilot(model.theta_init));
    Rng rng(derive_seed(cfg.seed, "stage2-tune"));
    RandomWalk walk(pilot, model.theta_init, scales, cfg.proposal, rng);
    tune(walk, cfg.tune_iters);
    scales = walk.scales();
  }

  std::vector<double> accepted(static_cast<std::size_t>(S), 0.0);
  const double proposals_per_chain =
      static_cast<double>(cfg.n2) * (cfg.proposal == ProposalKind::joint ? 1.0 : static_cast<double>(dt));

  auto run_subchain = [&](Index s, const Vector& start) {
    const Vector phi = phi_draws.row(s).transpose();
    const LogDensity cond = [&](const Vector& theta) { return stage2_conditional_logpdf(model, theta, phi, y); };
    Rng rng(derive_seed(stage2_seed, static_cast<std::uint64_t>(s)));
    RandomWalk walk(cond, start, scales, cfg.proposal, rng);
    for (std::int64_t r = 0; r < cfg.n2; ++r)
      walk.step();
    out.theta.row(s) = walk.state().transpose();
    accepted[static_cast<std::size_t>(s)] = walk.accepted_total();
  };

  if (cfg.stage2_mode == Stage2Mode::parallel) {
    parallel_for(static_cast<std::size_t>(S), cfg.threads,
                 [&](std::size_t s) { run_subchain(static_cast<Index>(s), model.theta_init); });
  } else {
    Vector start = model.theta_init;
    for (Index s = 0; s < S; ++s) {
      run_subchain(s, start);
      start = out.theta.row(s).transpose();
    }
  }

  double total = 0.0;
  for (double a : accepted) {
    total += a;
    if (a == 0.0) ++out.zero_accept;
  }
  out.accept_rate = total / (proposals_per_chain * static_cast<double>(S));
  out.scales = scales;
  return out;
}

SampleMatrix nested_smi_sampler(const TwoModuleModel& model, const TwoModuleData& data, Eta eta,
                                const ChainConfig& cfg) {
  model.validate();
  const Index dp = model.dim_phi;
  const Index dt = model.dim_theta;
  cfg.validate(dp + dt);

  const LogDensity stage1 = [&](const Vector& x) {
    return power_stage1_logpdf(model, x.head(dp), x.tail(dt), data, eta);
  };
  Vector init(dp + dt);
  init << model.phi_init, model.theta_init;

  ChainConfig cfg1 = cfg;
  cfg1.seed = derive_seed(cfg.seed, "stage1");
  SampleMatrix first = rw_metropolis_chain(stage1, init, cfg1);

  const Matrix phi_draws = first.draws.leftCols(dp);
  Stage2Result second = stage2_sweep(model, data.y, phi_draws, cfg);

  SampleMatrix out;
  out.draws.resize(first.rows(), dp + 2 * dt);
  out.draws.leftCols(dp + dt) = first.draws;
  out.draws.rightCols(dt) = second.theta;

  const auto phi_names = model.phi_names.empty() ? default_names(dp) : model.phi_names;
  auto theta_names = model.theta_names;
  if (theta_names.empty())
    for (Index i = 0; i < dt; ++i)
      theta_names.push_back("theta" + std::to_string(i));
  out.names = phi_names;
  for (const auto& n : theta_names)
    out.names.push_back(n + "_tilde");
  for (const auto& n : theta_names)
    out.names.push_back(n);

  out.seed = cfg.seed;
  out.accept_rate = first.accept_rate;
  out.all_rejected = first.all_rejected;
  out.eta = eta.value();
  out.stage2_accept_rate = second.accept_rate;
  out.stage2_zero_accept = second.zero_accept;
  out.stage2_mode = cfg.stage2_mode;
  out.scales = first.scales;
  out.stage2_scales = second.scales;
  return out;
}

double integrated_autocorr_time(const Eigen::Ref<const Vector>& x) {
  const Index S = x.size();
  if (S < 2) throw contract_error("integrated_autocorr_time: need at least two draws");
  const Vector c = x.array() - x.mean();
  const double c0 = c.squaredNorm() / static_cast<double>(S);
  if (!(c0 > 0.0)) return std::numeric_limits<double>::infinity();

  auto rho = [&](Index lag) {
    return c.head(S - lag).dot(c.tail(S - lag)) / static_cast<double>(S) / c0;
  };
  double sum = 0.0;
  for (Index k = 0; 2 * k + 1 < S; ++k) {
    const double gamma = rho(2 * k) + rho(2 * k + 1);
    if (gamma <= 0.0) break;
    sum += gamma;
  }
  return -1.0 + 2.0 * sum;
}

Diagnostics diagnostics(const SampleMatrix& samples) {
  const Index S = samples.rows();
  if (S < 100) throw contract_error("diagnostics: need at least 100 draws, got " + std::to_string(S));
  Diagnostics d;
  d.iact.resize(samples.cols());
  d.ess.resize(samples.cols());
  d.constant.assign(static_cast<std::size_t>(samples.cols()), false);
  for (Index j = 0; j < samples.cols(); ++j) {
    const double tau = integrated_autocorr_time(samples.draws.col(j));
    d.iact(j) = tau;
    if (std::isinf(tau)) {
      d.ess(j) = 0.0;
      d.constant[static_cast<std::size_t>(j)] = true;
    } else {
      d.ess(j) = std::min(static_cast<double>(S), static_cast<double>(S) / tau);
    }
  }
  return d;
}

} // namespace smi::mcmc
