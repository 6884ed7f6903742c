#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smi/model.hpp"
#include "smi/rng.hpp"
#include "smi/types.hpp"

namespace smi::mcmc {

using LogDensity = std::function<double(const Vector&)>;

enum class ProposalKind {
  joint,        ///< one Gaussian proposal moving every coordinate
  componentwise ///< systematic scan, one coordinate per proposal
};

enum class Stage2Mode {
  warm_start, ///< sub-chain s starts from theta^(s-1); sequential
  parallel    ///< every sub-chain starts from the prior mean; runs concurrently
};

std::string to_string(ProposalKind kind);
std::string to_string(Stage2Mode mode);

struct ChainConfig {
  std::int64_t n1 = 1000;  ///< kept draws
  std::int64_t n2 = 500;   ///< stage-2 sub-chain length
  std::int64_t burnin = 1000;
  std::int64_t thin = 1;
  Vector proposal_scales;  ///< stage 1 / single chain
  Vector stage2_scales;    ///< empty: taken from the theta part of proposal_scales
  std::uint64_t seed = 1;
  ProposalKind proposal = ProposalKind::joint;
  std::int64_t tune_iters = 0; ///< pre-run scale tuning, never part of the output
  Stage2Mode stage2_mode = Stage2Mode::warm_start;
  int threads = 1;

  void validate(Index dim) const;
};

struct SampleMatrix {
  Matrix draws; ///< S x d
  std::vector<std::string> names;
  std::uint64_t seed = 0;
  double accept_rate = 0.0;
  bool all_rejected = false; ///< warning: no proposal accepted after burn-in

  // nested-sampler metadata
  double eta = -1.0; ///< negative when not an SMI run
  double stage2_accept_rate = -1.0;
  std::int64_t stage2_zero_accept = 0; ///< sub-chains that never moved
  Stage2Mode stage2_mode = Stage2Mode::warm_start;
  Vector scales;        ///< proposal scales actually used (after tuning)
  Vector stage2_scales;

  Index rows() const { return draws.rows(); }
  Index cols() const { return draws.cols(); }
  Index column_index(const std::string& name) const;
};

/** Random-walk Metropolis with per-coordinate Gaussian proposal scales.
 *
 * Runs cfg.tune_iters tuning iterations (if any), cfg.burnin burn-in iterations, then keeps
 * every cfg.thin-th state until cfg.n1 draws are stored. Scales stay fixed after tuning.
 */
SampleMatrix rw_metropolis_chain(const LogDensity& target, const Vector& init, const ChainConfig& cfg);

struct Stage2Result {
  Matrix theta; ///< one row per kept phi
  double accept_rate = 0.0;
  std::int64_t zero_accept = 0;
  Vector scales;
};

/// Second stage of the nested sampler: a sub-chain of length cfg.n2 on p(theta | Y, phi_s)
/// for every row of phi_draws, keeping its final state. Reads Y only.
Stage2Result stage2_sweep(const TwoModuleModel& model, const Observations& y, const Matrix& phi_draws,
                          const ChainConfig& cfg);

/// Nested MCMC for the eta-SMI posterior. Columns are ordered (phi, theta_tilde, theta).
SampleMatrix nested_smi_sampler(const TwoModuleModel& model, const TwoModuleData& data, Eta eta,
                                const ChainConfig& cfg);

struct Diagnostics {
  Vector iact;
  Vector ess;
  std::vector<bool> constant; ///< column never varied: iact = inf, ess = 0
};

/// Integrated autocorrelation time by Geyer's initial positive sequence.
double integrated_autocorr_time(const Eigen::Ref<const Vector>& x);

/// Per-column IACT and ESS = S / IACT (capped at S). Requires S >= 100.
Diagnostics diagnostics(const SampleMatrix& samples);

} // namespace smi::mcmc
