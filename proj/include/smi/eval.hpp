#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "smi/gaussian.hpp"
#include "smi/mcmc.hpp"
#include "smi/model.hpp"

namespace smi::eval {

/// Which module's data is scored: Z points, Y points, or both blocks pooled.
enum class Target { z, y, both };

std::string to_string(Target target);
Target parse_target(const std::string& name);

struct LogLikMatrix {
  Matrix values; ///< S x n: draw s, data point j
  Target target = Target::y;

  /// S >= 2, no NaN, no +inf.
  void validate() const;
};

struct WaicResult {
  double elpd_waic = 0.0;
  double p_waic = 0.0;
  double se = 0.0;
  Vector pointwise;            ///< lppd_j - p_waic_j
  std::int64_t unreliable = 0; ///< points with p_waic_j > 0.4
};

inline constexpr double kWaicUnreliable = 0.4;

WaicResult waic(const LogLikMatrix& ll);

/// Pointwise log-likelihood of the chosen target at every draw, using the phi and theta
/// columns of an SMI sample matrix (theta_tilde is not used for prediction).
LogLikMatrix pointwise_log_lik(const TwoModuleModel& model, const TwoModuleData& data,
                               const mcmc::SampleMatrix& samples, Target target);

enum class Estimator { waic, exact, loo };

std::string to_string(Estimator estimator);

struct SweepRow {
  double eta = 0.0;
  double elpd_hat = 0.0;
  double se = 0.0;
  Estimator estimator = Estimator::waic;
  double ess_min = 0.0;
  std::string status = "ok"; ///< "ok" or "failed: <reason>"
  double p_waic = 0.0;
  std::int64_t unreliable = 0;

  bool ok() const { return status == "ok"; }
};

struct EtaSweepTable {
  std::vector<SweepRow> rows;
  std::vector<mcmc::SampleMatrix> samples; ///< filled only when requested

  /// `eta,elpd_hat,se,estimator,ess_min,status`
  std::string to_csv() const;
  std::size_t failed() const;
};

/// WAIC on nested-MCMC draws.
struct WaicScorer {
  Target target = Target::y;
};

/// Closed-form Gaussian posterior and Monte Carlo elpd of the (z0, y0) predictive.
struct ExactGaussianScorer {
  gaussian::GaussianHyper hyper;
  gaussian::TrueGenerative truth;
  std::int64_t n_mc = 4000;
};

using Scorer = std::variant<WaicScorer, ExactGaussianScorer>;

struct SweepOptions {
  int threads = 1;
  bool keep_samples = false;
};

/// Equally spaced grid of j points on [0, 1].
std::vector<Eta> default_grid(int j = 21);

/// Sorted copy of the grid; contract_error unless it contains 0 and 1 without duplicates.
std::vector<Eta> validate_grid(std::vector<Eta> grid);

/** Scores every eta of the grid.
 *
 * Rows run concurrently. Sampler seeds depend on the master seed and the eta value only, so
 * row results do not depend on grid order or thread count. The exact scorer evaluates every
 * eta on the same Monte Carlo draws from the true density. Failures are recorded per row.
 */
EtaSweepTable eta_sweep(const TwoModuleModel& model, const TwoModuleData& data, const std::vector<Eta>& grid,
                        const mcmc::ChainConfig& cfg, const Scorer& scorer, const SweepOptions& options = {});

std::uint64_t eta_seed(std::uint64_t master, Eta eta);

struct Selection {
  Eta eta_star{0.0};
  std::vector<double> eta;   ///< grid of the successful rows
  std::vector<double> curve; ///< smoothed elpd_hat on that grid
};

/// Centered moving average of width `window` (odd, 1 = none) over the successful rows, then
/// argmax with ties going to the larger eta. selection_error if every row failed.
Selection select_eta(const EtaSweepTable& table, int window = 1);

/// Smoothing and argmax on a bare curve, same rules as select_eta.
std::vector<double> moving_average(const std::vector<double>& values, int window);
std::size_t argmax_prefer_last(const std::vector<double>& values);

} // namespace smi::eval
