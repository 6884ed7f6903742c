// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// usage: acceptance <artifact-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "smi/cli/config.hpp"
#include "smi/cli/study.hpp"
#include "smi/eval.hpp"
#include "smi/gaussian.hpp"
#include "smi/io.hpp"
#include "smi/mcmc.hpp"
#include "smi/rng.hpp"
#include "smi/stationarity.hpp"
#include "smi/zoo/hpv.hpp"

using namespace smi;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 20240101;

// tolerances
constexpr double kReferenceTol = 1e-4;
constexpr double kQuadratureRelTol = 1e-6;
constexpr double kSamplerZ = 3.0;
constexpr double kStationarityTol = 1e-12;
constexpr double kCoherenceTol = 1e-10;
constexpr double kInteriorLo = 0.20, kInteriorHi = 0.55;
constexpr double kCutBeatsBayesLo = 0.50, kCutBeatsBayesHi = 0.75;
constexpr double kSmiLosesMax = 0.02;
constexpr double kMseTieTol = 1e-12;
constexpr double kSpearmanMin = 0.8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// Dataset whose sample means are exactly the reference ones.
TwoModuleData reference_data() {
  Observations z(25, 1), y(50, 1);
  for (Index i = 0; i < 25; ++i)
    z(i, 0) = 1.5 * std::sin(1.0 + static_cast<double>(i));
  for (Index j = 0; j < 50; ++j)
    y(j, 0) = 0.8 * std::cos(2.0 + static_cast<double>(j));
  z.array() += -0.0667 - z.mean();
  y.array() += 1.0562 - y.mean();
  return {z, y};
}

// ---------------------------------------------------------------------------

Outcome reference_values() {
  const gaussian::GaussianHyper h;
  const gaussian::GaussianSuffStats s{25, 50, -0.0667, 1.0562};
  const auto post = gaussian::smi_posterior_moments(s, h, Eta(1.0));
  Vector expected(3);
  expected << 0.3511, 0.6528, 0.6528;
  const double err = (post.mean - expected).cwiseAbs().maxCoeff();
  return {err <= kReferenceTol, fmt("means (%.4f", post.mean(0)) + fmt(", %.4f", post.mean(1)) + fmt(", %.4f)", post.mean(2)) +
                                fmt(", max |diff| %.2e", err) + fmt(" (tol %.0e)", kReferenceTol)};
}

Outcome quadrature_oracle() {
  const TwoModuleData data = reference_data();
  const gaussian::GaussianHyper h;
  const TwoModuleModel model = gaussian::gaussian_biased_model(h);
  const auto stats = gaussian::GaussianSuffStats::from_observations(data.z, data.y);
  const int k = 101;
  double worst = 0.0;
  for (int e = 0; e <= 10; ++e) {
    const Eta eta(e / 10.0);
    const auto post = gaussian::smi_posterior_moments(stats, h, eta);
    std::vector<std::vector<double>> x(3);
    std::vector<double> step(3);
    for (int d = 0; d < 3; ++d) {
      const double sd = std::sqrt(post.cov(d, d)), lo = post.mean(d) - 8 * sd;
      step[d] = 16 * sd / (k - 1);
      for (int i = 0; i < k; ++i)
        x[d].push_back(lo + step[d] * i);
    }
    // unnormalized log density on the grid, shifted by its value at the mode for stability
    const auto logf = [&](double a, double b, double c) {
      const SmiParams p{Vector::Constant(1, a), Vector::Constant(1, b), Vector::Constant(1, c)};
      return -smi_log_loss(model, p, data, eta) + log_prior(model, p);
    };
    const double ref = logf(post.mean(0), post.mean(1), post.mean(2));
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(k) * k * k);
    double total = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l) {
          const double v = std::exp(logf(x[0][i], x[1][j], x[2][l]) - ref);
          const double w = (i == 0 || i == k - 1 ? 0.5 : 1.0) * (j == 0 || j == k - 1 ? 0.5 : 1.0) *
                           (l == 0 || l == k - 1 ? 0.5 : 1.0);
          f.push_back(v);
          total += w * v;
        }
    total *= step[0] * step[1] * step[2];
    const double peak = post.log_density(post.mean);
    std::size_t idx = 0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l, ++idx) {
          Vector v(3);
          v << x[0][i], x[1][j], x[2][l];
          const double closed = post.log_density(v);
          if (closed > peak + std::log(1e-6)) worst = std::max(worst, std::abs(f[idx] / total / std::exp(closed) - 1.0));
        }
  }
  return {worst <= kQuadratureRelTol,
          "101^3 trapezoid grid, 11 eta values, max relative error " + fmt("%.2e", worst) +
              fmt(" (tol %.0e)", kQuadratureRelTol)};
}

/// Standard error of the mean of a chain from its integrated autocorrelation time.
double chain_se(const Vector& x) {
  const double m = x.mean();
  const double var = (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
  return std::sqrt(var * mcmc::integrated_autocorr_time(x) / static_cast<double>(x.size()));
}

Outcome sampler_correctness(const fs::path& dir) {
  const TwoModuleData data = reference_data();
  const gaussian::GaussianHyper h;
  const TwoModuleModel model = gaussian::gaussian_biased_model(h);
  const auto stats = gaussian::GaussianSuffStats::from_observations(data.z, data.y);
  double worst = 0.0;
  std::string where;
  for (double e : {0.0, 0.5, 1.0}) {
    const Eta eta(e);
    mcmc::ChainConfig cfg;
    cfg.n1 = 5000;
    cfg.n2 = 500;
    cfg.burnin = 2000;
    cfg.tune_iters = 2000;
    cfg.proposal_scales = Vector::Constant(2, 0.3);
    cfg.stage2_scales = Vector::Constant(1, 0.3);
    cfg.seed = eval::eta_seed(derive_seed(kMasterSeed, "sampler"), eta);
    const auto s = mcmc::nested_smi_sampler(model, data, eta, cfg);
    io::write_samples(dir / "sampler" / ("eta_" + fmt("%.1f", e) + ".csv"), s);

    const auto post = gaussian::smi_posterior_moments(stats, h, eta);
    const Vector cols[2] = {s.draws.col(0), s.draws.col(2)}; // phi, theta
    for (int p = 0; p < 2; ++p) {
      const Vector& x = cols[p];
      const double m = x.mean();
      const Vector dev2 = (x.array() - m).square().matrix();
      const double var = dev2.sum() / static_cast<double>(x.size() - 1);
      const double z_mean = std::abs(m - post.mean(p)) / chain_se(x);
      const double z_var = std::abs(var - post.cov(p, p)) / chain_se(dev2);
      for (double z : {z_mean, z_var})
        if (z > worst) {
          worst = z;
          where = std::string(p == 0 ? "phi" : "theta") + (z == z_mean ? " mean" : " variance") + fmt(" at eta %.1f", e);
        }
    }
  }
  return {worst <= kSamplerZ, "N1=5000 N2=500, eta {0, 0.5, 1}; largest deviation " + fmt("%.2f MC se", worst) + " (" +
                                  where + fmt(", tol %.0f)", kSamplerZ)};
}

Outcome exact_stationarity() {
  double worst = 0.0;
  for (double e : {0.0, 0.3, 1.0}) {
    mcmc::DiscreteTwoModuleSpec s;
    s.log_z_lik = Vector{{std::log(0.3), std::log(0.7)}};
    s.log_y_lik = Matrix{{std::log(0.2), std::log(0.6)}, {std::log(0.9), std::log(0.05)}};
    s.log_prior_phi = Vector{{std::log(0.4), std::log(0.6)}};
    s.log_prior_theta = Vector{{std::log(0.5), std::log(0.5)}};
    s.log_prior_theta_tilde = Vector{{std::log(0.25), std::log(0.75)}};
    s.eta = Eta(e);
    worst = std::max(worst, mcmc::two_stage_kernel_stationarity(s));
  }
  return {worst <= kStationarityTol,
          "2x2x2 model, eta {0, 0.3, 1}; max residual " + fmt("%.2e", worst) + fmt(" (tol %.0e)", kStationarityTol)};
}

Outcome coherence() {
  const gaussian::GaussianHyper h;
  const gaussian::GaussianSuffStats batch{25, 50, -0.0667, 1.0562};
  // block means chosen so the pooled means equal the batch ones
  const double z1 = 0.4, z2 = (25 * -0.0667 - 10 * z1) / 15;
  const double y1 = 0.7, y2 = (50 * 1.0562 - 20 * y1) / 30;
  double worst = 0.0;
  for (double e : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const Eta eta(e);
    const auto ref = gaussian::smi_posterior_moments(batch, h, eta);
    std::vector<std::function<void(gaussian::SmiGaussianBelief&)>> orders = {
        [&](auto& b) { b.observe_z(10, z1); b.observe_z(15, z2); b.observe_y(50, batch.y_bar); },
        [&](auto& b) { b.observe_z(25, batch.z_bar); b.observe_y(20, y1); b.observe_y(30, y2); },
        [&](auto& b) { b.observe_y(50, batch.y_bar); b.observe_z(25, batch.z_bar); },
    };
    for (const auto& apply : orders) {
      gaussian::SmiGaussianBelief b(h, eta);
      apply(b);
      const auto got = b.moments();
      worst = std::max({worst, (got.mean - ref.mean).cwiseAbs().maxCoeff(), (got.cov - ref.cov).cwiseAbs().maxCoeff()});
    }
  }
  return {worst <= kCoherenceTol, "Z split, Y split, Y-then-Z at 5 eta values; max moment difference " +
                                      fmt("%.2e", worst) + fmt(" (tol %.0e)", kCoherenceTol)};
}

cli::RunConfig study_config() { return cli::load_config(fs::path(SMI_CONFIG_DIR) / "gaussian_study.toml"); }

Outcome simulation_study(const fs::path& dir) {
  const cli::RunConfig cfg = study_config();
  const cli::StudyRecords rec = cli::run_study(cfg);
  io::write_text(dir / "study" / "replicates.csv", cli::replicates_csv(rec));
  io::write_text(dir / "study" / "replicate_curves.csv", cli::curves_csv(rec));
  const cli::StudyReport r = cli::aggregate(rec);

  const bool a = r.mean_neg_elpd.front() < r.mean_neg_elpd.back();
  const bool b = r.frac_interior >= kInteriorLo && r.frac_interior <= kInteriorHi;
  const bool c = r.frac_cut_beats_bayes >= kCutBeatsBayesLo && r.frac_cut_beats_bayes <= kCutBeatsBayesHi;
  const bool d = r.frac_smi_loses_to_cut <= kSmiLosesMax;
  bool e = true;
  for (std::size_t k = 0; k < r.eta.size(); ++k)
    e = e && r.mse_theta[k] <= r.mse_theta_tilde[k] + kMseTieTol;
  const auto mark = [](bool ok) { return ok ? "ok" : "FAILED"; };
  std::string detail = "R=" + std::to_string(r.replicates) + " (" + std::to_string(r.failed) + " failed)";
  detail += fmt("; (a) -elpd %.4f at eta 0", r.mean_neg_elpd.front()) + fmt(" vs %.4f at eta 1 ", r.mean_neg_elpd.back()) + mark(a);
  detail += fmt("; (b) interior eta* %.3f ", r.frac_interior) + mark(b);
  detail += fmt("; (c) cut beats Bayes %.3f ", r.frac_cut_beats_bayes) + mark(c);
  detail += fmt("; (d) SMI loses to cut %.3f ", r.frac_smi_loses_to_cut) + mark(d);
  detail += std::string("; (e) MSE(theta) <= MSE(theta_tilde) on the grid ") + mark(e);
  return {r.failed == 0 && a && b && c && d && e, detail};
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]])
      ++j;
    for (std::size_t k = i; k <= j; ++k)
      r[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

Outcome waic_validity(const fs::path& dir) {
  const cli::RunConfig cfg = study_config();
  const TwoModuleModel model = gaussian::gaussian_biased_model(cfg.hyper);
  const std::vector<Eta> grid = cfg.grid();
  const int replicates = 50;

  mcmc::ChainConfig chain;
  chain.n1 = 4000;
  chain.n2 = 100;
  chain.burnin = 1000;
  chain.tune_iters = 1000;
  chain.proposal_scales = Vector::Constant(2, 0.3);
  chain.stage2_scales = Vector::Constant(1, 0.3);

  io::CsvWriter out({"replicate", "eta", "elpd_waic", "se_waic", "elpd_exact"});
  std::vector<double> avg_waic(grid.size(), 0.0), avg_exact(grid.size(), 0.0);
  double mean_rho = 0.0;
  int failed = 0;
  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t seed = derive_seed(derive_seed(kMasterSeed, "waic-replicate"), static_cast<std::uint64_t>(r));
    const auto ds = gaussian::simulate_dataset(cfg.truth, cfg.hyper, cfg.data.n, cfg.data.m, seed);
    chain.seed = seed;
    const auto w = eval::eta_sweep(model, ds.as_data(), grid, chain, eval::WaicScorer{eval::Target::both});
    const auto x = eval::eta_sweep(model, ds.as_data(), grid, chain,
                                   eval::ExactGaussianScorer{cfg.hyper, cfg.truth, cfg.sweep.n_mc});
    failed += static_cast<int>(w.failed() + x.failed());
    std::vector<double> a, b;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out.cell(static_cast<long long>(r)).cell(grid[k].value()).cell(w.rows[k].elpd_hat).cell(w.rows[k].se);
      out.cell(x.rows[k].elpd_hat).end_row();
      a.push_back(w.rows[k].elpd_hat);
      b.push_back(x.rows[k].elpd_hat);
      avg_waic[k] += a.back() / replicates;
      avg_exact[k] += b.back() / replicates;
    }
    mean_rho += spearman(a, b) / replicates;
  }
  io::write_text(dir / "waic" / "waic_vs_exact.csv", out.str());
  const double rho = spearman(avg_waic, avg_exact);
  return {failed == 0 && rho >= kSpearmanMin,
          "50 replicates, 21-point grid; Spearman of replicate-averaged WAIC and exact elpd curves " +
              fmt("%.3f", rho) + fmt(" (min %.1f)", kSpearmanMin) + fmt("; mean per-replicate Spearman %.3f", mean_rho) +
              "; failed rows " + std::to_string(failed)};
}

Outcome hpv_directionality(const fs::path& dir) {
  const int I = 13;
  zoo::HpvParams truth{-8.0, 10.0, {}};
  std::vector<double> t;
  std::vector<std::int64_t> n;
  for (int i = 0; i < I; ++i) {
    truth.phi.push_back(0.05 + 0.25 * i / (I - 1));
    t.push_back(2e4 + 8e4 * ((i * 5) % I) / (I - 1));
    n.push_back(30 + (i * 7) % 31);
  }
  const auto data = zoo::hpv_simulate(truth, t, n, derive_seed(kMasterSeed, "hpv-data"));
  zoo::write_hpv_csv(dir / "hpv" / "hpv.csv", data);
  const TwoModuleModel model = zoo::hpv_model(data);

  mcmc::ChainConfig chain;
  chain.n1 = 4000;
  chain.n2 = 200;
  chain.burnin = 2000;
  chain.tune_iters = 2000;
  chain.proposal = mcmc::ProposalKind::componentwise;
  chain.proposal_scales = Vector::Constant(I + 2, 0.3);
  chain.stage2_scales = Vector::Constant(2, 0.3);
  chain.seed = derive_seed(kMasterSeed, "hpv-sweep");
  const auto table = eval::eta_sweep(model, data.as_data(), {Eta(0.0), Eta(1.0)}, chain,
                                     eval::WaicScorer{eval::Target::y});
  io::write_text(dir / "hpv" / "sweep.csv", table.to_csv());
  if (table.failed() > 0) return {false, "sweep rows failed: " + table.rows[0].status + " / " + table.rows[1].status};
  const auto& r0 = table.rows[0];
  const auto& r1 = table.rows[1];
  const double margin = std::sqrt(r0.se * r0.se + r1.se * r1.se);
  const double gain = r1.elpd_hat - r0.elpd_hat;
  return {gain > margin, "13 synthetic populations, Poisson-module WAIC; elpd " + fmt("%.2f at eta 0", r0.elpd_hat) +
                             fmt(", %.2f at eta 1", r1.elpd_hat) + fmt("; gain %.2f", gain) +
                             fmt(" vs combined se %.2f", margin)};
}

/// Runs every criterion that writes CSV artifacts into dir.
struct ArtifactRun {
  Outcome sampler, study, waic, hpv;
};

ArtifactRun produce(const fs::path& dir, const std::function<void(int, const Outcome&, double)>& report) {
  ArtifactRun run;
  const auto timed = [&](int id, Outcome& slot, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      slot = f();
    } catch (const std::exception& e) {
      slot = {false, std::string("threw: ") + e.what()};
    }
    report(id, slot, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  timed(3, run.sampler, [&] { return sampler_correctness(dir); });
  timed(6, run.study, [&] { return simulation_study(dir); });
  timed(7, run.waic, [&] { return waic_validity(dir); });
  timed(8, run.hpv, [&] { return hpv_directionality(dir); });
  return run;
}

std::vector<fs::path> csv_files(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

const char* kTitles[] = {"",
                         "reference-value reproduction",
                         "quadrature oracle",
                         "sampler correctness",
                         "exact stationarity",
                         "coherence",
                         "simulation study",
                         "WAIC validity",
                         "HPV directionality",
                         "determinism"};

} // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_artifacts");
  fs::remove_all(root);
  bool all = true;
  const auto report = [&](int id, const Outcome& o, double seconds) {
    all = all && o.pass;
    std::printf("[%s] %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, kTitles[id], o.detail.c_str(), seconds);
    std::fflush(stdout);
  };
  const auto timed = [&](int id, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    report(id, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };

  timed(1, reference_values);
  timed(2, quadrature_oracle);
  timed(4, exact_stationarity);
  timed(5, coherence);
  produce(root / "run1", report);
  timed(9, [&] {
    produce(root / "run2", [](int, const Outcome&, double) {});
    const auto a = csv_files(root / "run1"), b = csv_files(root / "run2");
    if (a != b) return Outcome{false, "run1 and run2 wrote different sets of CSV files"};
    for (const auto& f : a)
      if (io::read_text(root / "run1" / f) != io::read_text(root / "run2" / f))
        return Outcome{false, f.string() + " differs between runs"};
    return Outcome{true, std::to_string(a.size()) + " CSV artifacts byte-identical across two runs with seed " +
                             std::to_string(kMasterSeed)};
  });
  std::printf("%s\n", all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
