#include "smi/cli/study.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "smi/errors.hpp"
#include "smi/io.hpp"
#include "smi/parallel.hpp"
#include "smi/svg.hpp"

namespace smi::cli {

namespace {

std::uint64_t replicate_seed(std::uint64_t master, std::int64_t r) {
  return derive_seed(derive_seed(master, "replicate"), static_cast<std::uint64_t>(r));
}

double fraction(std::int64_t k, std::int64_t n) { return n > 0 ? static_cast<double>(k) / static_cast<double>(n) : 0.0; }

} // namespace

StudyRecords run_study(const RunConfig& cfg) {
  if (cfg.model != ModelId::gaussian_biased)
    throw config_error("replicate-study runs the closed-form path of the gaussian-biased model only");
  const std::vector<Eta> grid = cfg.grid();
  const auto R = static_cast<std::size_t>(cfg.replicates);
  const TwoModuleModel model = gaussian::gaussian_biased_model(cfg.hyper);
  const eval::ExactGaussianScorer scorer{cfg.hyper, cfg.truth, cfg.sweep.n_mc};

  std::vector<ReplicateRecord> records(R);
  std::vector<std::vector<CurvePoint>> curves(R);
  parallel_for(R, cfg.threads, [&](std::size_t i) {
    ReplicateRecord& rec = records[i];
    rec.replicate = static_cast<std::int64_t>(i);
    rec.seed = replicate_seed(cfg.seed, rec.replicate);
    try {
      const auto ds = gaussian::simulate_dataset(cfg.truth, cfg.hyper, cfg.data.n, cfg.data.m, rec.seed);
      rec.z_bar = ds.stats.z_bar;
      rec.y_bar = ds.stats.y_bar;
      mcmc::ChainConfig chain = cfg.chain_for(1, 1);
      chain.seed = rec.seed;
      const auto table = eval::eta_sweep(model, ds.as_data(), grid, chain, scorer, {});
      for (const auto& row : table.rows)
        if (!row.ok()) throw numerical_error("eta " + io::format_double(row.eta) + " " + row.status);
      const auto sel = eval::select_eta(table, cfg.sweep.smoothing);
      rec.eta_star = sel.eta_star.value();

      std::vector<CurvePoint>& pts = curves[i];
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto post = gaussian::smi_posterior_moments(ds.stats, cfg.hyper, grid[k]);
        const auto se = gaussian::squared_errors(post, cfg.truth);
        pts.push_back({rec.replicate, grid[k].value(), -table.rows[k].elpd_hat, se.phi, se.theta, se.theta_tilde});
        if (grid[k].value() == 0.0) rec.se_phi_cut = se.phi;
        if (grid[k].value() == 1.0) rec.se_phi_bayes = se.phi;
        if (grid[k] == sel.eta_star) rec.se_phi_smi = se.phi;
      }
    } catch (const std::exception& e) {
      std::string what = e.what();
      std::replace(what.begin(), what.end(), ',', ';');
      rec.status = "failed: " + what;
      curves[i].clear();
    }
  });

  StudyRecords out;
  out.replicates = std::move(records);
  for (auto& c : curves)
    out.curves.insert(out.curves.end(), c.begin(), c.end());
  return out;
}

StudyReport aggregate(const StudyRecords& records) {
  StudyReport rep;
  rep.replicates = static_cast<std::int64_t>(records.replicates.size());
  std::int64_t ok = 0, interior = 0, cut_beats_bayes = 0, smi_beats = 0, smi_ties = 0, smi_loses = 0;
  for (const auto& r : records.replicates) {
    if (!r.ok()) {
      ++rep.failed;
      continue;
    }
    ++ok;
    if (r.eta_star > 0.0 && r.eta_star < 1.0) ++interior;
    if (r.se_phi_cut < r.se_phi_bayes - kSeTieTolerance) ++cut_beats_bayes;
    if (r.se_phi_smi < r.se_phi_cut - kSeTieTolerance) ++smi_beats;
    else if (r.se_phi_smi > r.se_phi_cut + kSeTieTolerance) ++smi_loses;
    else ++smi_ties;
    rep.eta_star.push_back(r.eta_star);
    rep.diff_smi_cut.push_back(r.se_phi_smi - r.se_phi_cut);
    rep.diff_cut_bayes.push_back(r.se_phi_cut - r.se_phi_bayes);
  }
  rep.frac_interior = fraction(interior, ok);
  rep.frac_cut_beats_bayes = fraction(cut_beats_bayes, ok);
  rep.frac_smi_beats_cut = fraction(smi_beats, ok);
  rep.frac_smi_ties_cut = fraction(smi_ties, ok);
  rep.frac_smi_loses_to_cut = fraction(smi_loses, ok);

  // grid order is the order of first appearance
  std::vector<std::int64_t> count;
  for (const auto& p : records.curves) {
    std::size_t k = 0;
    while (k < rep.eta.size() && rep.eta[k] != p.eta)
      ++k;
    if (k == rep.eta.size()) {
      rep.eta.push_back(p.eta);
      rep.mean_neg_elpd.push_back(0.0);
      rep.mse_phi.push_back(0.0);
      rep.mse_theta.push_back(0.0);
      rep.mse_theta_tilde.push_back(0.0);
      count.push_back(0);
    }
    rep.mean_neg_elpd[k] += p.neg_elpd;
    rep.mse_phi[k] += p.se_phi;
    rep.mse_theta[k] += p.se_theta;
    rep.mse_theta_tilde[k] += p.se_theta_tilde;
    ++count[k];
  }
  for (std::size_t k = 0; k < rep.eta.size(); ++k) {
    const auto c = static_cast<double>(count[k]);
    rep.mean_neg_elpd[k] /= c;
    rep.mse_phi[k] /= c;
    rep.mse_theta[k] /= c;
    rep.mse_theta_tilde[k] /= c;
  }
  return rep;
}

std::string replicates_csv(const StudyRecords& records) {
  io::CsvWriter w({"replicate", "seed", "status", "z_bar", "y_bar", "eta_star", "se_phi_cut", "se_phi_bayes",
                   "se_phi_smi"});
  for (const auto& r : records.replicates) {
    w.cell(static_cast<long long>(r.replicate)).cell(std::to_string(r.seed)).cell(r.status);
    w.cell(r.z_bar).cell(r.y_bar).cell(r.eta_star).cell(r.se_phi_cut).cell(r.se_phi_bayes).cell(r.se_phi_smi);
    w.end_row();
  }
  return w.str();
}

std::string curves_csv(const StudyRecords& records) {
  io::CsvWriter w({"replicate", "eta", "neg_elpd", "se_phi", "se_theta", "se_theta_tilde"});
  for (const auto& p : records.curves) {
    w.cell(static_cast<long long>(p.replicate)).cell(p.eta).cell(p.neg_elpd);
    w.cell(p.se_phi).cell(p.se_theta).cell(p.se_theta_tilde);
    w.end_row();
  }
  return w.str();
}

StudyRecords read_study(const std::filesystem::path& dir) {
  StudyRecords out;
  const auto reps = io::read_csv(dir / "replicates.csv");
  const std::size_t c_rep = reps.column("replicate"), c_seed = reps.column("seed"), c_status = reps.column("status");
  const std::size_t c_z = reps.column("z_bar"), c_y = reps.column("y_bar"), c_eta = reps.column("eta_star");
  const std::size_t c_cut = reps.column("se_phi_cut"), c_bayes = reps.column("se_phi_bayes");
  const std::size_t c_smi = reps.column("se_phi_smi");
  for (const auto& row : reps.rows) {
    ReplicateRecord r;
    r.replicate = io::parse_int(row[c_rep]);
    r.seed = std::stoull(row[c_seed]);
    r.status = row[c_status];
    r.z_bar = io::parse_double(row[c_z]);
    r.y_bar = io::parse_double(row[c_y]);
    r.eta_star = io::parse_double(row[c_eta]);
    r.se_phi_cut = io::parse_double(row[c_cut]);
    r.se_phi_bayes = io::parse_double(row[c_bayes]);
    r.se_phi_smi = io::parse_double(row[c_smi]);
    out.replicates.push_back(r);
  }
  const auto curves = io::read_csv(dir / "replicate_curves.csv");
  const std::size_t k_rep = curves.column("replicate"), k_eta = curves.column("eta");
  const std::size_t k_elpd = curves.column("neg_elpd"), k_phi = curves.column("se_phi");
  const std::size_t k_theta = curves.column("se_theta"), k_tt = curves.column("se_theta_tilde");
  for (const auto& row : curves.rows)
    out.curves.push_back({io::parse_int(row[k_rep]), io::parse_double(row[k_eta]), io::parse_double(row[k_elpd]),
                          io::parse_double(row[k_phi]), io::parse_double(row[k_theta]), io::parse_double(row[k_tt])});
  return out;
}

std::string report_json(const StudyReport& rep, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["replicates"] = rep.replicates;
  j["failed"] = rep.failed;
  j["seed"] = cfg.seed;
  j["n"] = cfg.data.n;
  j["m"] = cfg.data.m;
  j["n_mc"] = cfg.sweep.n_mc;
  j["smoothing_window"] = cfg.sweep.smoothing;
  j["se_tie_tolerance"] = kSeTieTolerance;
  j["fractions"] = {{"eta_star_interior", rep.frac_interior},
                    {"cut_beats_bayes_se_phi", rep.frac_cut_beats_bayes},
                    {"smi_beats_cut_se_phi", rep.frac_smi_beats_cut},
                    {"smi_ties_cut_se_phi", rep.frac_smi_ties_cut},
                    {"smi_loses_to_cut_se_phi", rep.frac_smi_loses_to_cut}};
  j["eta"] = rep.eta;
  j["mean_neg_elpd"] = rep.mean_neg_elpd;
  j["mse_phi"] = rep.mse_phi;
  j["mse_theta"] = rep.mse_theta;
  j["mse_theta_tilde"] = rep.mse_theta_tilde;
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const StudyReport& rep, const RunConfig& cfg) {
  io::write_text(dir / "report.json", report_json(rep, cfg));

  svg::Histogram h{"optimal eta per replicate", "eta*", rep.eta_star, 21, -0.025, 1.025};
  io::write_text(dir / "eta_star_hist.svg", svg::render(h));
  io::write_text(dir / "se_diff_smi_cut.svg",
                 svg::render(svg::Histogram{"SE(phi): SMI at eta* minus cut", "difference", rep.diff_smi_cut, 30, {}, {}}));
  io::write_text(dir / "se_diff_cut_bayes.svg",
                 svg::render(svg::Histogram{"SE(phi): cut minus Bayes", "difference", rep.diff_cut_bayes, 30, {}, {}}));

  svg::LinePlot elpd{"average -elpd", "eta", "-elpd", {{"-elpd", rep.eta, rep.mean_neg_elpd, {}, {}}}, {}, {}};
  io::write_text(dir / "neg_elpd.svg", svg::render(elpd));
  svg::LinePlot mse{"average MSE", "eta", "MSE", {}, {}, {}};
  mse.series.push_back({"phi", rep.eta, rep.mse_phi, {}, {}});
  mse.series.push_back({"theta", rep.eta, rep.mse_theta, {}, {}});
  mse.series.push_back({"theta_tilde", rep.eta, rep.mse_theta_tilde, {}, {}});
  io::write_text(dir / "mse.svg", svg::render(mse));
}

} // namespace smi::cli
