#include "smi/cli/commands.hpp"

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "smi/cli/study.hpp"
#include "smi/errors.hpp"
#include "smi/eval.hpp"
#include "smi/io.hpp"
#include "smi/svg.hpp"
#include "smi/zoo/custom.hpp"
#include "smi/zoo/hpv.hpp"

namespace smi::cli {

namespace {

std::uint64_t data_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, "data"); }

zoo::HpvData hpv_data(const RunConfig& cfg) {
  if (cfg.data.kind == "csv") return zoo::read_hpv_csv(cfg.data.hpv_csv);
  return zoo::hpv_simulate(cfg.hpv_truth, cfg.hpv_t, cfg.hpv_n, data_seed(cfg));
}

void write_effective_config(const RunConfig& cfg) { io::write_text(cfg.out / "effective_config.toml", cfg.to_toml()); }

std::string eta_tag(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", eta);
  return buf;
}

} // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const config_error*>(&e) || dynamic_cast<const data_error*>(&e) ||
      dynamic_cast<const contract_error*>(&e) || dynamic_cast<const std::invalid_argument*>(&e))
    return exit_validation;
  return exit_runtime;
}

Problem load_problem(const RunConfig& cfg) {
  Problem p;
  switch (cfg.model) {
  case ModelId::gaussian_biased: {
    p.model = gaussian::gaussian_biased_model(cfg.hyper);
    if (cfg.data.kind == "csv") {
      p.data = {io::read_value_csv(cfg.data.z_csv), io::read_value_csv(cfg.data.y_csv)};
    } else {
      p.data = gaussian::simulate_dataset(cfg.truth, cfg.hyper, cfg.data.n, cfg.data.m, data_seed(cfg)).as_data();
    }
    break;
  }
  case ModelId::hpv: {
    const zoo::HpvData d = hpv_data(cfg);
    p.model = zoo::hpv_model(d, cfg.hpv_prior);
    p.data = d.as_data();
    break;
  }
  case ModelId::custom: {
    p.model = zoo::custom_model(cfg.custom);
    p.data = {io::read_value_csv(cfg.data.z_csv), io::read_value_csv(cfg.data.y_csv)};
    p.model.phi_init = Vector::Constant(1, p.data.z.col(0).mean());
    break;
  }
  }
  return p;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.data.kind != "simulate") throw config_error("simulate needs data.source = simulate");
  nlohmann::ordered_json manifest;
  manifest["model"] = to_string(cfg.model);
  manifest["seed"] = cfg.seed;
  manifest["data_seed"] = data_seed(cfg);
  manifest["rng"] = "mt19937_64, SplitMix64 stream derivation";

  if (cfg.model == ModelId::gaussian_biased) {
    const auto ds = gaussian::simulate_dataset(cfg.truth, cfg.hyper, cfg.data.n, cfg.data.m, data_seed(cfg));
    io::write_value_csv(cfg.out / "z.csv", ds.z);
    io::write_value_csv(cfg.out / "y.csv", ds.y);
    manifest["truth"] = {{"phi", cfg.truth.phi_star}, {"theta", cfg.truth.theta_star}};
    manifest["hyper"] = {{"sigma_z", cfg.hyper.sigma_z},
                         {"sigma_y", cfg.hyper.sigma_y},
                         {"sigma_phi", std::isinf(cfg.hyper.sigma_phi) ? nlohmann::json("inf")
                                                                       : nlohmann::json(cfg.hyper.sigma_phi)},
                         {"sigma_theta", cfg.hyper.sigma_theta},
                         {"sigma_theta_tilde", cfg.hyper.sigma_theta_tilde}};
    manifest["n"] = ds.stats.n;
    manifest["m"] = ds.stats.m;
    manifest["z_bar"] = ds.stats.z_bar;
    manifest["y_bar"] = ds.stats.y_bar;
    manifest["files"] = {"z.csv", "y.csv"};
    log << "wrote " << ds.stats.n << " Z and " << ds.stats.m << " Y values to " << cfg.out.string() << "\n";
  } else if (cfg.model == ModelId::hpv) {
    const auto d = hpv_data(cfg);
    zoo::write_hpv_csv(cfg.out / "hpv.csv", d);
    manifest["truth"] = {{"theta1", cfg.hpv_truth.theta1}, {"theta2", cfg.hpv_truth.theta2}, {"phi", cfg.hpv_truth.phi}};
    manifest["populations"] = d.populations();
    manifest["files"] = {"hpv.csv"};
    log << "wrote " << d.populations() << " populations to " << (cfg.out / "hpv.csv").string() << "\n";
  } else {
    throw config_error("the custom model has no simulator");
  }
  io::write_text(cfg.out / "manifest.json", manifest.dump(2) + "\n");
  write_effective_config(cfg);
  return exit_ok;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  const Problem p = load_problem(cfg);
  const mcmc::ChainConfig chain = cfg.chain_for(p.model.dim_phi, p.model.dim_theta);
  eval::Scorer scorer = eval::WaicScorer{cfg.sweep.target};
  if (cfg.sweep.scorer == "exact") scorer = eval::ExactGaussianScorer{cfg.hyper, cfg.truth, cfg.sweep.n_mc};
  eval::SweepOptions opts;
  opts.threads = cfg.threads;
  opts.keep_samples = cfg.sweep.keep_samples && cfg.sweep.scorer == "waic";

  const eval::EtaSweepTable table = eval::eta_sweep(p.model, p.data, cfg.grid(), chain, scorer, opts);
  write_effective_config(cfg);
  io::write_text(cfg.out / "sweep.csv", table.to_csv());
  for (std::size_t i = 0; i < table.samples.size(); ++i)
    if (table.samples[i].rows() > 0)
      io::write_samples(cfg.out / "samples" / ("eta_" + eta_tag(table.rows[i].eta) + ".csv"), table.samples[i]);

  for (const auto& r : table.rows)
    if (!r.ok()) log << "eta " << r.eta << ": " << r.status << "\n";
  if (table.failed() == table.rows.size()) {
    log << "all " << table.rows.size() << " rows failed\n";
    return exit_all_failed;
  }

  const eval::Selection sel = eval::select_eta(table, cfg.sweep.smoothing);
  svg::Series s{"-elpd", {}, {}, {}, {}};
  for (const auto& r : table.rows) {
    if (!r.ok()) continue;
    s.x.push_back(r.eta);
    s.y.push_back(-r.elpd_hat);
    s.lower.push_back(-r.elpd_hat - r.se);
    s.upper.push_back(-r.elpd_hat + r.se);
  }
  svg::LinePlot plot{"-elpd over eta (" + cfg.sweep.scorer + ")", "eta", "-elpd", {s}, sel.eta_star.value(),
                     "eta* = " + io::format_double(sel.eta_star.value())};
  io::write_text(cfg.out / "sweep.svg", svg::render(plot));

  nlohmann::ordered_json j;
  j["eta_star"] = sel.eta_star.value();
  j["smoothing_window"] = cfg.sweep.smoothing;
  j["estimator"] = cfg.sweep.scorer;
  j["target"] = eval::to_string(cfg.sweep.target);
  j["failed_rows"] = table.failed();
  j["eta"] = sel.eta;
  j["smoothed_elpd"] = sel.curve;
  io::write_text(cfg.out / "selection.json", j.dump(2) + "\n");
  log << "eta* = " << sel.eta_star.value() << " (" << table.rows.size() - table.failed() << "/" << table.rows.size()
      << " rows ok)\n";
  return exit_ok;
}

int cmd_replicate_study(const RunConfig& cfg, std::ostream& log) {
  const StudyRecords records = run_study(cfg);
  write_effective_config(cfg);
  io::write_text(cfg.out / "replicates.csv", replicates_csv(records));
  io::write_text(cfg.out / "replicate_curves.csv", curves_csv(records));
  const StudyReport rep = aggregate(records);
  write_report(cfg.out, rep, cfg);
  for (const auto& r : records.replicates)
    if (!r.ok()) log << "replicate " << r.replicate << ": " << r.status << "\n";
  log << rep.replicates - rep.failed << "/" << rep.replicates << " replicates; eta* interior "
      << rep.frac_interior << ", cut beats Bayes " << rep.frac_cut_beats_bayes << ", SMI loses to cut "
      << rep.frac_smi_loses_to_cut << "\n";
  return rep.failed == rep.replicates ? exit_all_failed : exit_ok;
}

int cmd_report(const RunConfig& cfg, std::ostream& log) {
  const StudyRecords records = read_study(cfg.out);
  const StudyReport rep = aggregate(records);
  write_report(cfg.out, rep, cfg);
  log << "report rebuilt from " << records.replicates.size() << " replicate records\n";
  return exit_ok;
}

} // namespace smi::cli
