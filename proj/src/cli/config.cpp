#include "smi/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "smi/errors.hpp"

namespace smi::cli {

namespace {

using Keys = std::set<std::string>;

void reject_unknown(const toml::table& t, const Keys& allowed, const std::string& where) {
  for (const auto& [k, v] : t) {
    (void)v;
    if (!allowed.count(std::string(k.str())))
      throw config_error("unknown key '" + std::string(k.str()) + "' in " + where);
  }
}

const toml::table* section(const toml::table& root, const char* name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw config_error(std::string("[") + name + "] must be a table");
  return t;
}

std::string where(const char* sec, const std::string& key) {
  return sec ? std::string(sec) + "." + key : key;
}

double get_double(const toml::table& t, const std::string& key, double fallback, const char* sec) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (const auto v = node->value<double>()) return *v;
  if (const auto s = node->value<std::string>()) {
    if (*s == "inf") return std::numeric_limits<double>::infinity();
  }
  throw config_error(where(sec, key) + " must be a number");
}

std::int64_t get_int(const toml::table& t, const std::string& key, std::int64_t fallback, const char* sec) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_integer()) throw config_error(where(sec, key) + " must be an integer");
  return node->value<std::int64_t>().value();
}

std::string get_string(const toml::table& t, const std::string& key, const std::string& fallback, const char* sec) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_string()) throw config_error(where(sec, key) + " must be a string");
  return node->value<std::string>().value();
}

bool get_bool(const toml::table& t, const std::string& key, bool fallback, const char* sec) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_boolean()) throw config_error(where(sec, key) + " must be true or false");
  return node->value<bool>().value();
}

/// Array of numbers, or a single number meaning a one-element list.
std::vector<double> get_doubles(const toml::table& t, const std::string& key, const char* sec) {
  const auto* node = t.get(key);
  std::vector<double> out;
  if (!node) return out;
  if (const auto v = node->value<double>()) return {*v};
  const auto* arr = node->as_array();
  if (!arr) throw config_error(where(sec, key) + " must be a number or an array of numbers");
  for (const auto& el : *arr) {
    const auto v = el.value<double>();
    if (!v) throw config_error(where(sec, key) + " must contain only numbers");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::int64_t> get_ints(const toml::table& t, const std::string& key, const char* sec) {
  const auto* node = t.get(key);
  std::vector<std::int64_t> out;
  if (!node) return out;
  const auto* arr = node->as_array();
  if (!arr) throw config_error(where(sec, key) + " must be an array of integers");
  for (const auto& el : *arr) {
    if (!el.is_integer()) throw config_error(where(sec, key) + " must contain only integers");
    out.push_back(el.value<std::int64_t>().value());
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

toml::array to_array(const std::vector<double>& v) {
  toml::array a;
  for (double x : v)
    a.push_back(x);
  return a;
}

toml::array to_array(const Vector& v) { return to_array(std::vector<double>(v.data(), v.data() + v.size())); }

ModelId parse_model(const std::string& name) {
  if (name == "gaussian-biased") return ModelId::gaussian_biased;
  if (name == "hpv") return ModelId::hpv;
  if (name == "custom") return ModelId::custom;
  throw config_error("unknown model '" + name + "' (gaussian-biased | hpv | custom)");
}

void check_readable(const std::filesystem::path& p, const char* what) {
  std::ifstream in(p);
  if (!in) throw io_error(std::string(what) + " '" + p.string() + "' is not readable");
}

} // namespace

std::string to_string(ModelId id) {
  switch (id) {
  case ModelId::gaussian_biased: return "gaussian-biased";
  case ModelId::hpv: return "hpv";
  case ModelId::custom: return "custom";
  }
  return "?";
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream ss;
    ss << "config parse error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw config_error(ss.str());
  }
  reject_unknown(root,
                 {"model", "seed", "threads", "out", "gaussian", "truth", "data", "hpv", "custom", "chain", "sweep",
                  "study"},
                 "top level");

  RunConfig c;
  c.model = parse_model(get_string(root, "model", "gaussian-biased", nullptr));
  const std::int64_t seed = get_int(root, "seed", 1, nullptr);
  if (seed < 0) throw config_error("seed must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.threads = static_cast<int>(get_int(root, "threads", 1, nullptr));
  c.out = get_string(root, "out", "out", nullptr);
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    if (p.empty()) return {};
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  if (const auto* g = section(root, "gaussian")) {
    reject_unknown(*g, {"sigma_z", "sigma_y", "sigma_phi", "sigma_theta", "sigma_theta_tilde"}, "[gaussian]");
    c.hyper.sigma_z = get_double(*g, "sigma_z", c.hyper.sigma_z, "gaussian");
    c.hyper.sigma_y = get_double(*g, "sigma_y", c.hyper.sigma_y, "gaussian");
    c.hyper.sigma_phi = get_double(*g, "sigma_phi", c.hyper.sigma_phi, "gaussian");
    c.hyper.sigma_theta = get_double(*g, "sigma_theta", c.hyper.sigma_theta, "gaussian");
    c.hyper.sigma_theta_tilde = get_double(*g, "sigma_theta_tilde", c.hyper.sigma_theta, "gaussian");
  }
  if (const auto* t = section(root, "truth")) {
    reject_unknown(*t, {"phi", "theta"}, "[truth]");
    c.truth.phi_star = get_double(*t, "phi", c.truth.phi_star, "truth");
    c.truth.theta_star = get_double(*t, "theta", c.truth.theta_star, "truth");
  }
  if (const auto* d = section(root, "data")) {
    reject_unknown(*d, {"source", "n", "m", "z_csv", "y_csv", "hpv_csv"}, "[data]");
    c.data.kind = get_string(*d, "source", "simulate", "data");
    if (c.data.kind != "simulate" && c.data.kind != "csv") throw config_error("data.source must be simulate or csv");
    const bool has_sim = d->contains("n") || d->contains("m");
    const bool has_csv = d->contains("z_csv") || d->contains("y_csv") || d->contains("hpv_csv");
    if (c.data.kind == "simulate" && has_csv)
      throw config_error("data.source = simulate conflicts with CSV paths; give exactly one data source");
    if (c.data.kind == "csv" && has_sim)
      throw config_error("data.source = csv conflicts with n/m; give exactly one data source");
    c.data.n = get_int(*d, "n", c.data.n, "data");
    c.data.m = get_int(*d, "m", c.data.m, "data");
    c.data.z_csv = resolve(get_string(*d, "z_csv", "", "data"));
    c.data.y_csv = resolve(get_string(*d, "y_csv", "", "data"));
    c.data.hpv_csv = resolve(get_string(*d, "hpv_csv", "", "data"));
  }
  if (const auto* h = section(root, "hpv")) {
    reject_unknown(*h, {"theta1", "theta2", "phi", "T", "N", "theta_prior_mean", "theta_prior_sd", "phi_beta_a",
                        "phi_beta_b"},
                   "[hpv]");
    c.hpv_truth.theta1 = get_double(*h, "theta1", 0.0, "hpv");
    c.hpv_truth.theta2 = get_double(*h, "theta2", 0.0, "hpv");
    c.hpv_truth.phi = get_doubles(*h, "phi", "hpv");
    c.hpv_t = get_doubles(*h, "T", "hpv");
    c.hpv_n = get_ints(*h, "N", "hpv");
    c.hpv_prior.theta_mean = get_double(*h, "theta_prior_mean", c.hpv_prior.theta_mean, "hpv");
    c.hpv_prior.theta_sd = get_double(*h, "theta_prior_sd", c.hpv_prior.theta_sd, "hpv");
    c.hpv_prior.phi_beta_a = get_double(*h, "phi_beta_a", c.hpv_prior.phi_beta_a, "hpv");
    c.hpv_prior.phi_beta_b = get_double(*h, "phi_beta_b", c.hpv_prior.phi_beta_b, "hpv");
  }
  if (const auto* u = section(root, "custom")) {
    reject_unknown(*u, {"family_z", "family_y", "scale_z", "scale_y", "dof", "phi_prior_mean", "phi_prior_sd",
                        "theta_prior_mean", "theta_prior_sd", "theta_tilde_prior_sd"},
                   "[custom]");
    auto& s = c.custom;
    s.family_z = zoo::parse_family(get_string(*u, "family_z", "normal", "custom"));
    s.family_y = zoo::parse_family(get_string(*u, "family_y", "normal", "custom"));
    s.scale_z = get_double(*u, "scale_z", s.scale_z, "custom");
    s.scale_y = get_double(*u, "scale_y", s.scale_y, "custom");
    s.dof = get_double(*u, "dof", s.dof, "custom");
    s.phi_prior_mean = get_double(*u, "phi_prior_mean", s.phi_prior_mean, "custom");
    s.phi_prior_sd = get_double(*u, "phi_prior_sd", s.phi_prior_sd, "custom");
    s.theta_prior_mean = get_double(*u, "theta_prior_mean", s.theta_prior_mean, "custom");
    s.theta_prior_sd = get_double(*u, "theta_prior_sd", s.theta_prior_sd, "custom");
    s.theta_tilde_prior_sd = get_double(*u, "theta_tilde_prior_sd", s.theta_prior_sd, "custom");
  }
  if (const auto* ch = section(root, "chain")) {
    reject_unknown(*ch, {"n1", "n2", "burnin", "thin", "proposal_scales", "stage2_scales", "proposal", "tune_iters",
                         "stage2_mode"},
                   "[chain]");
    auto& k = c.chain;
    k.n1 = get_int(*ch, "n1", k.n1, "chain");
    k.n2 = get_int(*ch, "n2", k.n2, "chain");
    k.burnin = get_int(*ch, "burnin", k.burnin, "chain");
    k.thin = get_int(*ch, "thin", k.thin, "chain");
    k.tune_iters = get_int(*ch, "tune_iters", k.tune_iters, "chain");
    k.proposal_scales = to_vector(get_doubles(*ch, "proposal_scales", "chain"));
    k.stage2_scales = to_vector(get_doubles(*ch, "stage2_scales", "chain"));
    const std::string prop = get_string(*ch, "proposal", "joint", "chain");
    if (prop == "joint") k.proposal = mcmc::ProposalKind::joint;
    else if (prop == "componentwise") k.proposal = mcmc::ProposalKind::componentwise;
    else throw config_error("chain.proposal must be joint or componentwise");
    const std::string mode = get_string(*ch, "stage2_mode", "warm-start", "chain");
    if (mode == "warm-start") k.stage2_mode = mcmc::Stage2Mode::warm_start;
    else if (mode == "parallel") k.stage2_mode = mcmc::Stage2Mode::parallel;
    else throw config_error("chain.stage2_mode must be warm-start or parallel");
  }
  if (const auto* s = section(root, "sweep")) {
    reject_unknown(*s, {"grid", "j", "scorer", "target", "n_mc", "smoothing", "keep_samples"}, "[sweep]");
    auto& w = c.sweep;
    w.grid = get_doubles(*s, "grid", "sweep");
    w.j = static_cast<int>(get_int(*s, "j", w.j, "sweep"));
    w.scorer = get_string(*s, "scorer", w.scorer, "sweep");
    w.target = eval::parse_target(get_string(*s, "target", "y", "sweep"));
    w.n_mc = get_int(*s, "n_mc", w.n_mc, "sweep");
    w.smoothing = static_cast<int>(get_int(*s, "smoothing", w.smoothing, "sweep"));
    w.keep_samples = get_bool(*s, "keep_samples", w.keep_samples, "sweep");
  }
  if (const auto* st = section(root, "study")) {
    reject_unknown(*st, {"replicates"}, "[study]");
    c.replicates = get_int(*st, "replicates", c.replicates, "study");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.out = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
}

void RunConfig::validate() const {
  if (threads < 1) throw config_error("threads must be >= 1");
  if (replicates < 1) throw config_error("study.replicates must be >= 1");
  try {
    hyper.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string("[gaussian] ") + e.what());
  }
  if (sweep.scorer != "exact" && sweep.scorer != "waic") throw config_error("sweep.scorer must be exact or waic");
  if (sweep.scorer == "exact" && model != ModelId::gaussian_biased)
    throw config_error("the exact scorer exists only for the gaussian-biased model");
  if (sweep.n_mc < 100) throw config_error("sweep.n_mc must be >= 100");
  if (sweep.smoothing < 1 || sweep.smoothing % 2 == 0) throw config_error("sweep.smoothing must be a positive odd integer");
  try {
    (void)grid();
  } catch (const contract_error& e) {
    throw config_error(std::string("sweep grid: ") + e.what());
  }
  if (chain.n1 < 1 || chain.n2 < 1 || chain.burnin < 0 || chain.thin < 1 || chain.tune_iters < 0)
    throw config_error("chain: n1, n2, thin must be >= 1 and burnin, tune_iters >= 0");
  for (Index i = 0; i < chain.proposal_scales.size(); ++i)
    if (!(chain.proposal_scales(i) > 0.0)) throw config_error("chain.proposal_scales must be positive");

  if (data.kind == "simulate") {
    if (data.n < 1 || data.m < 1) throw config_error("data.n and data.m must be >= 1");
    if (model == ModelId::custom) throw config_error("the custom model reads its data from CSV (data.source = csv)");
    if (model == ModelId::hpv) {
      const std::size_t k = hpv_truth.phi.size();
      if (k == 0) throw config_error("hpv simulation needs hpv.phi");
      if (hpv_t.size() != k || hpv_n.size() != k) throw config_error("hpv.phi, hpv.T and hpv.N must have equal length");
      for (double p : hpv_truth.phi)
        if (!(p > 0.0 && p < 1.0)) throw config_error("hpv.phi values must lie in (0, 1)");
    }
  } else {
    if (model == ModelId::hpv) {
      if (data.hpv_csv.empty()) throw config_error("data.hpv_csv is required for the hpv model");
      check_readable(data.hpv_csv, "data.hpv_csv");
    } else {
      if (data.z_csv.empty() || data.y_csv.empty()) throw config_error("data.z_csv and data.y_csv are required");
      check_readable(data.z_csv, "data.z_csv");
      check_readable(data.y_csv, "data.y_csv");
    }
  }
  if (model == ModelId::hpv) hpv_prior.validate();
  if (model == ModelId::custom) custom.validate();
}

std::vector<Eta> RunConfig::grid() const {
  if (sweep.grid.empty()) return eval::default_grid(sweep.j);
  std::vector<Eta> g;
  for (double v : sweep.grid)
    g.emplace_back(v);
  return eval::validate_grid(std::move(g));
}

mcmc::ChainConfig RunConfig::chain_for(Index dim_phi, Index dim_theta) const {
  mcmc::ChainConfig k = chain;
  k.seed = seed;
  k.threads = threads;
  const Index d = dim_phi + dim_theta;
  if (k.proposal_scales.size() == 0) k.proposal_scales = Vector::Constant(d, 0.5);
  else if (k.proposal_scales.size() == 1) k.proposal_scales = Vector::Constant(d, k.proposal_scales(0));
  if (k.stage2_scales.size() == 1) k.stage2_scales = Vector::Constant(dim_theta, k.stage2_scales(0));
  if (k.proposal_scales.size() != d)
    throw config_error("chain.proposal_scales needs 1 or " + std::to_string(d) + " entries for this model");
  if (k.stage2_scales.size() != 0 && k.stage2_scales.size() != dim_theta)
    throw config_error("chain.stage2_scales needs 1 or " + std::to_string(dim_theta) + " entries for this model");
  return k;
}

std::string RunConfig::to_toml() const {
  toml::table root;
  root.insert("model", to_string(model));
  root.insert("seed", static_cast<std::int64_t>(seed));
  root.insert("threads", threads);
  root.insert("out", out.generic_string());

  toml::table g;
  g.insert("sigma_z", hyper.sigma_z);
  g.insert("sigma_y", hyper.sigma_y);
  if (std::isinf(hyper.sigma_phi)) g.insert("sigma_phi", "inf");
  else g.insert("sigma_phi", hyper.sigma_phi);
  g.insert("sigma_theta", hyper.sigma_theta);
  g.insert("sigma_theta_tilde", hyper.sigma_theta_tilde);
  root.insert("gaussian", std::move(g));

  toml::table t;
  t.insert("phi", truth.phi_star);
  t.insert("theta", truth.theta_star);
  root.insert("truth", std::move(t));

  toml::table d;
  d.insert("source", data.kind);
  if (data.kind == "simulate") {
    d.insert("n", data.n);
    d.insert("m", data.m);
  } else {
    if (!data.z_csv.empty()) d.insert("z_csv", data.z_csv.generic_string());
    if (!data.y_csv.empty()) d.insert("y_csv", data.y_csv.generic_string());
    if (!data.hpv_csv.empty()) d.insert("hpv_csv", data.hpv_csv.generic_string());
  }
  root.insert("data", std::move(d));

  if (model == ModelId::hpv) {
    toml::table h;
    h.insert("theta1", hpv_truth.theta1);
    h.insert("theta2", hpv_truth.theta2);
    h.insert("phi", to_array(hpv_truth.phi));
    h.insert("T", to_array(hpv_t));
    toml::array n;
    for (auto v : hpv_n)
      n.push_back(v);
    h.insert("N", std::move(n));
    h.insert("theta_prior_mean", hpv_prior.theta_mean);
    h.insert("theta_prior_sd", hpv_prior.theta_sd);
    h.insert("phi_beta_a", hpv_prior.phi_beta_a);
    h.insert("phi_beta_b", hpv_prior.phi_beta_b);
    root.insert("hpv", std::move(h));
  }
  if (model == ModelId::custom) {
    toml::table u;
    u.insert("family_z", zoo::to_string(custom.family_z));
    u.insert("family_y", zoo::to_string(custom.family_y));
    u.insert("scale_z", custom.scale_z);
    u.insert("scale_y", custom.scale_y);
    u.insert("dof", custom.dof);
    u.insert("phi_prior_mean", custom.phi_prior_mean);
    u.insert("phi_prior_sd", custom.phi_prior_sd);
    u.insert("theta_prior_mean", custom.theta_prior_mean);
    u.insert("theta_prior_sd", custom.theta_prior_sd);
    u.insert("theta_tilde_prior_sd", custom.theta_tilde_prior_sd);
    root.insert("custom", std::move(u));
  }

  toml::table ch;
  ch.insert("n1", chain.n1);
  ch.insert("n2", chain.n2);
  ch.insert("burnin", chain.burnin);
  ch.insert("thin", chain.thin);
  ch.insert("tune_iters", chain.tune_iters);
  ch.insert("proposal", mcmc::to_string(chain.proposal));
  ch.insert("stage2_mode", mcmc::to_string(chain.stage2_mode));
  if (chain.proposal_scales.size() > 0) ch.insert("proposal_scales", to_array(chain.proposal_scales));
  if (chain.stage2_scales.size() > 0) ch.insert("stage2_scales", to_array(chain.stage2_scales));
  root.insert("chain", std::move(ch));

  toml::table s;
  std::vector<double> g_values;
  for (const Eta e : grid())
    g_values.push_back(e.value());
  s.insert("grid", to_array(g_values));
  s.insert("scorer", sweep.scorer);
  s.insert("target", eval::to_string(sweep.target));
  s.insert("n_mc", sweep.n_mc);
  s.insert("smoothing", sweep.smoothing);
  s.insert("keep_samples", sweep.keep_samples);
  root.insert("sweep", std::move(s));

  toml::table st;
  st.insert("replicates", replicates);
  root.insert("study", std::move(st));

  std::ostringstream ss;
  ss << root << "\n";
  return ss.str();
}

} // namespace smi::cli
