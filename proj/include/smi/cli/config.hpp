#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smi/eval.hpp"
#include "smi/gaussian.hpp"
#include "smi/mcmc.hpp"
#include "smi/zoo/custom.hpp"
#include "smi/zoo/hpv.hpp"

namespace smi::cli {

enum class ModelId { gaussian_biased, hpv, custom };

std::string to_string(ModelId id);

struct DataSource {
  std::string kind = "simulate"; ///< simulate | csv
  std::int64_t n = 25;
  std::int64_t m = 50;
  std::filesystem::path z_csv;
  std::filesystem::path y_csv;
  std::filesystem::path hpv_csv;
};

struct SweepSettings {
  std::vector<double> grid; ///< empty: j equally spaced points
  int j = 21;
  std::string scorer = "exact"; ///< exact | waic
  eval::Target target = eval::Target::y;
  std::int64_t n_mc = 4000;
  int smoothing = 1;
  bool keep_samples = false;
};

struct RunConfig {
  ModelId model = ModelId::gaussian_biased;
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path out = "out";

  gaussian::GaussianHyper hyper;
  gaussian::TrueGenerative truth;
  DataSource data;
  zoo::HpvParams hpv_truth;
  std::vector<double> hpv_t;
  std::vector<std::int64_t> hpv_n;
  zoo::HpvPriorSpec hpv_prior;
  zoo::CustomSpec custom;
  mcmc::ChainConfig chain;
  SweepSettings sweep;
  std::int64_t replicates = 1000;

  /// config_error on any inconsistency, io_error when a referenced file is unreadable.
  void validate() const;
  std::vector<Eta> grid() const;
  /// Scales filled in for the model's dimension when the config leaves them out.
  mcmc::ChainConfig chain_for(Index dim_phi, Index dim_theta) const;
  /// Every setting, defaults included, as TOML.
  std::string to_toml() const;
};

/// Reads and validates a TOML file; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir = ".");

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void apply(RunConfig& cfg, const Overrides& overrides);

} // namespace smi::cli
