#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smi/cli/commands.hpp"
#include "smi/cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Semi-modular inference: eta sweeps, replicate studies and reports"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  using Command = int (*)(const smi::cli::RunConfig&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"simulate", smi::cli::cmd_simulate},
      {"sweep", smi::cli::cmd_sweep},
      {"replicate-study", smi::cli::cmd_replicate_study},
      {"report", smi::cli::cmd_report},
  };
  const char* help[] = {"simulate a dataset", "sweep eta and select eta*", "replicate the Gaussian simulation study",
                        "rebuild a study report from its CSV files"};
  Command chosen = nullptr;
  for (std::size_t i = 0; i < 4; ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", config_path, "TOML run configuration")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->callback([&chosen, cmd = commands[i].second] { chosen = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : smi::cli::exit_validation;
  }

  try {
    smi::cli::RunConfig cfg = smi::cli::load_config(config_path);
    smi::cli::Overrides o;
    if (out) o.out = *out;
    o.seed = seed;
    o.threads = threads;
    smi::cli::apply(cfg, o);
    return chosen(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return smi::cli::exit_code_for(e);
  }
}
