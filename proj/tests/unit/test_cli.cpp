#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "smi/cli/commands.hpp"
#include "smi/cli/config.hpp"
#include "smi/cli/study.hpp"
#include "smi/errors.hpp"
#include "smi/io.hpp"

using namespace smi;
using namespace smi::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "smi_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig config(const std::string& text, const fs::path& out) {
  RunConfig c = parse_config(text);
  c.out = out;
  return c;
}

std::size_t data_rows(const fs::path& csv) { return io::read_csv(csv).rows.size(); }

int run_binary(const std::string& args) {
  const int status = std::system((std::string(SMI_BINARY) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("config defaults and validation") {
  const RunConfig d = parse_config("");
  CHECK(d.model == ModelId::gaussian_biased);
  CHECK(std::isinf(d.hyper.sigma_phi));
  CHECK(d.grid().size() == 21);
  CHECK(d.chain.n2 == 500);

  CHECK_THROWS_AS(parse_config("colour = 3"), config_error);
  CHECK_THROWS_AS(parse_config("[chain]\nn3 = 4"), config_error);
  CHECK_THROWS_AS(parse_config("[data]\nsource = \"simulate\"\nz_csv = \"z.csv\""), config_error);
  CHECK_THROWS_AS(parse_config("[data]\nsource = \"csv\"\nn = 3\nz_csv = \"a\"\ny_csv = \"b\""), config_error);
  CHECK_THROWS_AS(parse_config("[data]\nsource = \"csv\"\nz_csv = \"/nonexistent/z\"\ny_csv = \"/nonexistent/y\""),
                  io_error);
  CHECK_THROWS_AS(parse_config("model = \"custom\""), config_error);
  CHECK_THROWS_AS(parse_config("model = \"hpv\"\n[hpv]\nphi = [0.2]\nT = [10.0]\nN = [5]"), config_error);
  CHECK_THROWS_AS(parse_config("[sweep]\ngrid = [0.0, 0.5]"), config_error);
  CHECK_THROWS_AS(parse_config("[study]\nreplicates = 0"), config_error);
  CHECK_THROWS_AS(parse_config("seed = "), config_error);
}

TEST_CASE("effective config round-trips") {
  const RunConfig c = parse_config("seed = 9\n[gaussian]\nsigma_theta = 0.7\n[sweep]\ngrid = [1.0, 0.0, 0.25]\n"
                                   "scorer = \"waic\"\ntarget = \"both\"\n[chain]\nproposal = \"componentwise\"");
  const std::string once = c.to_toml();
  CHECK(parse_config(once).to_toml() == once);
  CHECK(parse_config(once).hyper.sigma_theta_tilde == 0.7);
}

TEST_CASE("simulate: file shapes, manifest and byte-identical reruns") {
  const auto a = scratch("sim_a"), b = scratch("sim_b");
  const std::string text = "seed = 5\n[truth]\nphi = 0.25\ntheta = 1.5\n[data]\nn = 25\nm = 50";
  std::ostringstream log;
  CHECK(cmd_simulate(config(text, a), log) == exit_ok);
  CHECK(cmd_simulate(config(text, b), log) == exit_ok);
  CHECK(data_rows(a / "z.csv") == 25);
  CHECK(data_rows(a / "y.csv") == 50);
  CHECK(io::read_text(a / "z.csv") == io::read_text(b / "z.csv"));
  CHECK(io::read_text(a / "y.csv") == io::read_text(b / "y.csv"));
  const auto manifest = nlohmann::json::parse(io::read_text(a / "manifest.json"));
  CHECK(manifest["truth"]["phi"].get<double>() == 0.25);
  CHECK(manifest["truth"]["theta"].get<double>() == 1.5);
  CHECK(fs::exists(a / "effective_config.toml"));

  // the simulated files feed a CSV-sourced sweep
  const auto c = scratch("sim_csv_sweep");
  const std::string csv = "[data]\nsource = \"csv\"\nz_csv = \"" + (a / "z.csv").string() + "\"\ny_csv = \"" +
                          (a / "y.csv").string() + "\"\n[sweep]\ngrid = [0.0, 1.0]";
  CHECK(cmd_sweep(config(csv, c), log) == exit_ok);
}

TEST_CASE("sweep: two-point grid, plot, reruns") {
  const auto a = scratch("sweep_a"), b = scratch("sweep_b");
  const std::string text = "[sweep]\ngrid = [0.0, 1.0]\nn_mc = 500";
  std::ostringstream log;
  CHECK(cmd_sweep(config(text, a), log) == exit_ok);
  CHECK(cmd_sweep(config(text, b), log) == exit_ok);
  CHECK(data_rows(a / "sweep.csv") == 2);
  CHECK(io::read_text(a / "sweep.csv") == io::read_text(b / "sweep.csv"));
  CHECK(io::read_text(a / "sweep.svg").find("<polyline") != std::string::npos);
  CHECK(fs::exists(a / "selection.json"));

  const auto w = scratch("sweep_waic");
  const std::string waic = "[sweep]\ngrid = [0.0, 0.5, 1.0]\nscorer = \"waic\"\nkeep_samples = true\n"
                           "[chain]\nn1 = 200\nn2 = 10\nburnin = 100";
  CHECK(cmd_sweep(config(waic, w), log) == exit_ok);
  CHECK(data_rows(w / "samples" / "eta_0.5000.csv") == 200);
  const auto meta = nlohmann::json::parse(io::read_text(w / "samples" / "eta_0.5000.json"));
  CHECK(meta["eta"].get<double>() == 0.5);
  CHECK(meta["stage2_mode"].get<std::string>() == "warm-start");
}

TEST_CASE("replicate study: report is recomputable from the per-replicate CSV") {
  const auto a = scratch("study");
  const std::string text = "seed = 3\n[sweep]\nj = 11\nn_mc = 300\n[study]\nreplicates = 40";
  const RunConfig c = config(text, a);
  std::ostringstream log;
  CHECK(cmd_replicate_study(c, log) == exit_ok);
  const std::string report = io::read_text(a / "report.json");
  CHECK(data_rows(a / "replicates.csv") == 40);
  CHECK(data_rows(a / "replicate_curves.csv") == 40 * 11);
  fs::remove(a / "report.json");
  CHECK(cmd_report(c, log) == exit_ok);
  CHECK(io::read_text(a / "report.json") == report);

  const auto rep = aggregate(read_study(a));
  CHECK(rep.frac_smi_beats_cut + rep.frac_smi_ties_cut + rep.frac_smi_loses_to_cut == doctest::Approx(1.0));
  for (double f : {rep.frac_interior, rep.frac_cut_beats_bayes})
    CHECK((f >= 0.0 && f <= 1.0));
  for (const char* f : {"eta_star_hist.svg", "se_diff_smi_cut.svg", "se_diff_cut_bayes.svg", "mse.svg"})
    CHECK(fs::exists(a / f));
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("exit");
  io::write_text(dir / "good.toml", "[sweep]\ngrid = [0.0, 1.0]\nn_mc = 200\n");
  io::write_text(dir / "bad.toml", "model = \"nonsense\"\n");
  // theta starts where the Poisson mean overflows, so every row fails
  io::write_text(dir / "dead.toml", "model = \"hpv\"\n[hpv]\nphi = [0.3]\nT = [100.0]\nN = [10]\ntheta_prior_mean = 800.0\n"
                                    "[sweep]\nscorer = \"waic\"\ngrid = [0.0, 1.0]\n[chain]\nn1 = 10\nn2 = 2\n");
  const std::string out = " --out " + (dir / "o").string();
  CHECK(run_binary("sweep --config " + (dir / "good.toml").string() + out) == 0);
  CHECK(run_binary("sweep --config " + (dir / "bad.toml").string() + out) == 1);
  CHECK(run_binary("sweep --config " + (dir / "missing.toml").string() + out) == 2);
  CHECK(run_binary("sweep --config " + (dir / "dead.toml").string() + out) == 3);
  CHECK(run_binary("sweep --config " + (dir / "good.toml").string() + " --out /proc/no_such_dir") == 2);
  CHECK(run_binary("frobnicate") == 1);
  CHECK(run_binary("sweep --config " + (dir / "good.toml").string() + " --seed 17" + out) == 0);
  CHECK(io::read_text(dir / "o" / "effective_config.toml").find("seed = 17") != std::string::npos);
}
