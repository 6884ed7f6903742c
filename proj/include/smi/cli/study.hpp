#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smi/cli/config.hpp"

namespace smi::cli {

inline constexpr double kSeTieTolerance = 1e-12;

struct ReplicateRecord {
  std::int64_t replicate = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double z_bar = 0.0;
  double y_bar = 0.0;
  double eta_star = 0.0;
  double se_phi_cut = 0.0;   ///< eta = 0
  double se_phi_bayes = 0.0; ///< eta = 1
  double se_phi_smi = 0.0;   ///< eta = eta_star

  bool ok() const { return status == "ok"; }
};

struct CurvePoint {
  std::int64_t replicate = 0;
  double eta = 0.0;
  double neg_elpd = 0.0;
  double se_phi = 0.0;
  double se_theta = 0.0;
  double se_theta_tilde = 0.0;
};

struct StudyRecords {
  std::vector<ReplicateRecord> replicates;
  std::vector<CurvePoint> curves; ///< successful replicates only, grid order
};

struct StudyReport {
  std::int64_t replicates = 0;
  std::int64_t failed = 0;
  double frac_interior = 0.0;           ///< 0 < eta* < 1
  double frac_cut_beats_bayes = 0.0;    ///< SE(phi): cut < Bayes
  double frac_smi_beats_cut = 0.0;      ///< SE(phi): SMI at eta* < cut
  double frac_smi_ties_cut = 0.0;
  double frac_smi_loses_to_cut = 0.0;
  std::vector<double> eta;
  std::vector<double> mean_neg_elpd;
  std::vector<double> mse_phi;
  std::vector<double> mse_theta;
  std::vector<double> mse_theta_tilde;
  std::vector<double> eta_star;      ///< per successful replicate
  std::vector<double> diff_smi_cut;  ///< SE(phi) at eta* minus cut
  std::vector<double> diff_cut_bayes;
};

/// Closed-form sweep with exact elpd on R simulated datasets (gaussian-biased only).
StudyRecords run_study(const RunConfig& cfg);

/// Everything in the report is a function of these records.
StudyReport aggregate(const StudyRecords& records);

std::string replicates_csv(const StudyRecords& records);
std::string curves_csv(const StudyRecords& records);
StudyRecords read_study(const std::filesystem::path& dir);
std::string report_json(const StudyReport& report, const RunConfig& cfg);

/// report.json plus histograms and averaged curves, written into dir.
void write_report(const std::filesystem::path& dir, const StudyReport& report, const RunConfig& cfg);

} // namespace smi::cli
