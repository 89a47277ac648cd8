#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hvctl/config.hpp"
#include "hvctl/ensemble.hpp"

namespace hvctl {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitIo = 2 };

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSweepHeader = "eps,error_mean,error_ci,energy_mean,fp_rate,wallclock_s";
inline constexpr const char* kReportHeader =
    "eps,error_mean,error_ci,energy_mean,fp_rate,mean_iterations,sup_moment,apriori_bound,weak_residual_max,"
    "hvi_slack_min,terminal_identity_max,selection_defect_max,paths,failures";

/// Shortest decimal text that round-trips the double.
std::string format_number(double v);

std::string sweep_csv(const SweepResult& result, const ExperimentConfig& config);
std::string sweep_json(const SweepResult& result, const ExperimentConfig& config);
std::string report_csv(const EnsembleStats& stats, const ExperimentConfig& config);
std::string report_json(const EnsembleStats& stats, const ExperimentConfig& config);
/// One row per path: index, convergence, iterations and residuals.
std::string per_path_csv(const EnsembleStats& stats);
/// Per time node: controlled state, control, selections and the uncontrolled
/// state on the same noise path, all as spectral coefficients.
std::string trajectory_csv(const PathRealization& controlled, const PathRealization& uncontrolled);
std::string trajectory_json(const PathRealization& controlled, const PathRealization& uncontrolled);
std::string gramian_table(const ExperimentConfig& config);

/// Writes the file, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// One eps, full ensemble. Writes report.{csv,json}, paths.csv (csv only) and
/// `dump_paths` trajectories under output_dir/paths. Returns an ExitCode.
int cmd_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
/// Ensemble per eps in eps_list with shared seeds; writes sweep.{csv,json}.
int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
/// Prints n, lambda_n, gamma_n for the configured horizon, modes and gain.
int cmd_gramian(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace hvctl
