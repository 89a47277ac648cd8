#include "hvctl/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hvctl {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? p : buf);
}

namespace {

std::string provenance_lines(const ExperimentConfig& config) {
  std::string s = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  s += "# version: " + std::string(version_string()) + "\n";
  s += "# config_hash: " + config.hash() + "\n";
  s += "# seed: " + std::to_string(config.seed) + "\n";
  return s;
}

json provenance(const ExperimentConfig& config) {
  return {{"version", std::string(version_string())}, {"config_hash", config.hash()}, {"seed", config.seed}};
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json coefficients(const SpectralVector& v) { return json(std::vector<double>(v.coeffs().begin(), v.coeffs().end())); }

void join(std::string& line, double v) {
  if (!line.empty()) line += ",";
  line += format_number(v);
}

EnsembleOptions ensemble_options(const ExperimentConfig& config) {
  EnsembleOptions eo;
  eo.workers = config.workers;
  eo.confidence_level = config.confidence_level;
  eo.residuals = true;
  eo.report_modes = config.report_modes;
  eo.keep_paths = config.dump_paths;
  return eo;
}

std::string path_file_name(std::size_t index, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "path_%05zu.%s", index, ext.c_str());
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepResult& result, const ExperimentConfig& config) {
  std::string s = provenance_lines(config);
  for (const SweepRow& r : result.rows)
    if (r.failures > 0)
      s += "# failed_row: eps=" + format_number(r.eps) + " failures=" + std::to_string(r.failures) + " " +
           r.failure_message + "\n";
  s += kSweepHeader;
  s += "\n";
  for (const SweepRow& r : result.rows) {
    std::string line;
    for (double v : {r.eps, r.error_mean, r.error_ci, r.energy_mean, r.fp_rate, r.wallclock_s}) join(line, v);
    s += line + "\n";
  }
  return s;
}

std::string sweep_json(const SweepResult& result, const ExperimentConfig& config) {
  json rows = json::array();
  for (const SweepRow& r : result.rows) {
    rows.push_back({{"eps", r.eps},
                    {"error_mean", number(r.error_mean)},
                    {"error_ci", number(r.error_ci)},
                    {"energy_mean", number(r.energy_mean)},
                    {"fp_rate", r.fp_rate},
                    {"wallclock_s", r.wallclock_s},
                    {"failures", r.failures},
                    {"failure_message", r.failure_message}});
  }
  json j = {{"schema_version", kSchemaVersion}, {"provenance", provenance(config)}, {"rows", rows}};
  return j.dump(2) + "\n";
}

std::string report_csv(const EnsembleStats& st, const ExperimentConfig& config) {
  std::string s = provenance_lines(config);
  if (st.failures > 0) s += "# failed_paths: " + std::to_string(st.failures) + " " + st.first_failure + "\n";
  s += kReportHeader;
  s += "\n";
  std::string line;
  for (double v : {config.eps, st.error_mean, st.error_ci, st.energy_mean, st.fp_rate, st.mean_iterations,
                   st.sup_moment, st.bound.value, st.weak_residual_max, st.hvi_slack_min, st.terminal_identity_max,
                   st.selection_defect_max})
    join(line, v);
  line += "," + std::to_string(st.paths) + "," + std::to_string(st.failures);
  return s + line + "\n";
}

std::string report_json(const EnsembleStats& st, const ExperimentConfig& config) {
  json paths = json::array();
  for (std::size_t i = 0; i < st.per_path.size(); ++i) {
    const PathSummary& p = st.per_path[i];
    json row = {{"path", i}, {"failed", p.failed}};
    if (p.failed) {
      row["message"] = p.message;
    } else {
      row.update({{"converged", p.converged},
                  {"iterations", p.iterations},
                  {"terminal_error", p.terminal_error},
                  {"energy", p.energy},
                  {"terminal_identity", p.terminal_identity},
                  {"weak_residual", p.weak_residual},
                  {"hvi_slack", number(p.hvi_slack)},
                  {"selection_defect", p.selection_defect}});
    }
    paths.push_back(std::move(row));
  }
  json j = {{"schema_version", kSchemaVersion},
            {"provenance", provenance(config)},
            {"eps", config.eps},
            {"paths", st.paths},
            {"failures", st.failures},
            {"first_failure", st.first_failure},
            {"error_mean", number(st.error_mean)},
            {"error_ci", number(st.error_ci)},
            {"confidence_level", config.confidence_level},
            {"energy_mean", number(st.energy_mean)},
            {"fp_rate", st.fp_rate},
            {"mean_iterations", st.mean_iterations},
            {"sup_moment", st.sup_moment},
            {"apriori_bound",
             {{"value", st.bound.value},
              {"K1", st.bound.K1},
              {"K2", st.bound.K2},
              {"K3", st.bound.K3},
              {"K4", st.bound.K4},
              {"int_eta", st.bound.int_eta},
              {"int_zeta", st.bound.int_zeta}}},
            {"residuals",
             {{"weak_max", st.weak_residual_max},
              {"hvi_slack_min", number(st.hvi_slack_min)},
              {"terminal_identity_max", st.terminal_identity_max},
              {"selection_defect_max", st.selection_defect_max}}},
            {"per_path", paths}};
  return j.dump(2) + "\n";
}

std::string per_path_csv(const EnsembleStats& st) {
  std::string s = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  s += "path,failed,converged,iterations,terminal_error,energy,terminal_identity,weak_residual,hvi_slack,"
       "selection_defect\n";
  for (std::size_t i = 0; i < st.per_path.size(); ++i) {
    const PathSummary& p = st.per_path[i];
    s += std::to_string(i) + "," + (p.failed ? "1" : "0") + "," + (p.converged ? "1" : "0") + "," +
         std::to_string(p.iterations);
    for (double v : {p.terminal_error, p.energy, p.terminal_identity, p.weak_residual, p.hvi_slack,
                     p.selection_defect})
      s += "," + format_number(p.failed ? std::nan("") : v);
    s += "\n";
  }
  return s;
}

std::string trajectory_csv(const PathRealization& controlled, const PathRealization& uncontrolled) {
  const std::size_t N = controlled.noise.modes;
  const std::size_t K = controlled.steps();
  std::string s = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  std::string header = "k,t";
  for (const char* prefix : {"q_", "u_", "f_", "q_uncontrolled_"})
    for (std::size_t n = 1; n <= N; ++n) header += "," + std::string(prefix) + std::to_string(n);
  s += header + ",sigma_level\n";
  for (std::size_t k = 0; k <= K; ++k) {
    std::string line = std::to_string(k) + "," + format_number(controlled.noise.time(k));
    for (std::size_t n = 0; n < N; ++n) line += "," + format_number(controlled.q[k][n]);
    for (std::size_t n = 0; n < N; ++n)
      line += "," + format_number(controlled.control.empty() ? 0.0 : controlled.control.nodes[k][n]);
    // selections act on steps, so the terminal node has none
    for (std::size_t n = 0; n < N; ++n) line += "," + (k < K ? format_number(controlled.selections.f[k][n]) : "");
    for (std::size_t n = 0; n < N; ++n) line += "," + format_number(uncontrolled.q[k][n]);
    line += "," + (k < K ? format_number(controlled.selections.sigma_level[k]) : "");
    s += line + "\n";
  }
  return s;
}

std::string trajectory_json(const PathRealization& controlled, const PathRealization& uncontrolled) {
  const std::size_t K = controlled.steps();
  json t = json::array(), q = json::array(), u = json::array(), f = json::array(), level = json::array(),
       q0 = json::array();
  for (std::size_t k = 0; k <= K; ++k) {
    t.push_back(controlled.noise.time(k));
    q.push_back(coefficients(controlled.q[k]));
    q0.push_back(coefficients(uncontrolled.q[k]));
    if (!controlled.control.empty()) u.push_back(coefficients(controlled.control.nodes[k]));
    if (k < K) {
      f.push_back(coefficients(controlled.selections.f[k]));
      level.push_back(controlled.selections.sigma_level[k]);
    }
  }
  json j = {{"schema_version", kSchemaVersion},
            {"t", t},
            {"q", q},
            {"u", u},
            {"f", f},
            {"sigma_level", level},
            {"q_uncontrolled", q0}};
  return j.dump() + "\n";
}

std::string gramian_table(const ExperimentConfig& config) {
  const ControlProblem p = config.problem();
  const EigenBasis basis = p.basis();
  const GramianDiag g = gramian_diagonal(p.horizon, basis, p.gain);
  if (config.output_format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < basis.modes(); ++i)
      rows.push_back({{"n", i + 1}, {"lambda", basis.eigenvalue(i)}, {"gamma", g.gammas[i]}});
    json j = {{"schema_version", kSchemaVersion}, {"a", p.horizon}, {"rows", rows}};
    return j.dump(2) + "\n";
  }
  std::string s = "# schema_version: " + std::to_string(kSchemaVersion) + "\nn,lambda,gamma\n";
  for (std::size_t i = 0; i < basis.modes(); ++i)
    s += std::to_string(i + 1) + "," + format_number(basis.eigenvalue(i)) + "," + format_number(g.gammas[i]) + "\n";
  return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

namespace {

template <typename Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int cmd_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ControlProblem problem = config.problem();
    const EnsembleStats st = run_ensemble(problem, ensemble_options(config));
    const std::filesystem::path dir = config.output_dir;
    const bool csv = config.output_format == "csv";
    if (csv) {
      write_text_file(dir / "report.csv", report_csv(st, config));
      write_text_file(dir / "paths.csv", per_path_csv(st));
    } else {
      write_text_file(dir / "report.json", report_json(st, config));
    }
    const EigenBasis basis = problem.basis();
    for (std::size_t i = 0; i < st.kept.size(); ++i) {
      const PathRealization& controlled = st.kept[i].path;
      const PathRealization uncontrolled = integrate_path(problem, basis, controlled.noise);
      write_text_file(dir / "paths" / path_file_name(i, csv ? "csv" : "json"),
                      csv ? trajectory_csv(controlled, uncontrolled) : trajectory_json(controlled, uncontrolled));
    }
    out << "eps=" << format_number(config.eps) << " error_mean=" << format_number(st.error_mean)
        << " error_ci=" << format_number(st.error_ci) << " fp_rate=" << format_number(st.fp_rate)
        << " failures=" << st.failures << " -> " << dir.string() << "\n";
    if (st.failures > 0) {
      err << "error: " << st.failures << " path(s) failed; first: " << st.first_failure << "\n";
      return static_cast<int>(kExitFailure);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ControlProblem problem = config.problem();
    if (config.eps_list.empty()) throw ConfigError("eps_list must not be empty for a sweep");
    SweepOptions so;
    so.workers = config.workers;
    so.confidence_level = config.confidence_level;
    so.timing = config.timing;
    const SweepResult result = epsilon_sweep(problem, config.eps_list, so);
    const std::filesystem::path dir = config.output_dir;
    if (config.output_format == "csv")
      write_text_file(dir / "sweep.csv", sweep_csv(result, config));
    else
      write_text_file(dir / "sweep.json", sweep_json(result, config));
    for (const SweepRow& r : result.rows)
      out << "eps=" << format_number(r.eps) << " error_mean=" << format_number(r.error_mean)
          << " fp_rate=" << format_number(r.fp_rate) << " failures=" << r.failures << "\n";
    if (!result.ok()) {
      for (const SweepRow& r : result.rows)
        if (r.failures > 0)
          err << "error: eps=" << format_number(r.eps) << ": " << r.failures << " failure(s): " << r.failure_message
              << "\n";
      return static_cast<int>(kExitFailure);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_gramian(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << gramian_table(config);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace hvctl
