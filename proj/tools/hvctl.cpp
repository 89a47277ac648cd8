#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hvctl/config.hpp"
#include "hvctl/harness.hpp"
#include "hvctl/selftest.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> eps;
  std::optional<std::size_t> modes;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> dump_paths;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Config file (flat key = value)");
  cmd->add_option("--eps", o.eps, "Regularization eps (sweep: comma-separated decreasing list)");
  cmd->add_option("--modes", o.modes, "Number of spectral modes N");
  cmd->add_option("--steps", o.steps, "Number of time steps K");
  cmd->add_option("--paths", o.paths, "Number of Monte Carlo paths M");
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", o.workers, "Worker threads (results do not depend on it)");
}

hvctl::ExperimentConfig build_config(const Overrides& o, bool sweep) {
  hvctl::ExperimentConfig c = o.config.empty() ? hvctl::ExperimentConfig{} : hvctl::load_config(o.config);
  if (o.eps) hvctl::set_config_value(c, sweep ? "eps_list" : "eps", *o.eps);
  if (o.modes) c.modes = *o.modes;
  if (o.steps) c.steps = *o.steps;
  if (o.paths) c.paths = *o.paths;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.format) c.output_format = *o.format;
  if (o.workers) c.workers = *o.workers;
  if (o.dump_paths) c.dump_paths = *o.dump_paths;
  c.validate();
  return c;
}

template <typename Command>
int run(const Overrides& o, bool sweep, Command command) {
  try {
    return command(build_config(o, sweep));
  } catch (const hvctl::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hvctl::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hvctl::kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate controllability of the stochastic thermostat heat equation"};
  app.set_version_flag("--version", std::string(hvctl::version_string()));
  app.require_subcommand(1);

  Overrides sim, swp, gram;
  auto* simulate = app.add_subcommand("simulate", "Run the ensemble at one eps and write a report");
  add_common(simulate, sim);
  simulate->add_option("--dump-paths", sim.dump_paths, "Write trajectories of the first N paths");
  auto* sweep = app.add_subcommand("sweep", "Run the ensemble for every eps in eps_list");
  add_common(sweep, swp);
  auto* gramian = app.add_subcommand("gramian", "Print the Gramian diagonal");
  add_common(gramian, gram);
  auto* selftest = app.add_subcommand("selftest", "Run the oracle suites");
  hvctl::SelftestOptions st;
  selftest->add_option("--seed", st.seed, "Seed for the randomized suites");
  selftest->add_option("--workers", st.workers, "Worker threads");
  selftest->add_option("--perturb-gramian", st.gramian_perturbation, "Add this value to every gamma_n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hvctl::kExitFailure;
  }

  if (*simulate)
    return run(sim, false, [](const hvctl::ExperimentConfig& c) { return hvctl::cmd_simulate(c, std::cout, std::cerr); });
  if (*sweep)
    return run(swp, true, [](const hvctl::ExperimentConfig& c) { return hvctl::cmd_sweep(c, std::cout, std::cerr); });
  if (*gramian)
    return run(gram, false, [](const hvctl::ExperimentConfig& c) { return hvctl::cmd_gramian(c, std::cout, std::cerr); });
  return hvctl::cmd_selftest(st, std::cout);
}
