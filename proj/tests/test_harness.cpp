#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hvctl/harness.hpp"

using namespace hvctl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hvctl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ExperimentConfig linear_config(const fs::path& dir) {
  ExperimentConfig c = parse_config(
      "s1 = 0\ns2 = 0\ng1 = 0\ng2 = 0\n"
      "diffusion_lo = 0\ndiffusion_hi = 0\ndiffusion_boost = 0\n"
      "eps_list = 1, 0.1, 0.01\npaths = 3\n");
  c.output_dir = dir.string();
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("number formatting is shortest round-trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-300) == "1e-300");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
  }

  TEST_CASE("sweep CSV schema and linear values") {
    const fs::path dir = scratch("sweep");
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(linear_config(dir), out, err) == kExitOk);
    const auto ls = lines(slurp(dir / "sweep.csv"));
    REQUIRE(ls.size() == 8);
    CHECK(ls[0] == "# schema_version: 1");
    CHECK(ls[3].rfind("# seed: ", 0) == 0);
    CHECK(ls[4] == "eps,error_mean,error_ci,energy_mean,fp_rate,wallclock_s");
    const double g1 = (1.0 - std::exp(-2.0)) / 2.0;
    const double eps[] = {1.0, 0.1, 0.01};
    for (int i = 0; i < 3; ++i) {
      std::vector<double> v;
      std::istringstream row(ls[5 + i]);
      for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 6);
      CHECK(v[0] == eps[i]);
      CHECK(v[1] == doctest::Approx(std::pow(eps[i] / (eps[i] + g1), 2)).epsilon(1e-6));
      CHECK(v[4] == 1.0);
      CHECK(v[5] == 0.0);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("sweep JSON carries the schema version") {
    const fs::path dir = scratch("sweep_json");
    ExperimentConfig c = linear_config(dir);
    c.output_format = "json";
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(c, out, err) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "sweep.json"));
    CHECK(j["schema_version"] == 1);
    CHECK(j["rows"].size() == 3);
    CHECK(j["provenance"]["config_hash"] == c.hash());
    fs::remove_all(dir);
  }

  TEST_CASE("simulate is byte-for-byte reproducible") {
    const fs::path a = scratch("sim_a");
    const fs::path b = scratch("sim_b");
    ExperimentConfig c;
    c.paths = 4;
    c.steps = 64;
    c.dump_paths = 1;
    c.output_dir = a.string();
    std::ostringstream out, err;
    REQUIRE(cmd_simulate(c, out, err) == kExitOk);
    c.output_dir = b.string();
    c.workers = 3;
    REQUIRE(cmd_simulate(c, out, err) == kExitOk);
    for (const char* f : {"report.csv", "paths.csv", "paths/path_00000.csv"}) {
      CHECK(fs::exists(a / f));
      CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto traj = lines(slurp(a / "paths/path_00000.csv"));
    CHECK(traj.size() == 67);
    CHECK(traj[1].rfind("k,t,q_1,", 0) == 0);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("exit codes") {
    ExperimentConfig c;
    c.paths = 0;
    std::ostringstream out, err;
    CHECK(cmd_simulate(c, out, err) == kExitFailure);
    ExperimentConfig blocked = linear_config(scratch("blocked"));
    const fs::path file = scratch("blocker");
    write_text_file(file, "x");
    blocked.output_dir = (file / "sub").string();
    CHECK(cmd_sweep(blocked, out, err) == kExitIo);
    fs::remove(file);
  }

  TEST_CASE("gramian table") {
    ExperimentConfig c;
    c.modes = 3;
    const auto ls = lines(gramian_table(c));
    REQUIRE(ls.size() == 5);
    CHECK(ls[2].find("0.43233235838169365") != std::string::npos);
  }
}
