#include <doctest.h>

#include <algorithm>

#include "hvctl/config.hpp"

using namespace hvctl;

TEST_SUITE("config") {
  TEST_CASE("defaults reproduce the reference thermostat problem") {
    const ControlProblem a = ExperimentConfig{}.problem();
    const ControlProblem b = ControlProblem::thermostat_default();
    CHECK(a.horizon == b.horizon);
    CHECK(a.modes == b.modes);
    CHECK(a.steps == b.steps);
    CHECK(a.eps == b.eps);
    CHECK(a.x0 == b.x0);
    CHECK(a.z == b.z);
    CHECK(a.potential.s1 == b.potential.s1);
    CHECK(a.potential.g2 == b.potential.g2);
    CHECK(a.wiener.mu == b.wiener.mu);
    CHECK(a.diffusion.shape == b.diffusion.shape);
    CHECK(a.diffusion.switch_level == b.diffusion.switch_level);
    for (double m : {0.0, 0.25, 0.5}) CHECK(a.diffusion.envelope(0.0, m) == b.diffusion.envelope(0.0, m));
  }

  TEST_CASE("parsing keys, comments and lists") {
    const ExperimentConfig c = parse_config(
        "# header comment\n"
        "eps = 0.05   # trailing comment\n"
        "\n"
        "eps_list = 1, 0.1, 0.01\n"
        "z = 0, 1\n"
        "policy = upper\n"
        "paths = 7\n"
        "timing = true\n");
    CHECK(c.eps == 0.05);
    CHECK(c.eps_list == std::vector<double>{1.0, 0.1, 0.01});
    CHECK(c.paths == 7);
    CHECK(c.policy == SelectionPolicy::upper);
    CHECK(c.timing);
    const ControlProblem p = c.problem();
    CHECK(p.z.size() == 16);
    CHECK(p.z[1] == 1.0);
    CHECK(p.z[0] == 0.0);
  }

  TEST_CASE("invalid input is rejected") {
    CHECK_THROWS_AS(parse_config("temperature = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("eps = 0.1\neps = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("eps = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("paths = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("policy = nearest\n"), ConfigError);
    ExperimentConfig c;
    c.eps_list = {0.1, 0.5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.paths = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.output_format = "xml";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(ExperimentConfig{}.validate());
  }

  TEST_CASE("hash follows the result-affecting keys only") {
    const ExperimentConfig base;
    CHECK(base.hash().size() == 16);
    CHECK(base.hash() == ExperimentConfig{}.hash());
    ExperimentConfig c = base;
    c.workers = 8;
    c.output_dir = "elsewhere";
    c.output_format = "json";
    CHECK(c.hash() == base.hash());
    c.eps = 0.2;
    CHECK(c.hash() != base.hash());
  }

  TEST_CASE("canonical text round-trips") {
    ExperimentConfig c;
    c.eps = 0.1 + 0.2;
    c.gain = {2.0, 0.5};
    c.seed = 42;
    const ExperimentConfig back = parse_config(c.canonical());
    CHECK(back.canonical() == c.canonical());
    CHECK(back.eps == c.eps);
    CHECK(back.hash() == c.hash());
    const auto keys = config_keys();
    CHECK(std::find(keys.begin(), keys.end(), "eps_list") != keys.end());
  }

  TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/x.cfg"), IoError);
  }
}
