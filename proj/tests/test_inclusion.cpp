#include <doctest.h>

#include <cmath>

#include "hvctl/inclusion.hpp"

using namespace hvctl;

TEST_SUITE("inclusion") {
  TEST_CASE("drift weight is the exact integral of the decay") {
    CHECK(drift_weight(-4.0, 0.1) == doctest::Approx((1.0 - std::exp(-0.4)) / 4.0).epsilon(1e-15));
    CHECK(drift_weight(-1e-12, 0.5) == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(drift_weight(0.0, 0.5) == 0.5);
  }

  TEST_CASE("mild step matches the explicit formula") {
    const EigenBasis basis(3);
    const SpectralVector q(std::vector<double>{1.0, -0.5, 0.25});
    const SpectralVector f(std::vector<double>{0.1, 0.2, 0.3});
    const SpectralVector drive(std::vector<double>{-1.0, 0.0, 2.0});
    const DiffusionOperator sigma{{0.5, 0.5, 0.5}};
    const std::vector<double> dw{0.3, -0.1, 0.2};
    const double dt = 0.05;
    const SpectralVector out = mild_step(q, f, drive, sigma, dw, dt, basis);
    for (std::size_t i = 0; i < 3; ++i) {
      const double lambda = basis.eigenvalue(i);
      const double expected =
          std::exp(lambda * dt) * (q[i] + sigma.sigma[i] * dw[i]) + drift_weight(lambda, dt) * (f[i] + drive[i]);
      CHECK(out[i] == doctest::Approx(expected).epsilon(1e-15));
    }
  }

  TEST_CASE("without forcing the path is the semigroup orbit") {
    ControlProblem p = ControlProblem::linear_heat(6, 32);
    p.x0 = SpectralVector(std::vector<double>{1.0, 0.5, -0.25, 0.0, 0.1, 0.0});
    p.wiener = QWienerSpec{std::vector<double>(6, 0.0)};
    const EigenBasis basis = p.basis();
    const NoisePath noise = sample_noise_path(p.wiener, p.steps, p.horizon, 1, 0);
    const PathRealization path = integrate_path(p, basis, noise);
    REQUIRE(path.q.size() == 33);
    for (std::size_t k = 0; k <= 32; ++k) {
      const SpectralVector expected = apply_semigroup(noise.time(k), p.x0, basis);
      CHECK((path.q[k] - expected).norm() < 1e-14);
    }
  }

  TEST_CASE("recorded selections reproduce the path when frozen") {
    ControlProblem p = ControlProblem::thermostat_default();
    p.steps = 64;
    p.x0 = SpectralVector::unit(p.modes, 0);
    const EigenBasis basis = p.basis();
    const NoisePath noise = sample_noise_path(p.wiener, p.steps, p.horizon, 3, 0);
    const PathRealization path = integrate_path(p, basis, noise);
    CHECK(path.selections.steps() == 64);
    CHECK(selection_defect(p, basis, path) == 0.0);
    const PathRealization again = integrate_with_selections(p, basis, noise, path.selections, {});
    for (std::size_t k = 0; k <= 64; ++k) CHECK(again.q[k] == path.q[k]);
  }

  TEST_CASE("selection defect measures the distance outside the admissible set") {
    ControlProblem p = ControlProblem::thermostat_default();
    p.steps = 16;
    p.x0 = 2.0 * SpectralVector::unit(p.modes, 0);
    const EigenBasis basis = p.basis();
    const NoisePath noise = sample_noise_path(p.wiener, p.steps, p.horizon, 3, 0);
    const PathRealization path = integrate_path(p, basis, noise);
    Selections tampered = path.selections;
    // the initial state is above s2 at the centre of the domain, so dPhi = {g2} there
    const std::size_t centre = basis.grid_size() / 2;
    REQUIRE(tampered.f_grid[0][centre] == 0.5);
    tampered.f_grid[0][centre] = 0.2;
    tampered.refresh(0, basis, p.diffusion);
    CHECK(selection_defect(p, basis, path.q, tampered, noise.dt()) == doctest::Approx(0.3));
    Selections level = path.selections;
    level.sigma_level[0] += 1.0;
    level.refresh(0, basis, p.diffusion);
    const Interval env = p.diffusion.envelope(0.0, spatial_mean(path.q[0], basis));
    CHECK(selection_defect(p, basis, path.q, level, noise.dt()) == doctest::Approx(level.sigma_level[0] - env.hi));
  }

  TEST_CASE("reselection keeps admissible values and replaces the rest") {
    ControlProblem p = ControlProblem::thermostat_default();
    p.steps = 16;
    p.x0 = SpectralVector::unit(p.modes, 0);
    const EigenBasis basis = p.basis();
    const NoisePath noise = sample_noise_path(p.wiener, p.steps, p.horizon, 5, 0);
    const PathRealization path = integrate_path(p, basis, noise);
    CHECK(reselect(p, basis, path.q, noise.dt(), path.selections) == path.selections);

    Selections previous = path.selections;
    for (auto& row : previous.f_grid)
      for (double& v : row) v = 7.0;
    for (std::size_t k = 0; k < previous.steps(); ++k) previous.refresh(k, basis, p.diffusion);
    CHECK(reselect(p, basis, path.q, noise.dt(), previous) == select_along(p, basis, path.q, noise.dt()));
  }

  TEST_CASE("HVI slack is nonnegative for policy selections") {
    ControlProblem p = ControlProblem::thermostat_default();
    p.steps = 64;
    p.x0 = SpectralVector::unit(p.modes, 0);
    const EigenBasis basis = p.basis();
    for (std::uint64_t s = 0; s < 5; ++s) {
      const PathRealization path = integrate_path(p, basis, sample_noise_path(p.wiener, p.steps, p.horizon, 9, s));
      for (std::size_t m = 0; m < 4; ++m) {
        CHECK(hvi_residual(p, basis, path, SpectralVector::unit(p.modes, m)) >= -1e-10);
        CHECK(hvi_residual(p, basis, path, -1.0 * SpectralVector::unit(p.modes, m)) >= -1e-10);
      }
    }
  }

  TEST_CASE("weak residual halves with the step on the noiseless path") {
    ControlProblem p = ControlProblem::thermostat_default();
    p.wiener = QWienerSpec{std::vector<double>(p.modes, 0.0)};
    p.x0 = SpectralVector::unit(p.modes, 0);
    double prev = 0.0;
    for (std::size_t K = 64; K <= 512; K *= 2) {
      p.steps = K;
      const EigenBasis basis = p.basis();
      const double w = weak_residual(integrate_path(p, basis, sample_noise_path(p.wiener, K, 1.0, 1, 0)), 1, basis);
      if (prev > 0.0) CHECK(prev / w == doctest::Approx(2.0).epsilon(0.1));
      prev = w;
    }
  }

  TEST_CASE("non-finite states raise BlowUpError") {
    ControlProblem p = ControlProblem::linear_heat(4, 8);
    const EigenBasis basis = p.basis();
    NoisePath noise = sample_noise_path(p.wiener, 8, 1.0, 1, 0);
    Selections sel;
    for (std::size_t k = 0; k < 8; ++k) sel.push_back(std::vector<double>(basis.grid_size(), 0.0), 0.0, basis, p.diffusion);
    sel.sigma[3].sigma = std::vector<double>(4, INFINITY);
    CHECK_THROWS_AS(integrate_with_selections(p, basis, noise, sel, {}), BlowUpError);
  }
}
