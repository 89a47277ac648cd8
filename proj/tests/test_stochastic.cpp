#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "hvctl/stochastic.hpp"

using namespace hvctl;

TEST_SUITE("stochastic") {
  TEST_CASE("counter normal draws are reproducible and standard") {
    CHECK(counter_normal(1, 2, 3, 4) == counter_normal(1, 2, 3, 4));
    CHECK(counter_normal(1, 2, 3, 4) != counter_normal(1, 2, 3, 5));
    const std::size_t n = 200000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = counter_normal(9, i, 0, 0);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("power-law covariance") {
    const QWienerSpec q = QWienerSpec::power_law(4, 2.0, 1.0);
    CHECK(q.mu[3] == doctest::Approx(1.0 / 16.0));
    CHECK(q.trace() == doctest::Approx(1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0));
    CHECK(QWienerSpec::power_law(1000).trace() < std::numbers::pi * std::numbers::pi / 6.0);
    QWienerSpec bad{{1.0, -1.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("noise increments carry variance mu_n dt") {
    const QWienerSpec q = QWienerSpec::power_law(3);
    const std::size_t paths = 4000;
    const std::size_t steps = 8;
    std::vector<double> var(3, 0.0);
    for (std::size_t p = 0; p < paths; ++p) {
      const NoisePath w = sample_noise_path(q, steps, 2.0, 5, p);
      for (std::size_t k = 0; k < steps; ++k)
        for (std::size_t n = 0; n < 3; ++n) var[n] += w.increments[k * 3 + n] * w.increments[k * 3 + n];
    }
    for (std::size_t n = 0; n < 3; ++n)
      CHECK(var[n] / static_cast<double>(paths * steps) == doctest::Approx(q.mu[n] * 0.25).epsilon(0.05));
  }

  TEST_CASE("sampling is keyed by seed and path index") {
    const QWienerSpec q = QWienerSpec::power_law(4);
    const NoisePath a = sample_noise_path(q, 16, 1.0, 1, 7);
    const NoisePath b = sample_noise_path(q, 16, 1.0, 1, 7);
    const NoisePath c = sample_noise_path(q, 16, 1.0, 1, 8);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
    CHECK(a.dt() == 1.0 / 16.0);
    CHECK(a.time(16) == 1.0);
    CHECK_THROWS_AS(sample_noise_path(q, 0, 1.0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_noise_path(q, 4, 0.0, 1, 0), std::invalid_argument);
  }

  TEST_CASE("coarsening sums consecutive increments") {
    const NoisePath fine = sample_noise_path(QWienerSpec::power_law(2), 8, 1.0, 3, 0);
    const NoisePath coarse = fine.coarsen(4);
    CHECK(coarse.steps == 2);
    CHECK(coarse.dt() == 0.5);
    for (std::size_t n = 0; n < 2; ++n) {
      double s = 0.0;
      for (std::size_t k = 4; k < 8; ++k) s += fine.increments[k * 2 + n];
      CHECK(coarse.increments[2 + n] == doctest::Approx(s).epsilon(1e-15));
    }
    CHECK_THROWS_AS(fine.coarsen(3), std::invalid_argument);
  }

  TEST_CASE("stochastic convolution equals the explicit weighted sum") {
    const EigenBasis basis(3);
    const NoisePath w = sample_noise_path(QWienerSpec::power_law(3), 10, 1.0, 2, 0);
    std::vector<DiffusionOperator> sigma(10, DiffusionOperator{{0.5, 1.0, -2.0}});
    const auto v = stochastic_convolution(sigma, w, basis);
    REQUIRE(v.size() == 11);
    for (std::size_t n = 0; n < 3; ++n) {
      const double lambda = basis.eigenvalue(n);
      double expected = 0.0;
      for (std::size_t k = 0; k < 10; ++k)
        expected += std::exp(lambda * (1.0 - w.time(k))) * sigma[k].sigma[n] * w.increments[k * 3 + n];
      CHECK(v[10][n] == doctest::Approx(expected).epsilon(1e-13));
    }
  }

  TEST_CASE("Ito isometry estimate is consistent with the exact value") {
    const QWienerSpec q = QWienerSpec::power_law(4);
    const DiffusionOperator sigma{{1.0, 0.5, 0.25, 0.125}};
    CHECK(sigma.hs_norm_squared(q) == doctest::Approx(1.0 + 0.25 / 4 + 0.0625 / 9 + 0.015625 / 16));
    const ItoReport r = ito_isometry_check(sigma, q, 5000, 16, 2.0, 4);
    CHECK(r.exact == doctest::Approx(2.0 * sigma.hs_norm_squared(q)));
    CHECK(std::abs(r.z_score) < 4.0);
    CHECK(r.std_error > 0.0);
  }
}
