#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "hvctl/spectral.hpp"
#include "hvctl/stochastic.hpp"

using namespace hvctl;

TEST_SUITE("spectral") {
  TEST_CASE("eigenpairs and collocation grid") {
    const EigenBasis basis(8);
    CHECK(basis.modes() == 8);
    CHECK(basis.grid_size() == 32);
    const double h = std::numbers::pi / 33.0;
    CHECK(basis.spacing() == doctest::Approx(h).epsilon(1e-15));
    for (std::size_t i = 0; i < 8; ++i) {
      const double n = static_cast<double>(i + 1);
      CHECK(basis.eigenvalue(i) == -n * n);
      for (std::size_t j = 0; j < basis.grid_size(); ++j) {
        const double theta = static_cast<double>(j + 1) * h;
        CHECK(basis.basis_value(j, i) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi) * std::sin(n * theta)).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("discrete orthonormality of the sine basis on the grid") {
    const EigenBasis basis(6, 20);
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < basis.grid_size(); ++j) s += basis.basis_value(j, a) * basis.basis_value(j, b);
        CHECK(s * basis.spacing() == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-13).scale(1.0));
      }
  }

  TEST_CASE("grid round trip recovers the coefficients") {
    const EigenBasis basis(16);
    SpectralVector x(16);
    for (std::size_t i = 0; i < 16; ++i) x[i] = counter_normal(3, 0, 0, i);
    const SpectralVector y = to_spectral(to_grid(x, basis), basis);
    for (std::size_t i = 0; i < 16; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12).scale(1.0));
  }

  TEST_CASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(EigenBasis(8, 4), std::invalid_argument);
    const EigenBasis basis(4);
    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(to_spectral(wrong, basis), std::invalid_argument);
  }

  TEST_CASE("semigroup is diagonal exponential decay with the semigroup law") {
    const EigenBasis basis(5);
    SpectralVector x(5);
    for (std::size_t i = 0; i < 5; ++i) x[i] = 1.0 + static_cast<double>(i);
    const SpectralVector y = apply_semigroup(0.3, x, basis);
    for (std::size_t i = 0; i < 5; ++i) {
      const double n = static_cast<double>(i + 1);
      CHECK(y[i] == doctest::Approx(x[i] * std::exp(-n * n * 0.3)).epsilon(1e-14));
    }
    CHECK(apply_semigroup(0.0, x, basis) == x);
    const SpectralVector two_steps = apply_semigroup(0.2, apply_semigroup(0.1, x, basis), basis);
    for (std::size_t i = 0; i < 5; ++i) CHECK(two_steps[i] == doctest::Approx(y[i]).epsilon(1e-13));
    CHECK_THROWS_AS(apply_semigroup(-0.1, x, basis), std::invalid_argument);
  }

  TEST_CASE("spatial mean matches the integral of the sine modes") {
    const EigenBasis basis(4);
    // <w_1, 1> / pi = sqrt(2/pi) * 2 / pi; even modes have zero mean
    CHECK(spatial_mean(SpectralVector::unit(4, 0), basis) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi) * 2.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(spatial_mean(SpectralVector::unit(4, 1), basis) == 0.0);
    CHECK(spatial_mean(SpectralVector::unit(4, 2), basis) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi) * 2.0 / 3.0 / std::numbers::pi).epsilon(1e-15));
  }

  TEST_CASE("gramian closed form") {
    const EigenBasis basis(3);
    const GramianDiag g = gramian_diagonal(1.0, basis);
    CHECK(g.gammas[0] == doctest::Approx(0.432332).epsilon(1e-6));
    CHECK(g.gammas[0] == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-15));
    CHECK(g.gammas[2] == doctest::Approx((1.0 - std::exp(-18.0)) / 18.0).epsilon(1e-15));
    const std::vector<double> gain{2.0, 1.0, 0.5};
    const GramianDiag gb = gramian_diagonal(1.0, basis, gain);
    CHECK(gb.gammas[0] == doctest::Approx(4.0 * g.gammas[0]));
    CHECK(gb.gammas[2] == doctest::Approx(0.25 * g.gammas[2]));
    // small horizons keep full relative accuracy through expm1
    const GramianDiag tiny = gramian_diagonal(1e-12, basis);
    CHECK(tiny.gammas[0] == doctest::Approx(1e-12).epsilon(1e-10));
    CHECK_THROWS_AS(gramian_diagonal(0.0, basis), std::invalid_argument);
  }

  TEST_CASE("resolvent divides each mode by eps + gamma") {
    const EigenBasis basis(3);
    const GramianDiag g = gramian_diagonal(1.0, basis);
    const SpectralVector y(std::vector<double>{1.0, -2.0, 3.0});
    const SpectralVector r = resolvent_apply(0.1, g, y);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r[i] == doctest::Approx(y[i] / (0.1 + g.gammas[i])));
    CHECK((0.1 * r).norm() <= y.norm());
    CHECK_THROWS_AS(resolvent_apply(0.0, g, y), std::invalid_argument);
  }

  TEST_CASE("vector algebra") {
    const SpectralVector a(std::vector<double>{3.0, 4.0});
    CHECK(a.norm() == 5.0);
    CHECK(a.dot(SpectralVector::unit(2, 1)) == 4.0);
    CHECK((a - a).norm_squared() == 0.0);
    CHECK((2.0 * a)[1] == 8.0);
    SpectralVector bad(std::vector<double>{NAN, 0.0});
    CHECK_FALSE(bad.all_finite());
  }
}
