#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hvctl {

/// Coefficients of a state against the orthonormal sine basis
/// w_n(theta) = sqrt(2/pi) sin(n theta) on [0, pi]. Index 0 holds mode n = 1.
class SpectralVector {
 public:
  SpectralVector() = default;
  explicit SpectralVector(std::size_t modes) : c_(modes, 0.0) {}
  explicit SpectralVector(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  static SpectralVector unit(std::size_t modes, std::size_t mode);

  std::size_t size() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }

  /// Squared L2([0, pi]) norm (Parseval).
  double norm_squared() const;
  double norm() const;
  double dot(const SpectralVector& other) const;
  bool all_finite() const;

  SpectralVector& operator+=(const SpectralVector& rhs);
  SpectralVector& operator-=(const SpectralVector& rhs);
  SpectralVector& operator*=(double s);

  friend bool operator==(const SpectralVector&, const SpectralVector&) = default;

 private:
  std::vector<double> c_;
};

SpectralVector operator+(SpectralVector lhs, const SpectralVector& rhs);
SpectralVector operator-(SpectralVector lhs, const SpectralVector& rhs);
SpectralVector operator*(double s, SpectralVector v);

/// Dirichlet Laplacian eigenbasis on [0, pi] truncated to N modes, with the
/// collocation grid theta_j = j pi / (P + 1), j = 1..P used for pointwise
/// nonlinearities.
class EigenBasis {
 public:
  /// grid_size 0 selects P = 4N.
  explicit EigenBasis(std::size_t modes, std::size_t grid_size = 0);

  std::size_t modes() const { return modes_; }
  std::size_t grid_size() const { return grid_; }

  /// lambda_n = -n^2 for the zero-based mode index i (n = i + 1).
  double eigenvalue(std::size_t i) const;
  double node(std::size_t j) const;
  /// Quadrature weight pi / (P + 1) of the interior rule on the grid.
  double spacing() const;
  /// w_n(theta_j), row-major P x N.
  double basis_value(std::size_t j, std::size_t i) const { return table_[j * modes_ + i]; }

  /// <w_n, 1> / pi, the contribution of mode n to the spatial mean.
  double mean_weight(std::size_t i) const;

 private:
  std::size_t modes_;
  std::size_t grid_;
  std::vector<double> table_;
};

struct GramianDiag {
  std::vector<double> gammas;
  std::size_t size() const { return gammas.size(); }
  double operator[](std::size_t i) const { return gammas[i]; }
};

SpectralVector apply_semigroup(double t, const SpectralVector& x, const EigenBasis& basis);

std::vector<double> to_grid(const SpectralVector& x, const EigenBasis& basis);
SpectralVector to_spectral(std::span<const double> values, const EigenBasis& basis);

/// Spatial mean <q, 1> / pi.
double spatial_mean(const SpectralVector& x, const EigenBasis& basis);

/// Diagonal of G(a) = int_0^a T(a-s) B B* T*(a-s) ds for diagonal B with
/// per-mode gain b_n (empty gain means B = identity).
GramianDiag gramian_diagonal(double a, const EigenBasis& basis, std::span<const double> gain = {});

/// (eps I + G)^{-1} y.
SpectralVector resolvent_apply(double eps, const GramianDiag& gramian, const SpectralVector& y);

}  // namespace hvctl
