#include "hvctl/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hvctl {

SpectralVector SpectralVector::unit(std::size_t modes, std::size_t mode) {
  if (mode >= modes) throw std::out_of_range("unit vector mode out of range");
  SpectralVector v(modes);
  v[mode] = 1.0;
  return v;
}

double SpectralVector::norm_squared() const {
  double s = 0.0;
  for (double c : c_) s += c * c;
  return s;
}

double SpectralVector::norm() const { return std::sqrt(norm_squared()); }

double SpectralVector::dot(const SpectralVector& other) const {
  if (other.size() != size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * other.c_[i];
  return s;
}

bool SpectralVector::all_finite() const {
  for (double c : c_)
    if (!std::isfinite(c)) return false;
  return true;
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& rhs) {
  if (rhs.size() != size()) throw std::invalid_argument("+=: dimension mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += rhs.c_[i];
  return *this;
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& rhs) {
  if (rhs.size() != size()) throw std::invalid_argument("-=: dimension mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= rhs.c_[i];
  return *this;
}

SpectralVector& SpectralVector::operator*=(double s) {
  for (double& c : c_) c *= s;
  return *this;
}

SpectralVector operator+(SpectralVector lhs, const SpectralVector& rhs) { return lhs += rhs; }
SpectralVector operator-(SpectralVector lhs, const SpectralVector& rhs) { return lhs -= rhs; }
SpectralVector operator*(double s, SpectralVector v) { return v *= s; }

EigenBasis::EigenBasis(std::size_t modes, std::size_t grid_size)
    : modes_(modes), grid_(grid_size == 0 ? 4 * modes : grid_size) {
  if (modes_ == 0) throw std::invalid_argument("EigenBasis: mode count must be positive");
  if (grid_ < modes_)
    throw std::invalid_argument("EigenBasis: grid size " + std::to_string(grid_) +
                                " smaller than mode count " + std::to_string(modes_));
  const double norm = std::sqrt(2.0 / std::numbers::pi);
  table_.resize(grid_ * modes_);
  for (std::size_t j = 0; j < grid_; ++j) {
    const double theta = node(j);
    for (std::size_t i = 0; i < modes_; ++i)
      table_[j * modes_ + i] = norm * std::sin(static_cast<double>(i + 1) * theta);
  }
}

double EigenBasis::eigenvalue(std::size_t i) const {
  const double n = static_cast<double>(i + 1);
  return -n * n;
}

double EigenBasis::node(std::size_t j) const {
  return static_cast<double>(j + 1) * std::numbers::pi / static_cast<double>(grid_ + 1);
}

double EigenBasis::spacing() const { return std::numbers::pi / static_cast<double>(grid_ + 1); }

double EigenBasis::mean_weight(std::size_t i) const {
  const std::size_t n = i + 1;
  if (n % 2 == 0) return 0.0;
  return std::sqrt(2.0 / std::numbers::pi) * 2.0 / static_cast<double>(n) / std::numbers::pi;
}

SpectralVector apply_semigroup(double t, const SpectralVector& x, const EigenBasis& basis) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: negative time");
  if (x.size() != basis.modes()) throw std::invalid_argument("apply_semigroup: dimension mismatch");
  SpectralVector out = x;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] *= std::exp(basis.eigenvalue(i) * t);
  return out;
}

std::vector<double> to_grid(const SpectralVector& x, const EigenBasis& basis) {
  if (x.size() != basis.modes()) throw std::invalid_argument("to_grid: dimension mismatch");
  std::vector<double> values(basis.grid_size(), 0.0);
  for (std::size_t j = 0; j < basis.grid_size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < basis.modes(); ++i) s += x[i] * basis.basis_value(j, i);
    values[j] = s;
  }
  return values;
}

// Discrete orthogonality of sin(n theta_j) on the interior grid makes this the
// exact inverse of to_grid for bandwidth <= P.
SpectralVector to_spectral(std::span<const double> values, const EigenBasis& basis) {
  if (values.size() != basis.grid_size()) throw std::invalid_argument("to_spectral: grid size mismatch");
  SpectralVector x(basis.modes());
  const double h = basis.spacing();
  for (std::size_t j = 0; j < basis.grid_size(); ++j) {
    const double v = values[j];
    if (v == 0.0) continue;
    for (std::size_t i = 0; i < basis.modes(); ++i) x[i] += v * basis.basis_value(j, i);
  }
  x *= h;
  return x;
}

double spatial_mean(const SpectralVector& x, const EigenBasis& basis) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m += x[i] * basis.mean_weight(i);
  return m;
}

GramianDiag gramian_diagonal(double a, const EigenBasis& basis, std::span<const double> gain) {
  if (!(a > 0.0)) throw std::invalid_argument("gramian_diagonal: horizon must be positive");
  if (!gain.empty() && gain.size() != basis.modes())
    throw std::invalid_argument("gramian_diagonal: gain size mismatch");
  GramianDiag g;
  g.gammas.resize(basis.modes());
  for (std::size_t i = 0; i < basis.modes(); ++i) {
    const double mu = -basis.eigenvalue(i);
    const double b = gain.empty() ? 1.0 : gain[i];
    g.gammas[i] = b * b * (-std::expm1(-2.0 * mu * a)) / (2.0 * mu);
  }
  return g;
}

SpectralVector resolvent_apply(double eps, const GramianDiag& gramian, const SpectralVector& y) {
  if (!(eps > 0.0)) throw std::invalid_argument("resolvent_apply: eps must be positive");
  if (y.size() != gramian.size()) throw std::invalid_argument("resolvent_apply: dimension mismatch");
  SpectralVector out = y;
  for (std::size_t i = 0; i < y.size(); ++i) out[i] /= eps + gramian[i];
  return out;
}

}  // namespace hvctl
