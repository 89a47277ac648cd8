#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hvctl/spectral.hpp"

namespace hvctl {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class SelectionPolicy { minimal_norm, lower, upper, midpoint };

std::string_view to_string(SelectionPolicy policy);
SelectionPolicy parse_selection_policy(std::string_view name);

/// Picks one element of the interval according to the policy.
double select(const Interval& interval, SelectionPolicy policy);

/// Thermostat potential: Phi(u) = g1 (u - s1) below s1, 0 on [s1, s2],
/// g2 (u - s2) above s2.
struct ThermostatPotential {
  double s1 = 0.0;
  double s2 = 1.0;
  double g1 = -1.0;
  double g2 = 1.0;

  /// Throws std::invalid_argument unless s1 <= s2 and g1 <= 0 <= g2.
  void validate() const;
  /// Global Lipschitz constant max(|g1|, g2).
  double lipschitz() const;
};

double phi_value(const ThermostatPotential& pot, double u);

/// Clarke subdifferential of Phi at u. Exactly at a threshold the interval
/// value applies; when s1 == s2 the kink carries the hull [g1, g2].
/// A positive kink_tol returns the hull of dPhi over [u - kink_tol, u + kink_tol].
Interval clarke_interval(const ThermostatPotential& pot, double u, double kink_tol = 0.0);

/// Phi^0(u; v) = max { zeta v : zeta in dPhi(u) }.
double clarke_dirderiv(const ThermostatPotential& pot, double u, double v, double kink_tol = 0.0);

/// F^0(x; v) for F(x) = int_0^pi Phi(x(theta)) dtheta, evaluated by the
/// collocation rule of the basis.
double functional_F_dirderiv(const ThermostatPotential& pot, const SpectralVector& x,
                             const SpectralVector& v, const EigenBasis& basis, double kink_tol = 0.0);

/// Policy selection of dPhi at each grid value.
std::vector<double> select_on_grid(const ThermostatPotential& pot, SelectionPolicy policy,
                                   std::span<const double> grid_values);

/// Spectral image of the gridwise selection of dPhi(x(theta)).
SpectralVector pointwise_selection(const ThermostatPotential& pot, SelectionPolicy policy,
                                   const SpectralVector& x, const EigenBasis& basis);

}  // namespace hvctl
