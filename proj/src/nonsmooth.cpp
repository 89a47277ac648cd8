#include "hvctl/nonsmooth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvctl {

std::string_view to_string(SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::minimal_norm: return "minimal_norm";
    case SelectionPolicy::lower: return "lower";
    case SelectionPolicy::upper: return "upper";
    case SelectionPolicy::midpoint: return "midpoint";
  }
  return "unknown";
}

SelectionPolicy parse_selection_policy(std::string_view name) {
  if (name == "minimal_norm") return SelectionPolicy::minimal_norm;
  if (name == "lower") return SelectionPolicy::lower;
  if (name == "upper") return SelectionPolicy::upper;
  if (name == "midpoint") return SelectionPolicy::midpoint;
  throw std::invalid_argument("unknown selection policy '" + std::string(name) + "'");
}

double select(const Interval& interval, SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::lower: return interval.lo;
    case SelectionPolicy::upper: return interval.hi;
    case SelectionPolicy::midpoint: return 0.5 * (interval.lo + interval.hi);
    case SelectionPolicy::minimal_norm:
      if (interval.lo > 0.0) return interval.lo;
      if (interval.hi < 0.0) return interval.hi;
      return 0.0;
  }
  return interval.lo;
}

void ThermostatPotential::validate() const {
  if (!(std::isfinite(s1) && std::isfinite(s2) && std::isfinite(g1) && std::isfinite(g2)))
    throw std::invalid_argument("thermostat parameters must be finite");
  if (!(s1 <= s2)) throw std::invalid_argument("thermostat requires s1 <= s2");
  if (!(g1 <= 0.0 && g2 >= 0.0)) throw std::invalid_argument("thermostat requires g1 <= 0 <= g2");
}

double ThermostatPotential::lipschitz() const { return std::max(std::abs(g1), g2); }

double phi_value(const ThermostatPotential& pot, double u) {
  if (u < pot.s1) return pot.g1 * (u - pot.s1);
  if (u > pot.s2) return pot.g2 * (u - pot.s2);
  return 0.0;
}

namespace {

Interval exact_interval(const ThermostatPotential& pot, double u) {
  if (u < pot.s1) return {pot.g1, pot.g1};
  if (u > pot.s2) return {pot.g2, pot.g2};
  if (pot.s1 == pot.s2) return {pot.g1, pot.g2};
  if (u == pot.s1) return {pot.g1, 0.0};
  if (u == pot.s2) return {0.0, pot.g2};
  return {0.0, 0.0};
}

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

}  // namespace

Interval clarke_interval(const ThermostatPotential& pot, double u, double kink_tol) {
  Interval d = exact_interval(pot, u);
  if (kink_tol <= 0.0) return d;
  d = hull(d, exact_interval(pot, u - kink_tol));
  d = hull(d, exact_interval(pot, u + kink_tol));
  if (std::abs(u - pot.s1) <= kink_tol) d = hull(d, exact_interval(pot, pot.s1));
  if (std::abs(u - pot.s2) <= kink_tol) d = hull(d, exact_interval(pot, pot.s2));
  return d;
}

double clarke_dirderiv(const ThermostatPotential& pot, double u, double v, double kink_tol) {
  const Interval d = clarke_interval(pot, u, kink_tol);
  return v >= 0.0 ? v * d.hi : v * d.lo;
}

double functional_F_dirderiv(const ThermostatPotential& pot, const SpectralVector& x,
                             const SpectralVector& v, const EigenBasis& basis, double kink_tol) {
  const auto xg = to_grid(x, basis);
  const auto vg = to_grid(v, basis);
  double s = 0.0;
  for (std::size_t j = 0; j < xg.size(); ++j) s += clarke_dirderiv(pot, xg[j], vg[j], kink_tol);
  return s * basis.spacing();
}

std::vector<double> select_on_grid(const ThermostatPotential& pot, SelectionPolicy policy,
                                   std::span<const double> grid_values) {
  std::vector<double> out(grid_values.size());
  for (std::size_t j = 0; j < grid_values.size(); ++j)
    out[j] = select(clarke_interval(pot, grid_values[j]), policy);
  return out;
}

SpectralVector pointwise_selection(const ThermostatPotential& pot, SelectionPolicy policy,
                                   const SpectralVector& x, const EigenBasis& basis) {
  return to_spectral(select_on_grid(pot, policy, to_grid(x, basis)), basis);
}

}  // namespace hvctl
