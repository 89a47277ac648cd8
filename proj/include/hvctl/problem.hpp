#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "hvctl/nonsmooth.hpp"
#include "hvctl/spectral.hpp"
#include "hvctl/stochastic.hpp"

namespace hvctl {

/// Interval-valued diffusion Sigma(t, q) = [glo(t, m), ghi(t, m)] * d, where m
/// is the spatial mean of q and d_n are per-mode shaping weights. A policy
/// picks the scalar s in the envelope; the selected operator is sigma_n = s d_n.
struct IntervalDiffusion {
  std::function<double(double, double)> glo;
  std::function<double(double, double)> ghi;
  /// alpha(t) >= max(|glo|, |ghi|).
  std::function<double(double)> alpha;
  std::vector<double> shape;
  SelectionPolicy policy = SelectionPolicy::minimal_norm;
  /// Mean at which the envelope jumps, if it has a single jump; NaN otherwise.
  double switch_level = std::numeric_limits<double>::quiet_NaN();

  static IntervalDiffusion none(std::size_t modes);
  /// Envelope [lo, hi], scaled by (1 + boost) while the mean exceeds
  /// switch_level; at the switch the envelope is the hull of both sides
  /// (glo lower, ghi upper semicontinuous). Shape d_n = n^-shape_exponent.
  static IntervalDiffusion switching(std::size_t modes, double lo, double hi, double boost, double switch_level,
                                     double shape_exponent, SelectionPolicy policy);

  /// A positive tol returns the hull over means in [mean - tol, mean + tol].
  Interval envelope(double t, double mean, double tol = 0.0) const;
  DiffusionOperator select(double t, double mean) const { return shaped(select_level(t, mean)); }
  /// Policy choice of the scalar s in the envelope.
  double select_level(double t, double mean) const;
  /// sigma_n = level * d_n.
  DiffusionOperator shaped(double level) const;
  /// zeta(t) = alpha(t)^2 sum d_n^2 mu_n, the Hilbert-Schmidt bound.
  double zeta(double t, const QWienerSpec& wiener) const;
};

struct ControlProblem {
  double horizon = 1.0;
  std::size_t modes = 16;
  std::size_t grid_size = 0;  // 0 -> 4 * modes
  std::size_t steps = 256;
  double eps = 0.1;
  SpectralVector x0;
  SpectralVector z;
  ThermostatPotential potential;
  SelectionPolicy policy = SelectionPolicy::minimal_norm;
  IntervalDiffusion diffusion;
  QWienerSpec wiener;
  std::vector<double> gain;  // b_n; empty means identity
  std::size_t paths = 100;
  std::uint64_t seed = 1;
  double fp_tol = 1e-8;
  std::size_t fp_max_iter = 50;
  double conv_constant = 1.0;  // K_a
  /// Grid values within kink_tol of a threshold count as sitting on it.
  double kink_tol = 1e-9;

  void validate() const;
  EigenBasis basis() const { return EigenBasis(modes, grid_size); }
  double dt() const { return horizon / static_cast<double>(steps); }
  double gain_at(std::size_t i) const { return gain.empty() ? 1.0 : gain[i]; }
  /// max_n |b_n|.
  double control_norm() const;

  /// Stochastic thermostat reference configuration used by the acceptance
  /// runs: N = 16, K = 256, x0 = 0, z = w_1.
  static ControlProblem thermostat_default();
  /// F = 0, Sigma = 0, x0 = 0, z = w_1.
  static ControlProblem linear_heat(std::size_t modes = 16, std::size_t steps = 256);
};

}  // namespace hvctl
