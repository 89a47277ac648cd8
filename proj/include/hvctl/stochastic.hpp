#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hvctl/spectral.hpp"

namespace hvctl {

/// Standard normal draw addressed by (seed, path, step, mode). The same key
/// always yields the same value, independent of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t mode);

/// Truncated trace-class covariance Q, diagonal in the state eigenbasis.
struct QWienerSpec {
  std::vector<double> mu;

  /// mu_n = scale * n^-decay; the default decay 2 has trace <= pi^2/6.
  static QWienerSpec power_law(std::size_t modes, double decay = 2.0, double scale = 1.0);

  std::size_t modes() const { return mu.size(); }
  double trace() const;
  void validate() const;
};

/// Increments Delta W_{k,n} ~ N(0, mu_n dt) on a uniform grid over [0, a].
struct NoisePath {
  double horizon = 0.0;
  std::size_t steps = 0;
  std::size_t modes = 0;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> increments;  // steps x modes, row-major

  double dt() const { return horizon / static_cast<double>(steps); }
  double time(std::size_t k) const { return horizon * static_cast<double>(k) / static_cast<double>(steps); }
  std::span<const double> row(std::size_t k) const { return {increments.data() + k * modes, modes}; }

  /// Sums groups of `factor` consecutive increments (same Brownian path on a
  /// coarser grid).
  NoisePath coarsen(std::size_t factor) const;
};

NoisePath sample_noise_path(const QWienerSpec& spec, std::size_t steps, double horizon, std::uint64_t seed,
                            std::uint64_t path_index);

/// Diagonal diffusion: noise mode n drives state mode n with multiplier sigma_n.
struct DiffusionOperator {
  std::vector<double> sigma;

  std::size_t size() const { return sigma.size(); }
  /// ||sigma||^2 in L_2^0 = sum sigma_n^2 mu_n.
  double hs_norm_squared(const QWienerSpec& spec) const;
  friend bool operator==(const DiffusionOperator&, const DiffusionOperator&) = default;
};

/// V(t_{k+1}) = T(dt) (V(t_k) + sigma_k dW_k), V(0) = 0. Returns K + 1 nodes.
std::vector<SpectralVector> stochastic_convolution(std::span<const DiffusionOperator> sigma_path,
                                                   const NoisePath& noise, const EigenBasis& basis);

struct ItoReport {
  double estimate = 0.0;
  double exact = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
};

/// Monte Carlo estimate of E||int_0^a sigma dW||^2 against a * sum sigma_n^2 mu_n.
ItoReport ito_isometry_check(const DiffusionOperator& sigma, const QWienerSpec& spec, std::size_t paths,
                             std::size_t steps, double horizon, std::uint64_t seed);

}  // namespace hvctl
