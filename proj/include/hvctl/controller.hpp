#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hvctl/inclusion.hpp"

namespace hvctl {

/// Constants of the a priori estimate sup_t E||q(t)||^2 <= value, with M = 1.
struct AprioriBound {
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double K4 = 0.0;
  double int_eta = 0.0;
  double int_zeta = 0.0;
  double value = 0.0;
};

AprioriBound apriori_bound(const ControlProblem& problem);

/// Z(g) = z - T(a) x0 - sum_k T(a - t_{k+1}) phi f_k - sum_k T(a - t_k) sigma_k dW_k,
/// with the same weights mild_step uses.
SpectralVector compute_Z(const PathRealization& path, const SpectralVector& z, const SpectralVector& x0,
                         const EigenBasis& basis);

/// u(t) = B* T*(a - t) (eps I + G)^{-1} Z.
ControlTrajectory synthesize_control(const SpectralVector& Z, double eps, const GramianDiag& gramian,
                                     const EigenBasis& basis, double horizon, std::size_t steps,
                                     std::span<const double> gain = {});

/// One application of Gamma_eps: selections along the iterate, Z, control,
/// re-integration with the same noise.
PathRealization gamma_eps_apply(const ControlProblem& problem, const EigenBasis& basis,
                                const PathRealization& iterate);

struct FixedPointResult {
  PathRealization path;
  bool converged = false;
  std::size_t iterations = 0;  // Gamma_eps applications
  double last_change = 0.0;
};

FixedPointResult fixed_point_solve(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise);

/// ||q(a) - z + eps (eps I + G)^{-1} Z(g)||.
double terminal_identity_residual(const PathRealization& path, double eps, const GramianDiag& gramian,
                                  const SpectralVector& z, const SpectralVector& x0, const EigenBasis& basis);

struct SweepRow {
  double eps = 0.0;
  double error_mean = 0.0;
  double error_ci = 0.0;
  double energy_mean = 0.0;
  double fp_rate = 0.0;
  double wallclock_s = 0.0;
  std::size_t failures = 0;
  std::string failure_message;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool ok() const;
};

struct SweepOptions {
  std::size_t workers = 1;
  double confidence_level = 0.95;
  bool timing = false;
};

/// Full ensemble per eps with shared seeds; rows ordered as eps_list
/// (strictly decreasing).
SweepResult epsilon_sweep(const ControlProblem& problem, std::span<const double> eps_list,
                          const SweepOptions& options = {});

}  // namespace hvctl
