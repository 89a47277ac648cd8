#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvctl/problem.hpp"

namespace hvctl {

/// Control on the time grid. `nodes` holds u(t_k) for k = 0..K; `drive` holds,
/// per step, the constant input whose exact integration over the step equals
/// that of B u(s) on [t_k, t_{k+1}].
struct ControlTrajectory {
  std::vector<SpectralVector> nodes;
  std::vector<SpectralVector> drive;
  double energy = 0.0;  // int_0^a ||u||^2 dt

  bool empty() const { return drive.empty(); }
};

/// Selections f_k in dF(q(t_k)) and sigma_k in Sigma(t_k, q(t_k)), one per
/// step. The Clarke selection is held on the collocation grid (f_grid) and as
/// its spectral image (f); the diffusion selection as the scalar level s_k and
/// the shaped operator s_k d_n.
struct Selections {
  std::vector<std::vector<double>> f_grid;
  std::vector<double> sigma_level;
  std::vector<SpectralVector> f;
  std::vector<DiffusionOperator> sigma;

  std::size_t steps() const { return f.size(); }
  void reserve(std::size_t steps);
  void push_back(std::vector<double> grid_values, double level, const EigenBasis& basis,
                 const IntervalDiffusion& diffusion);
  /// Recomputes the spectral images after editing f_grid or sigma_level.
  void refresh(std::size_t k, const EigenBasis& basis, const IntervalDiffusion& diffusion);

  friend bool operator==(const Selections&, const Selections&) = default;
};

struct PathRealization {
  NoisePath noise;
  std::vector<SpectralVector> q;  // K + 1 nodes
  Selections selections;          // K steps
  ControlTrajectory control;      // empty for uncontrolled runs

  const SpectralVector& terminal() const { return q.back(); }
  std::size_t steps() const { return noise.steps; }
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// (1 - e^{lambda dt}) / (-lambda), the exact drift weight; -> dt as lambda -> 0.
double drift_weight(double lambda, double dt);

/// One exponential step of the mild formulation:
/// q_n <- e^{lambda_n dt} (q_n + sigma_n dW_n) + phi_n (f_n + drive_n).
SpectralVector mild_step(const SpectralVector& q, const SpectralVector& f, const SpectralVector& drive,
                         const DiffusionOperator& sigma, std::span<const double> dw, double dt,
                         const EigenBasis& basis);

/// Selections at one state: Clarke selection of dPhi and diffusion selection.
SpectralVector clarke_selection(const ControlProblem& problem, const EigenBasis& basis, const SpectralVector& q);
DiffusionOperator diffusion_selection(const ControlProblem& problem, const EigenBasis& basis, double t,
                                      const SpectralVector& q);

/// Left-endpoint policy selections along a trajectory (K + 1 nodes -> K selections).
Selections select_along(const ControlProblem& problem, const EigenBasis& basis,
                        std::span<const SpectralVector> trajectory, double dt);

/// Like select_along, but keeps each previous value that is still admissible
/// (within kink_tol) at the new trajectory.
Selections reselect(const ControlProblem& problem, const EigenBasis& basis,
                    std::span<const SpectralVector> trajectory, double dt, const Selections& previous);

/// Marches mild_step with selections evaluated from the current state.
PathRealization integrate_path(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise,
                               const ControlTrajectory* control = nullptr);

/// Marches mild_step with given selections (frozen, not re-evaluated).
PathRealization integrate_with_selections(const ControlProblem& problem, const EigenBasis& basis,
                                          const NoisePath& noise, Selections selections,
                                          ControlTrajectory control);

/// Weak-form residual against the test element w_m (m is the 1-based mode).
double weak_residual(const PathRealization& path, std::size_t mode, const EigenBasis& basis);

/// min_k [F^0(q(t_k); xi) - <f_k, xi>]; nonnegative up to round-off whenever
/// f_k is a selection of dF(q(t_k)).
double hvi_residual(const ControlProblem& problem, const EigenBasis& basis, const PathRealization& path,
                    const SpectralVector& xi);

/// Largest distance of a selection value outside its admissible set: grid
/// values of f against dPhi (with problem.kink_tol) at the grid values of q,
/// and s_k against the diffusion envelope. Zero when every selection is a
/// member.
double selection_defect(const ControlProblem& problem, const EigenBasis& basis,
                        std::span<const SpectralVector> trajectory, const Selections& selections, double dt);
double selection_defect(const ControlProblem& problem, const EigenBasis& basis, const PathRealization& path);

}  // namespace hvctl
