#include "hvctl/inclusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hvctl/controller.hpp"

namespace hvctl {

double drift_weight(double lambda, double dt) {
  const double x = lambda * dt;
  if (std::abs(x) < 1e-8) return dt * (1.0 + 0.5 * x);
  return std::expm1(x) / lambda;
}

SpectralVector mild_step(const SpectralVector& q, const SpectralVector& f, const SpectralVector& drive,
                         const DiffusionOperator& sigma, std::span<const double> dw, double dt,
                         const EigenBasis& basis) {
  if (!(dt > 0.0)) throw std::invalid_argument("mild_step: dt must be positive");
  const std::size_t N = basis.modes();
  if (q.size() != N || f.size() != N || drive.size() != N || sigma.size() != N || dw.size() != N)
    throw std::invalid_argument("mild_step: dimension mismatch");
  SpectralVector out(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double lambda = basis.eigenvalue(n);
    out[n] = std::exp(lambda * dt) * (q[n] + sigma.sigma[n] * dw[n]) + drift_weight(lambda, dt) * (f[n] + drive[n]);
  }
  return out;
}

void Selections::reserve(std::size_t steps) {
  f_grid.reserve(steps);
  sigma_level.reserve(steps);
  f.reserve(steps);
  sigma.reserve(steps);
}

void Selections::push_back(std::vector<double> grid_values, double level, const EigenBasis& basis,
                           const IntervalDiffusion& diffusion) {
  f.push_back(to_spectral(grid_values, basis));
  sigma.push_back(diffusion.shaped(level));
  f_grid.push_back(std::move(grid_values));
  sigma_level.push_back(level);
}

void Selections::refresh(std::size_t k, const EigenBasis& basis, const IntervalDiffusion& diffusion) {
  f.at(k) = to_spectral(f_grid.at(k), basis);
  sigma.at(k) = diffusion.shaped(sigma_level.at(k));
}

SpectralVector clarke_selection(const ControlProblem& problem, const EigenBasis& basis, const SpectralVector& q) {
  return pointwise_selection(problem.potential, problem.policy, q, basis);
}

DiffusionOperator diffusion_selection(const ControlProblem& problem, const EigenBasis& basis, double t,
                                      const SpectralVector& q) {
  return problem.diffusion.select(t, spatial_mean(q, basis));
}

namespace {

void push_policy_selection(const ControlProblem& problem, const EigenBasis& basis, double t,
                           const SpectralVector& q, Selections& out) {
  out.push_back(select_on_grid(problem.potential, problem.policy, to_grid(q, basis)),
                problem.diffusion.select_level(t, spatial_mean(q, basis)), basis, problem.diffusion);
}

double outside(const Interval& iv, double v) { return std::max({0.0, iv.lo - v, v - iv.hi}); }

}  // namespace

Selections select_along(const ControlProblem& problem, const EigenBasis& basis,
                        std::span<const SpectralVector> trajectory, double dt) {
  if (trajectory.empty()) throw std::invalid_argument("select_along: empty trajectory");
  const std::size_t K = trajectory.size() - 1;
  Selections s;
  s.reserve(K);
  for (std::size_t k = 0; k < K; ++k) push_policy_selection(problem, basis, dt * static_cast<double>(k), trajectory[k], s);
  return s;
}

Selections reselect(const ControlProblem& problem, const EigenBasis& basis,
                    std::span<const SpectralVector> trajectory, double dt, const Selections& previous) {
  if (trajectory.empty()) throw std::invalid_argument("reselect: empty trajectory");
  const std::size_t K = trajectory.size() - 1;
  if (previous.steps() != K) throw std::invalid_argument("reselect: selections do not match the trajectory");
  const double tol = problem.kink_tol;
  Selections s;
  s.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double t = dt * static_cast<double>(k);
    const auto grid = to_grid(trajectory[k], basis);
    std::vector<double> fg = previous.f_grid[k];
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (!clarke_interval(problem.potential, grid[j], tol).contains(fg[j]))
        fg[j] = select(clarke_interval(problem.potential, grid[j]), problem.policy);
    }
    const double mean = spatial_mean(trajectory[k], basis);
    double level = previous.sigma_level[k];
    if (!problem.diffusion.envelope(t, mean, tol).contains(level)) level = problem.diffusion.select_level(t, mean);
    if (fg == previous.f_grid[k] && level == previous.sigma_level[k]) {
      s.f_grid.push_back(std::move(fg));
      s.sigma_level.push_back(level);
      s.f.push_back(previous.f[k]);
      s.sigma.push_back(previous.sigma[k]);
    } else {
      s.push_back(std::move(fg), level, basis, problem.diffusion);
    }
  }
  return s;
}

namespace {

class GrowthGuard {
 public:
  explicit GrowthGuard(const ControlProblem& problem) : limit_(1e6 * std::sqrt(apriori_bound(problem).value)) {}

  void check(const SpectralVector& q, std::size_t step) const {
    const double norm = q.norm();
    if (!std::isfinite(norm))
      throw BlowUpError("state became non-finite at step " + std::to_string(step), step);
    if (norm > limit_)
      throw BlowUpError("state norm " + std::to_string(norm) + " exceeds guard " + std::to_string(limit_) +
                            " at step " + std::to_string(step),
                        step);
  }

 private:
  double limit_;
};

void check_noise(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise) {
  if (noise.modes != basis.modes() || noise.steps != problem.steps ||
      std::abs(noise.horizon - problem.horizon) > 1e-12 * problem.horizon)
    throw std::invalid_argument("noise path does not match the problem grid");
}

void check_control(const ControlTrajectory& control, std::size_t steps) {
  if (!control.empty() && control.drive.size() != steps)
    throw std::invalid_argument("control trajectory does not match the step count");
}

}  // namespace

PathRealization integrate_path(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise,
                               const ControlTrajectory* control) {
  check_noise(problem, basis, noise);
  if (control) check_control(*control, noise.steps);
  const GrowthGuard guard(problem);
  const std::size_t K = noise.steps;
  const double dt = noise.dt();
  const SpectralVector zero(basis.modes());

  PathRealization path;
  path.noise = noise;
  path.q.reserve(K + 1);
  path.q.push_back(problem.x0);
  path.selections.reserve(K);
  if (control) path.control = *control;

  for (std::size_t k = 0; k < K; ++k) {
    const SpectralVector& qk = path.q.back();
    push_policy_selection(problem, basis, dt * static_cast<double>(k), qk, path.selections);
    const SpectralVector& drive = (control && !control->empty()) ? control->drive[k] : zero;
    SpectralVector next =
        mild_step(qk, path.selections.f.back(), drive, path.selections.sigma.back(), noise.row(k), dt, basis);
    guard.check(next, k + 1);
    path.q.push_back(std::move(next));
  }
  return path;
}

PathRealization integrate_with_selections(const ControlProblem& problem, const EigenBasis& basis,
                                          const NoisePath& noise, Selections selections,
                                          ControlTrajectory control) {
  check_noise(problem, basis, noise);
  check_control(control, noise.steps);
  const std::size_t K = noise.steps;
  if (selections.f.size() != K || selections.sigma.size() != K)
    throw std::invalid_argument("selections do not match the step count");
  const GrowthGuard guard(problem);
  const double dt = noise.dt();
  const SpectralVector zero(basis.modes());

  PathRealization path;
  path.noise = noise;
  path.q.reserve(K + 1);
  path.q.push_back(problem.x0);
  for (std::size_t k = 0; k < K; ++k) {
    const SpectralVector& drive = control.empty() ? zero : control.drive[k];
    SpectralVector next =
        mild_step(path.q.back(), selections.f[k], drive, selections.sigma[k], noise.row(k), dt, basis);
    guard.check(next, k + 1);
    path.q.push_back(std::move(next));
  }
  path.selections = std::move(selections);
  path.control = std::move(control);
  return path;
}

double weak_residual(const PathRealization& path, std::size_t mode, const EigenBasis& basis) {
  if (mode == 0 || mode > basis.modes()) throw std::out_of_range("weak_residual: mode out of range");
  const std::size_t i = mode - 1;
  const std::size_t K = path.steps();
  const double dt = path.noise.dt();
  const double m2 = -basis.eigenvalue(i);
  double drift = 0.0;
  double noise = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double forcing = path.selections.f[k][i];
    if (!path.control.empty()) forcing += path.control.drive[k][i];
    drift += dt * (m2 * path.q[k][i] - forcing);
    noise += path.selections.sigma[k].sigma[i] * path.noise.increments[k * path.noise.modes + i];
  }
  return std::abs(path.q[K][i] - path.q[0][i] + drift - noise);
}

double hvi_residual(const ControlProblem& problem, const EigenBasis& basis, const PathRealization& path,
                    const SpectralVector& xi) {
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double lhs = functional_F_dirderiv(problem.potential, path.q[k], xi, basis, problem.kink_tol);
    slack = std::min(slack, lhs - path.selections.f[k].dot(xi));
  }
  return slack;
}

double selection_defect(const ControlProblem& problem, const EigenBasis& basis,
                        std::span<const SpectralVector> trajectory, const Selections& selections, double dt) {
  if (trajectory.empty() || selections.steps() + 1 != trajectory.size() || selections.f_grid.size() != selections.steps() ||
      selections.sigma_level.size() != selections.steps())
    throw std::invalid_argument("selection_defect: selections do not match the trajectory");
  const double tol = problem.kink_tol;
  double defect = 0.0;
  for (std::size_t k = 0; k < selections.steps(); ++k) {
    const auto grid = to_grid(trajectory[k], basis);
    const auto& fg = selections.f_grid[k];
    if (fg.size() != grid.size()) throw std::invalid_argument("selection_defect: grid size mismatch");
    for (std::size_t j = 0; j < grid.size(); ++j)
      defect = std::max(defect, outside(clarke_interval(problem.potential, grid[j], tol), fg[j]));
    const Interval env =
        problem.diffusion.envelope(dt * static_cast<double>(k), spatial_mean(trajectory[k], basis), tol);
    defect = std::max(defect, outside(env, selections.sigma_level[k]));
  }
  return defect;
}

double selection_defect(const ControlProblem& problem, const EigenBasis& basis, const PathRealization& path) {
  return selection_defect(problem, basis, path.q, path.selections, path.noise.dt());
}

}  // namespace hvctl
