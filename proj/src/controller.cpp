#include "hvctl/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "hvctl/ensemble.hpp"

namespace hvctl {

AprioriBound apriori_bound(const ControlProblem& problem) {
  if (!(problem.eps > 0.0)) throw std::invalid_argument("apriori_bound: eps must be positive");
  const double a = problem.horizon;
  const double b4 = std::pow(problem.control_norm(), 4);
  const double eps2 = problem.eps * problem.eps;
  const double ka = problem.conv_constant;
  const double c = 16.0 * a * a * b4 / eps2;

  AprioriBound r;
  r.K1 = c;
  r.K2 = 4.0 + c;
  r.K3 = 4.0 * a + 16.0 * a * a * a * b4 / eps2;
  r.K4 = c * ka + ka;
  const double lip = problem.potential.lipschitz();
  r.int_eta = a * std::numbers::pi * lip * lip;
  // midpoint rule on the problem grid; exact for the time-independent envelopes
  const double dt = problem.dt();
  for (std::size_t k = 0; k < problem.steps; ++k)
    r.int_zeta += problem.diffusion.zeta((static_cast<double>(k) + 0.5) * dt, problem.wiener) * dt;
  r.value = r.K1 * problem.z.norm_squared() + r.K2 * problem.x0.norm_squared() + r.K3 * r.int_eta +
            r.K4 * r.int_zeta;
  return r;
}

namespace {

SpectralVector convolutions(const Selections& sel, const NoisePath& noise, const EigenBasis& basis) {
  const std::size_t N = basis.modes();
  const double dt = noise.dt();
  SpectralVector acc(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double lambda = basis.eigenvalue(n);
    const double decay = std::exp(lambda * dt);
    const double phi = drift_weight(lambda, dt);
    double c = 0.0;
    for (std::size_t k = 0; k < noise.steps; ++k)
      c = decay * (c + sel.sigma[k].sigma[n] * noise.increments[k * N + n]) + phi * sel.f[k][n];
    acc[n] = c;
  }
  return acc;
}

SpectralVector compute_Z_from(const Selections& sel, const NoisePath& noise, const SpectralVector& z,
                              const SpectralVector& x0, const EigenBasis& basis) {
  if (sel.f.size() != noise.steps || sel.sigma.size() != noise.steps)
    throw std::invalid_argument("compute_Z: selections do not match the step count");
  return z - apply_semigroup(noise.horizon, x0, basis) - convolutions(sel, noise, basis);
}

}  // namespace

SpectralVector compute_Z(const PathRealization& path, const SpectralVector& z, const SpectralVector& x0,
                         const EigenBasis& basis) {
  return compute_Z_from(path.selections, path.noise, z, x0, basis);
}

ControlTrajectory synthesize_control(const SpectralVector& Z, double eps, const GramianDiag& gramian,
                                     const EigenBasis& basis, double horizon, std::size_t steps,
                                     std::span<const double> gain) {
  if (!(eps > 0.0)) throw std::invalid_argument("synthesize_control: eps must be positive");
  if (steps == 0) throw std::invalid_argument("synthesize_control: step count must be positive");
  if (!gain.empty() && gain.size() != basis.modes())
    throw std::invalid_argument("synthesize_control: gain size mismatch");
  const std::size_t N = basis.modes();
  const SpectralVector R = resolvent_apply(eps, gramian, Z);
  const double dt = horizon / static_cast<double>(steps);

  ControlTrajectory u;
  u.nodes.assign(steps + 1, SpectralVector(N));
  u.drive.assign(steps, SpectralVector(N));
  for (std::size_t n = 0; n < N; ++n) {
    const double b = gain.empty() ? 1.0 : gain[n];
    const double mu = -basis.eigenvalue(n);
    const double phi = drift_weight(-mu, dt);
    // int_{t_k}^{t_{k+1}} e^{-mu (t_{k+1} - s)} e^{-mu (a - s)} ds = e^{-mu (a - t_{k+1})} step_gram
    const double step_gram = -std::expm1(-2.0 * mu * dt) / (2.0 * mu);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double remaining = horizon * static_cast<double>(steps - k) / static_cast<double>(steps);
      u.nodes[k][n] = b * std::exp(-mu * remaining) * R[n];
    }
    for (std::size_t k = 0; k < steps; ++k) {
      const double remaining = horizon * static_cast<double>(steps - k - 1) / static_cast<double>(steps);
      u.drive[k][n] = b * b * R[n] * std::exp(-mu * remaining) * step_gram / phi;
    }
    u.energy += b * b * R[n] * R[n] * (-std::expm1(-2.0 * mu * horizon)) / (2.0 * mu);
  }
  return u;
}

namespace {

PathRealization apply_selections(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise,
                                 const GramianDiag& gramian, Selections sel) {
  const SpectralVector Z = compute_Z_from(sel, noise, problem.z, problem.x0, basis);
  ControlTrajectory u =
      synthesize_control(Z, problem.eps, gramian, basis, problem.horizon, noise.steps, problem.gain);
  return integrate_with_selections(problem, basis, noise, std::move(sel), std::move(u));
}

double sup_distance(const std::vector<SpectralVector>& a, const std::vector<SpectralVector>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, (a[k] - b[k]).norm());
  return d;
}

// The trajectory is affine in the selections: changing one grid value of f_k,
// or the diffusion level s_k, moves every later node directly and through Z
// via the control. LinearResponse tabulates both paths in closed form.
class LinearResponse {
 public:
  LinearResponse(const ControlProblem& problem, const EigenBasis& basis, const GramianDiag& gramian,
                 const NoisePath& noise)
      : basis_(basis), noise_(noise), N_(basis.modes()), K_(noise.steps) {
    const double dt = noise.dt();
    decay_.assign((K_ + 1) * N_, 0.0);
    control_.assign((K_ + 1) * N_, 0.0);
    phi_.resize(N_);
    denom_.resize(N_);
    shape_.resize(N_);
    for (std::size_t n = 0; n < N_; ++n) {
      const double lambda = basis.eigenvalue(n);
      const double mu = -lambda;
      const double b = problem.gain_at(n);
      const double step_gram = -std::expm1(-2.0 * mu * dt) / (2.0 * mu);
      phi_[n] = drift_weight(lambda, dt);
      denom_[n] = problem.eps + gramian.gammas[n];
      shape_[n] = problem.diffusion.shape[n];
      const double e = std::exp(lambda * dt);
      for (std::size_t m = 0; m <= K_; ++m) decay_[m * N_ + n] = std::exp(lambda * dt * static_cast<double>(m));
      for (std::size_t m = 0; m < K_; ++m)
        control_[(m + 1) * N_ + n] =
            e * control_[m * N_ + n] + b * b * step_gram * decay_[(K_ - m - 1) * N_ + n];
    }
  }

  // Source vector entering q_{k+1} for a unit change of the entry.
  SpectralVector source(bool is_sigma, std::size_t k, std::size_t j) const {
    SpectralVector src(N_);
    const double h = basis_.spacing();
    for (std::size_t n = 0; n < N_; ++n) {
      src[n] = is_sigma ? decay_[N_ + n] * shape_[n] * noise_.increments[k * N_ + n]
                        : phi_[n] * h * basis_.basis_value(j, n);
    }
    return src;
  }

  // Change of q_m for the source injected at step k.
  double project(const SpectralVector& src, std::size_t k, std::size_t m, const std::vector<double>& probe) const {
    double r = 0.0;
    for (std::size_t n = 0; n < N_; ++n) {
      const double dZ = -decay_[(K_ - k - 1) * N_ + n] * src[n];
      double dq = control_[m * N_ + n] * dZ / denom_[n];
      if (m > k) dq += decay_[(m - k - 1) * N_ + n] * src[n];
      r += probe[n] * dq;
    }
    return r;
  }

 private:
  const EigenBasis& basis_;
  const NoisePath& noise_;
  std::size_t N_;
  std::size_t K_;
  std::vector<double> decay_;    // e^{lambda_n m dt}
  std::vector<double> control_;  // response of q_m to a unit (eps + gamma) R
  std::vector<double> phi_;
  std::vector<double> denom_;
  std::vector<double> shape_;
};

struct Kink {
  bool is_sigma = false;
  std::size_t k = 0;
  std::size_t j = 0;
  double from = 0.0;
  double to = 0.0;
  double target = 0.0;
  double side = 1.0;  // sign of (node - target) on the side where `to` applies
  std::vector<double> probe;

  bool same_entry(const Kink& o) const { return is_sigma == o.is_sigma && k == o.k && j == o.j; }
};

constexpr std::size_t kMaxKinks = 64;

double node_value(const Kink& kink, const std::vector<SpectralVector>& q) {
  double v = 0.0;
  for (std::size_t n = 0; n < kink.probe.size(); ++n) v += kink.probe[n] * q[kink.k][n];
  return v;
}

double entry_value(const Selections& sel, const Kink& kink) {
  return kink.is_sigma ? sel.sigma_level[kink.k] : sel.f_grid[kink.k][kink.j];
}

void set_entry(Selections& sel, const Kink& kink, double value) {
  if (kink.is_sigma)
    sel.sigma_level[kink.k] = value;
  else
    sel.f_grid[kink.k][kink.j] = value;
}

// Entries whose selection jumps between two values that are both admissible at
// one threshold. The trajectory is affine in the selections, so putting the
// nodes of all such entries on their thresholds with intermediate values is a
// small box-constrained linear problem; the set persists across iterations so
// that alternating flips of neighbouring nodes are resolved together.
class KinkSet {
 public:
  KinkSet(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise, const GramianDiag& gramian,
          const LinearResponse& response)
      : problem_(problem), basis_(basis), noise_(noise), gramian_(gramian), response_(response) {
    mean_probe_.resize(basis.modes());
    for (std::size_t n = 0; n < basis.modes(); ++n) mean_probe_[n] = basis.mean_weight(n);
  }

  // `next` holds the reselected values at the state of `current`; on return
  // the entries in the set carry resolved intermediate values.
  void resolve(const PathRealization& current, Selections& next) {
    const Selections& prev = current.selections;
    std::size_t flips = 0;
    for (std::size_t k = 0; k < prev.steps(); ++k) {
      if (next.sigma_level[k] != prev.sigma_level[k]) ++flips;
      if (next.f_grid[k] == prev.f_grid[k]) continue;
      for (std::size_t j = 0; j < next.f_grid[k].size(); ++j) flips += next.f_grid[k][j] != prev.f_grid[k][j];
    }
    if (flips > kMaxKinks) {
      kinks_.clear();
      return;
    }
    bool other = false;
    for (std::size_t k = 0; k < prev.steps(); ++k) {
      if (next.f_grid[k] != prev.f_grid[k]) {
        const auto grid = to_grid(current.q[k], basis_);
        for (std::size_t j = 0; j < grid.size(); ++j)
          if (next.f_grid[k][j] != prev.f_grid[k][j])
            other |= !track(make_f(k, j, grid[j], prev.f_grid[k][j], next.f_grid[k][j]));
      }
      if (next.sigma_level[k] != prev.sigma_level[k])
        other |= !track(make_sigma(k, prev.sigma_level[k], next.sigma_level[k]));
    }
    const std::size_t D = kinks_.size();
    if (D == 0) return;
    if (D > kMaxKinks) {
      kinks_.clear();
      return;
    }

    Eigen::MatrixXd A(D, D);
    for (std::size_t e = 0; e < D; ++e) {
      const SpectralVector src = response_.source(kinks_[e].is_sigma, kinks_[e].k, kinks_[e].j);
      for (std::size_t d = 0; d < D; ++d)
        A(d, e) = response_.project(src, kinks_[e].k, kinks_[d].k, kinks_[d].probe) * (kinks_[e].to - kinks_[e].from);
    }
    // node values with every kink at `from`, all other changes of `next` applied
    Eigen::VectorXd base(D);
    if (other) {
      Selections s = next;
      for (const Kink& kink : kinks_) {
        set_entry(s, kink, kink.from);
        s.refresh(kink.k, basis_, problem_.diffusion);
      }
      const auto q = apply_selections(problem_, basis_, noise_, gramian_, std::move(s)).q;
      for (std::size_t d = 0; d < D; ++d) base(d) = node_value(kinks_[d], q);
    } else {
      Eigen::VectorXd theta_now(D);
      for (std::size_t e = 0; e < D; ++e)
        theta_now(e) = (entry_value(prev, kinks_[e]) - kinks_[e].from) / (kinks_[e].to - kinks_[e].from);
      const Eigen::VectorXd shift = A * theta_now;
      for (std::size_t d = 0; d < D; ++d) base(d) = node_value(kinks_[d], current.q) - shift(d);
    }
    Eigen::VectorXd rhs(D);
    for (std::size_t d = 0; d < D; ++d) rhs(d) = kinks_[d].target - base(d);

    Eigen::VectorXd theta;
    if (!solve_box(A, rhs, theta)) {
      kinks_.clear();
      return;
    }
    for (std::size_t d = 0; d < D; ++d) {
      const Kink& kink = kinks_[d];
      set_entry(next, kink, kink.from + theta(static_cast<Eigen::Index>(d)) * (kink.to - kink.from));
      next.refresh(kink.k, basis_, problem_.diffusion);
    }
  }

  void clear() { kinks_.clear(); }

 private:
  std::optional<Kink> make_f(std::size_t k, std::size_t j, double u, double from, double to) const {
    double best = std::nan("");
    for (double s : {problem_.potential.s1, problem_.potential.s2}) {
      const Interval iv = clarke_interval(problem_.potential, s);
      if (!iv.contains(from) || !iv.contains(to)) continue;
      if (std::isnan(best) || std::abs(u - s) < std::abs(u - best)) best = s;
    }
    if (std::isnan(best)) return std::nullopt;
    Kink kink{false, k, j, from, to, best, to > from ? 1.0 : -1.0, std::vector<double>(basis_.modes())};
    for (std::size_t n = 0; n < basis_.modes(); ++n) kink.probe[n] = basis_.basis_value(j, n);
    return kink;
  }

  std::optional<Kink> make_sigma(std::size_t k, double from, double to) const {
    const double level = problem_.diffusion.switch_level;
    if (std::isnan(level)) return std::nullopt;
    const double t = noise_.dt() * static_cast<double>(k);
    const Interval env = problem_.diffusion.envelope(t, level);
    if (!env.contains(from) || !env.contains(to)) return std::nullopt;
    const Interval above = problem_.diffusion.envelope(t, std::nextafter(level, INFINITY));
    return Kink{true, k, 0, from, to, level, above.contains(to) ? 1.0 : -1.0, mean_probe_};
  }

  // Adds or refreshes an entry; false when the flip cannot be resolved.
  bool track(std::optional<Kink> kink) {
    if (!kink) return false;
    for (Kink& existing : kinks_) {
      if (!existing.same_entry(*kink)) continue;
      const bool same_pair = (existing.from == kink->from && existing.to == kink->to) ||
                             (existing.from == kink->to && existing.to == kink->from);
      const bool inside = (kink->from - existing.from) * (kink->from - existing.to) <= 0.0 &&
                          (kink->to - existing.from) * (kink->to - existing.to) <= 0.0;
      if (!same_pair && !inside) existing = std::move(*kink);
      return true;
    }
    kinks_.push_back(std::move(*kink));
    return true;
  }

  // A theta = rhs with 0 <= theta <= 1. A free entry sits on its threshold; an
  // entry held at a bound must have its node on the matching side.
  bool solve_box(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, Eigen::VectorXd& theta) const {
    const auto D = A.rows();
    theta = Eigen::VectorXd::Zero(D);
    std::vector<int> state(static_cast<std::size_t>(D), -1);  // -1 free, 0 / 1 held at that bound
    for (Eigen::Index round = 0; round < 4 * D + 4; ++round) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index d = 0; d < D; ++d)
        if (state[static_cast<std::size_t>(d)] < 0) idx.push_back(d);
      for (Eigen::Index d = 0; d < D; ++d)
        if (state[static_cast<std::size_t>(d)] >= 0) theta(d) = state[static_cast<std::size_t>(d)];
      const auto F = static_cast<Eigen::Index>(idx.size());
      if (F > 0) {
        Eigen::MatrixXd Af(F, F);
        Eigen::VectorXd bf(F);
        for (Eigen::Index r = 0; r < F; ++r) {
          bf(r) = rhs(idx[r]);
          for (Eigen::Index d = 0; d < D; ++d)
            if (state[static_cast<std::size_t>(d)] >= 0) bf(r) -= A(idx[r], d) * theta(d);
          for (Eigen::Index c = 0; c < F; ++c) Af(r, c) = A(idx[r], idx[c]);
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(Af);
        if (!lu.isInvertible()) return false;
        const Eigen::VectorXd x = lu.solve(bf);
        Eigen::Index worst = -1;
        double violation = 0.0;
        for (Eigen::Index r = 0; r < F; ++r) {
          theta(idx[r]) = x(r);
          const double v = std::max(-x(r), x(r) - 1.0);
          if (v > violation) {
            violation = v;
            worst = r;
          }
        }
        if (worst >= 0) {
          state[static_cast<std::size_t>(idx[worst])] = x(worst) > 1.0 ? 1 : 0;
          continue;
        }
      }
      // release the held entry whose node is furthest on the wrong side
      const Eigen::VectorXd gap = A * theta - rhs;  // node - target
      Eigen::Index wrong = -1;
      double worst_gap = problem_.kink_tol;
      for (Eigen::Index d = 0; d < D; ++d) {
        const int st = state[static_cast<std::size_t>(d)];
        if (st < 0) continue;
        const double side = kinks_[static_cast<std::size_t>(d)].side * (st == 1 ? 1.0 : -1.0);
        if (-side * gap(d) > worst_gap) {
          worst_gap = -side * gap(d);
          wrong = d;
        }
      }
      if (wrong < 0) return true;
      state[static_cast<std::size_t>(wrong)] = -1;
    }
    for (Eigen::Index d = 0; d < D; ++d) theta(d) = std::clamp(theta(d), 0.0, 1.0);
    return true;
  }

  const ControlProblem& problem_;
  const EigenBasis& basis_;
  const NoisePath& noise_;
  const GramianDiag& gramian_;
  const LinearResponse& response_;
  std::vector<double> mean_probe_;
  std::vector<Kink> kinks_;
};

}  // namespace

PathRealization gamma_eps_apply(const ControlProblem& problem, const EigenBasis& basis,
                                const PathRealization& iterate) {
  const GramianDiag gramian = gramian_diagonal(problem.horizon, basis, problem.gain);
  return apply_selections(problem, basis, iterate.noise, gramian,
                          select_along(problem, basis, iterate.q, iterate.noise.dt()));
}

FixedPointResult fixed_point_solve(const ControlProblem& problem, const EigenBasis& basis, const NoisePath& noise) {
  const GramianDiag gramian = gramian_diagonal(problem.horizon, basis, problem.gain);
  const LinearResponse response(problem, basis, gramian, noise);
  KinkSet kinks(problem, basis, noise, gramian, response);
  const double dt = noise.dt();
  PathRealization current = integrate_path(problem, basis, noise);
  Selections sel = current.selections;

  FixedPointResult result;
  for (std::size_t it = 1; it <= problem.fp_max_iter; ++it) {
    PathRealization next = apply_selections(problem, basis, noise, gramian, std::move(sel));
    result.iterations = it;
    result.last_change = sup_distance(next.q, current.q);
    current = std::move(next);
    // the selections used are admissible at the state they produce
    if (selection_defect(problem, basis, current.q, current.selections, dt) == 0.0) {
      result.converged = true;
      break;
    }
    sel = reselect(problem, basis, current.q, dt, current.selections);
    Selections plain = sel;
    if (result.last_change >= problem.fp_tol) kinks.resolve(current, sel);
    if (sel == current.selections || result.last_change < problem.fp_tol) {
      // resolution stalls on the current iterate: take a plain step
      kinks.clear();
      sel = std::move(plain);
    }
  }
  result.path = std::move(current);
  return result;
}

double terminal_identity_residual(const PathRealization& path, double eps, const GramianDiag& gramian,
                                  const SpectralVector& z, const SpectralVector& x0, const EigenBasis& basis) {
  const SpectralVector Z = compute_Z(path, z, x0, basis);
  SpectralVector r = path.terminal() - z;
  r += eps * resolvent_apply(eps, gramian, Z);
  return r.norm();
}

bool SweepResult::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failures == 0; });
}

SweepResult epsilon_sweep(const ControlProblem& problem, std::span<const double> eps_list,
                          const SweepOptions& options) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon_sweep: eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw std::invalid_argument("epsilon_sweep: eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("epsilon_sweep: eps values must be strictly decreasing");
  }
  SweepResult result;
  for (double eps : eps_list) {
    ControlProblem p = problem;
    p.eps = eps;
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    row.eps = eps;
    try {
      EnsembleOptions eo;
      eo.workers = options.workers;
      eo.confidence_level = options.confidence_level;
      const EnsembleStats stats = run_ensemble(p, eo);
      row.error_mean = stats.error_mean;
      row.error_ci = stats.error_ci;
      row.energy_mean = stats.energy_mean;
      row.fp_rate = stats.fp_rate;
      row.failures = stats.failures;
      row.failure_message = stats.first_failure;
    } catch (const std::exception& e) {
      row.error_mean = row.error_ci = row.energy_mean = std::nan("");
      row.failures = p.paths;
      row.failure_message = e.what();
    }
    if (options.timing)
      row.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace hvctl
