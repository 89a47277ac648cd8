#include "hvctl/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include <boost/math/distributions/normal.hpp>

namespace hvctl {

double normal_quantile(double confidence_level) {
  if (!(confidence_level > 0.0 && confidence_level < 1.0))
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * confidence_level);
}

namespace {

struct PathOutcome {
  PathSummary summary;
  std::optional<FixedPointResult> kept;
};

PathOutcome solve_one(const ControlProblem& problem, const EigenBasis& basis, const GramianDiag& gramian,
                      const EnsembleOptions& options, std::size_t index) {
  PathOutcome out;
  PathSummary& s = out.summary;
  try {
    const NoisePath noise = sample_noise_path(problem.wiener, problem.steps, problem.horizon, problem.seed, index);
    FixedPointResult fp = fixed_point_solve(problem, basis, noise);
    const PathRealization& path = fp.path;
    s.converged = fp.converged;
    s.iterations = fp.iterations;
    s.terminal_error = (path.terminal() - problem.z).norm_squared();
    s.energy = path.control.energy;
    s.state_sq.reserve(path.q.size());
    for (const auto& q : path.q) s.state_sq.push_back(q.norm_squared());
    if (options.residuals) {
      s.terminal_identity = terminal_identity_residual(path, problem.eps, gramian, problem.z, problem.x0, basis);
      s.hvi_slack = std::numeric_limits<double>::infinity();
      for (std::size_t m : options.report_modes) {
        s.weak_residual = std::max(s.weak_residual, weak_residual(path, m, basis));
        const SpectralVector xi = SpectralVector::unit(basis.modes(), m - 1);
        s.hvi_slack = std::min(s.hvi_slack, hvi_residual(problem, basis, path, xi));
        s.hvi_slack = std::min(s.hvi_slack, hvi_residual(problem, basis, path, -1.0 * xi));
      }
      s.selection_defect = selection_defect(problem, basis, path);
    }
    if (index < options.keep_paths) out.kept = std::move(fp);
  } catch (const std::exception& e) {
    s.failed = true;
    s.message = "path " + std::to_string(index) + ": " + e.what();
  }
  return out;
}

}  // namespace

EnsembleStats run_ensemble(const ControlProblem& problem, const EnsembleOptions& options) {
  problem.validate();
  for (std::size_t m : options.report_modes)
    if (m == 0 || m > problem.modes) throw std::invalid_argument("report mode out of range");
  const EigenBasis basis = problem.basis();
  const GramianDiag gramian = gramian_diagonal(problem.horizon, basis, problem.gain);
  const double zq = normal_quantile(options.confidence_level);

  auto outcomes = parallel_map(problem.paths, options.workers, [&](std::size_t i) {
    return solve_one(problem, basis, gramian, options, i);
  });

  EnsembleStats st;
  st.paths = problem.paths;
  st.bound = apriori_bound(problem);
  st.hvi_slack_min = std::numeric_limits<double>::infinity();
  std::vector<double> moment(problem.steps + 1, 0.0);
  std::size_t ok = 0;
  std::size_t converged = 0;
  double err_sum = 0.0;
  double err_sq = 0.0;
  double energy_sum = 0.0;
  double iter_sum = 0.0;
  for (auto& o : outcomes) {
    const PathSummary& s = o.summary;
    if (s.failed) {
      if (st.failures++ == 0) st.first_failure = s.message;
      continue;
    }
    ++ok;
    err_sum += s.terminal_error;
    err_sq += s.terminal_error * s.terminal_error;
    energy_sum += s.energy;
    iter_sum += static_cast<double>(s.iterations);
    for (std::size_t k = 0; k < moment.size(); ++k) moment[k] += s.state_sq[k];
    if (s.converged) {
      ++converged;
      st.terminal_identity_max = std::max(st.terminal_identity_max, s.terminal_identity);
    }
    st.weak_residual_max = std::max(st.weak_residual_max, s.weak_residual);
    st.hvi_slack_min = std::min(st.hvi_slack_min, s.hvi_slack);
    st.selection_defect_max = std::max(st.selection_defect_max, s.selection_defect);
    if (o.kept) st.kept.push_back(std::move(*o.kept));
  }
  if (!options.residuals || ok == 0) st.hvi_slack_min = 0.0;
  st.fp_rate = static_cast<double>(converged) / static_cast<double>(problem.paths);
  if (ok > 0) {
    const double n = static_cast<double>(ok);
    st.error_mean = err_sum / n;
    st.energy_mean = energy_sum / n;
    st.mean_iterations = iter_sum / n;
    const double var = ok > 1 ? std::max(0.0, (err_sq - n * st.error_mean * st.error_mean) / (n - 1.0)) : 0.0;
    st.error_ci = zq * std::sqrt(var / n);
    for (double m : moment) st.sup_moment = std::max(st.sup_moment, m / n);
  } else {
    st.error_mean = st.error_ci = st.energy_mean = std::nan("");
  }
  st.per_path.reserve(outcomes.size());
  for (auto& o : outcomes) st.per_path.push_back(std::move(o.summary));
  return st;
}

}  // namespace hvctl
