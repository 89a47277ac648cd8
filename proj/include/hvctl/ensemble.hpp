#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "hvctl/controller.hpp"

namespace hvctl {

/// Evaluates fn(i) for i in [0, count) on up to `workers` threads. Results are
/// stored by index, so the output never depends on scheduling.
template <typename Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> out(count);
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct EnsembleOptions {
  std::size_t workers = 1;
  double confidence_level = 0.95;
  /// Compute weak, HVI and terminal-identity residuals per path.
  bool residuals = false;
  /// 1-based modes used for weak residuals and as HVI test directions (+/- w_m).
  std::vector<std::size_t> report_modes{1};
  /// Number of leading paths whose full realization is retained.
  std::size_t keep_paths = 0;
};

struct PathSummary {
  bool failed = false;
  std::string message;
  bool converged = false;
  std::size_t iterations = 0;
  double terminal_error = 0.0;  // ||q(a) - z||^2
  double energy = 0.0;
  double terminal_identity = 0.0;
  double weak_residual = 0.0;  // max over report modes
  double hvi_slack = 0.0;      // min over directions
  double selection_defect = 0.0;
  std::vector<double> state_sq;  // ||q(t_k)||^2
};

struct EnsembleStats {
  std::size_t paths = 0;
  std::size_t failures = 0;
  std::string first_failure;
  double error_mean = 0.0;
  double error_ci = 0.0;
  double energy_mean = 0.0;
  double fp_rate = 0.0;
  double mean_iterations = 0.0;
  double sup_moment = 0.0;  // max_k E||q(t_k)||^2
  double weak_residual_max = 0.0;
  double hvi_slack_min = 0.0;
  double terminal_identity_max = 0.0;  // over converged paths
  double selection_defect_max = 0.0;
  AprioriBound bound;
  std::vector<PathSummary> per_path;
  std::vector<FixedPointResult> kept;
};

/// Two-sided normal quantile for the given confidence level.
double normal_quantile(double confidence_level);

/// Solves the fixed point on every path of the problem's ensemble (paths
/// 0..M-1 under problem.seed) and reduces in path order.
EnsembleStats run_ensemble(const ControlProblem& problem, const EnsembleOptions& options = {});

}  // namespace hvctl
