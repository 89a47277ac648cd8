#include "hvctl/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hvctl/controller.hpp"
#include "hvctl/ensemble.hpp"

namespace hvctl {

namespace {

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

SuiteResult gramian_suite(const SelftestOptions& options) {
  constexpr double kTol = 1e-10;
  constexpr std::size_t kModes = 64;
  const EigenBasis basis(kModes);
  double worst = 0.0;
  for (double a : {0.25, 1.0, 4.0}) {
    GramianDiag g = gramian_diagonal(a, basis);
    for (double& gamma : g.gammas) gamma += options.gramian_perturbation;
    for (std::size_t i = 0; i < kModes; ++i) {
      const double rate = 2.0 * std::pow(static_cast<double>(i + 1), 2);
      auto f = [rate](double s) { return std::exp(-rate * s); };
      const double quad = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, a, 20, 1e-15);
      worst = std::max(worst, std::abs(g.gammas[i] - quad));
    }
  }
  return {"gramian", worst < kTol, kTol - worst, fmt("max |gamma - quadrature| = %.3e (tol %.0e)", worst, kTol)};
}

SuiteResult resolvent_suite(const SelftestOptions& options) {
  constexpr std::size_t kModes = 64;
  constexpr std::size_t kSamples = 1000;
  const EigenBasis basis(kModes);
  const GramianDiag g = gramian_diagonal(1.0, basis);
  double worst = 0.0;
  std::size_t violations = 0;
  for (double eps : {1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0, 1e3}) {
    for (std::size_t s = 0; s < kSamples; ++s) {
      SpectralVector y(kModes);
      for (std::size_t n = 0; n < kModes; ++n) y[n] = counter_normal(options.seed, s, 7, n);
      const double ratio = (eps * resolvent_apply(eps, g, y)).norm() / y.norm();
      worst = std::max(worst, ratio);
      if (ratio > 1.0) ++violations;
    }
  }
  return {"resolvent", violations == 0, 1.0 - worst,
          fmt("max ||eps R y|| / ||y|| = %.6f, %g violations", worst, static_cast<double>(violations))};
}

// Dyadic (u, v) grid and dyadic thresholds make the difference quotients exact.
SuiteResult clarke_suite(const SelftestOptions&) {
  const ThermostatPotential pot{0.25, 0.75, -0.5, 0.5};
  const double delta = std::ldexp(1.0, -12);
  const double t = std::ldexp(1.0, -14);
  double worst = 0.0;
  double bound_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 40; ++i) {
    const double u = -0.25 + i * std::ldexp(1.0, -5);
    const Interval d = clarke_interval(pot, u);
    bound_excess = std::max({bound_excess, std::abs(d.lo) - pot.lipschitz(), std::abs(d.hi) - pot.lipschitz()});
    for (int j = 0; j < 25; ++j) {
      const double v = (j - 12) * std::ldexp(1.0, -3);
      double limsup = -std::numeric_limits<double>::infinity();
      for (double y : {u - delta, u, u + delta}) limsup = std::max(limsup, (phi_value(pot, y + t * v) - phi_value(pot, y)) / t);
      worst = std::max(worst, std::abs(clarke_dirderiv(pot, u, v) - limsup));
    }
  }
  const bool ok = worst == 0.0 && bound_excess <= 0.0;
  return {"clarke", ok, ok ? 0.0 - bound_excess : -std::max(worst, bound_excess),
          fmt("max |max-formula - difference quotient| = %.3e, max |dPhi| - L = %.3e", worst, bound_excess)};
}

SuiteResult ito_suite(const SelftestOptions& options) {
  constexpr double kZ = 3.0;
  constexpr std::size_t kSeeds = 10;
  constexpr std::size_t kRequired = 9;
  const std::size_t modes = 16;
  const QWienerSpec spec = QWienerSpec::power_law(modes);
  DiffusionOperator sigma;
  for (std::size_t n = 0; n < modes; ++n) sigma.sigma.push_back(0.3 / std::sqrt(static_cast<double>(n + 1)));
  std::size_t within = 0;
  std::vector<double> zs;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    const ItoReport r = ito_isometry_check(sigma, spec, 10000, 32, 1.0, options.seed + s);
    zs.push_back(std::abs(r.z_score));
    if (std::abs(r.z_score) <= kZ) ++within;
  }
  std::sort(zs.begin(), zs.end());
  const double ninth = zs[kRequired - 1];
  return {"ito", within >= kRequired, kZ - ninth,
          fmt("%g of 10 seeds with |z| <= 3, 9th smallest |z| = %.3f", static_cast<double>(within), ninth)};
}

SuiteResult residual_suite(const SelftestOptions& options) {
  constexpr double kHviTol = -1e-10;
  ControlProblem p = ControlProblem::thermostat_default();
  p.paths = 10;
  p.seed = options.seed;
  EnsembleOptions eo;
  eo.workers = options.workers;
  eo.residuals = true;
  eo.report_modes = {1, 2, 3, 4, 5};
  const EnsembleStats st = run_ensemble(p, eo);
  const double slack = st.hvi_slack_min;

  // deterministic controlled case: the weak residual is first order in dt
  double lo_ratio = std::numeric_limits<double>::infinity();
  double hi_ratio = 0.0;
  double prev = 0.0;
  for (std::size_t K = 64; K <= 1024; K *= 2) {
    ControlProblem lin = ControlProblem::linear_heat(16, K);
    const EigenBasis basis = lin.basis();
    const NoisePath noise = sample_noise_path(lin.wiener, K, lin.horizon, options.seed, 0);
    const double w = weak_residual(fixed_point_solve(lin, basis, noise).path, 1, basis);
    if (prev > 0.0) {
      lo_ratio = std::min(lo_ratio, prev / w);
      hi_ratio = std::max(hi_ratio, prev / w);
    }
    prev = w;
  }
  const bool ok = st.failures == 0 && slack >= kHviTol && lo_ratio >= 1.8 && hi_ratio <= 2.2;
  const double margin = std::min({slack - kHviTol, lo_ratio - 1.8, 2.2 - hi_ratio});
  return {"residuals", ok, margin,
          fmt("min HVI slack = %.3e, weak-residual halving ratios in [%.4f, ", slack, lo_ratio) +
              fmt("%.4f]", hi_ratio)};
}

SuiteResult terminal_identity_suite(const SelftestOptions& options) {
  ControlProblem p = ControlProblem::thermostat_default();
  p.paths = 10;
  p.seed = options.seed;
  EnsembleOptions eo;
  eo.workers = options.workers;
  eo.residuals = true;
  const EnsembleStats st = run_ensemble(p, eo);
  const double tol = 1e-6 + 10.0 * p.dt();

  ControlProblem lin = ControlProblem::linear_heat(16, 1024);
  const EigenBasis basis = lin.basis();
  const NoisePath noise = sample_noise_path(lin.wiener, lin.steps, lin.horizon, options.seed, 0);
  const FixedPointResult fp = fixed_point_solve(lin, basis, noise);
  const double lin_res = terminal_identity_residual(fp.path, lin.eps, gramian_diagonal(lin.horizon, basis), lin.z,
                                                    lin.x0, basis);
  const bool ok = st.failures == 0 && st.fp_rate > 0.0 && st.terminal_identity_max < tol && fp.converged &&
                  lin_res < 1e-8;
  return {"terminal_identity", ok, std::min(tol - st.terminal_identity_max, 1e-8 - lin_res),
          fmt("stochastic max residual = %.3e, linear residual = %.3e", st.terminal_identity_max, lin_res)};
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
  using Suite = SuiteResult (*)(const SelftestOptions&);
  const std::pair<const char*, Suite> suites[] = {
      {"gramian", gramian_suite},     {"resolvent", resolvent_suite}, {"clarke", clarke_suite},
      {"ito", ito_suite},             {"residuals", residual_suite},  {"terminal_identity", terminal_identity_suite},
  };
  std::vector<SuiteResult> out;
  for (const auto& [name, suite] : suites) {
    try {
      out.push_back(suite(options));
    } catch (const std::exception& e) {
      out.push_back({name, false, -std::numeric_limits<double>::infinity(), std::string("error: ") + e.what()});
    }
  }
  return out;
}

int cmd_selftest(const SelftestOptions& options, std::ostream& out) {
  bool all = true;
  for (const SuiteResult& r : run_selftest(options)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-18s %s  margin=%.3e  ", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.margin);
    out << buf << r.detail << "\n";
    all = all && r.passed;
  }
  out << (all ? "selftest: all suites passed\n" : "selftest: FAILED\n");
  return all ? 0 : 1;
}

}  // namespace hvctl
