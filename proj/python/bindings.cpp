#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hvctl/config.hpp"
#include "hvctl/ensemble.hpp"
#include "hvctl/harness.hpp"
#include "hvctl/selftest.hpp"

namespace py = pybind11;
using namespace hvctl;

namespace {

std::vector<double> coeffs(const SpectralVector& v) { return {v.coeffs().begin(), v.coeffs().end()}; }

ExperimentConfig make_config(const std::string& text, const py::dict& overrides) {
  ExperimentConfig c = parse_config(text);
  for (const auto& [key, value] : overrides) set_config_value(c, py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
  c.validate();
  return c;
}

py::dict stats_dict(const EnsembleStats& st) {
  py::dict d;
  d["paths"] = st.paths;
  d["failures"] = st.failures;
  d["error_mean"] = st.error_mean;
  d["error_ci"] = st.error_ci;
  d["energy_mean"] = st.energy_mean;
  d["fp_rate"] = st.fp_rate;
  d["mean_iterations"] = st.mean_iterations;
  d["sup_moment"] = st.sup_moment;
  d["apriori_bound"] = st.bound.value;
  d["weak_residual_max"] = st.weak_residual_max;
  d["hvi_slack_min"] = st.hvi_slack_min;
  d["terminal_identity_max"] = st.terminal_identity_max;
  d["selection_defect_max"] = st.selection_defect_max;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hvctl, m) {
  m.doc() = "Regularized controls for the stochastic thermostat heat equation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("version", [] { return std::string(version_string()); });

  m.def(
      "gramian",
      [](double a, std::size_t modes, std::vector<double> gain) {
        return gramian_diagonal(a, EigenBasis(modes), gain).gammas;
      },
      py::arg("a"), py::arg("modes"), py::arg("gain") = std::vector<double>{});

  m.def(
      "resolvent",
      [](double eps, std::vector<double> gammas, std::vector<double> y) {
        if (gammas.size() != y.size()) throw std::invalid_argument("resolvent: gammas and y differ in length");
        return coeffs(resolvent_apply(eps, GramianDiag{std::move(gammas)}, SpectralVector(std::move(y))));
      },
      py::arg("eps"), py::arg("gammas"), py::arg("y"));

  m.def(
      "clarke_interval",
      [](double u, double s1, double s2, double g1, double g2, double kink_tol) {
        const ThermostatPotential pot{s1, s2, g1, g2};
        pot.validate();
        const Interval iv = clarke_interval(pot, u, kink_tol);
        return std::pair{iv.lo, iv.hi};
      },
      py::arg("u"), py::arg("s1") = 0.25, py::arg("s2") = 0.75, py::arg("g1") = -0.5, py::arg("g2") = 0.5,
      py::arg("kink_tol") = 0.0);

  m.def(
      "clarke_dirderiv",
      [](double u, double v, double s1, double s2, double g1, double g2) {
        const ThermostatPotential pot{s1, s2, g1, g2};
        pot.validate();
        return clarke_dirderiv(pot, u, v);
      },
      py::arg("u"), py::arg("v"), py::arg("s1") = 0.25, py::arg("s2") = 0.75, py::arg("g1") = -0.5,
      py::arg("g2") = 0.5);

  m.def(
      "ito_isometry",
      [](std::vector<double> sigma, std::vector<double> mu, std::size_t paths, std::size_t steps, double horizon,
         std::uint64_t seed) {
        const ItoReport r = ito_isometry_check(DiffusionOperator{std::move(sigma)}, QWienerSpec{std::move(mu)}, paths,
                                               steps, horizon, seed);
        py::dict d;
        d["estimate"] = r.estimate;
        d["exact"] = r.exact;
        d["std_error"] = r.std_error;
        d["z_score"] = r.z_score;
        return d;
      },
      py::arg("sigma"), py::arg("mu"), py::arg("paths"), py::arg("steps") = 32, py::arg("horizon") = 1.0,
      py::arg("seed") = 1);

  m.def("config_keys", &config_keys);

  m.def(
      "canonical_config",
      [](const std::string& text, const py::dict& overrides) { return make_config(text, overrides).canonical(); },
      py::arg("text") = "", py::arg("overrides") = py::dict());

  m.def(
      "config_hash",
      [](const std::string& text, const py::dict& overrides) { return make_config(text, overrides).hash(); },
      py::arg("text") = "", py::arg("overrides") = py::dict());

  m.def(
      "solve_path",
      [](const std::string& text, const py::dict& overrides, std::uint64_t path_index) {
        const ControlProblem p = make_config(text, overrides).problem();
        const EigenBasis basis = p.basis();
        FixedPointResult fp;
        {
          py::gil_scoped_release release;
          fp = fixed_point_solve(p, basis, sample_noise_path(p.wiener, p.steps, p.horizon, p.seed, path_index));
        }
        std::vector<std::vector<double>> q;
        for (const auto& v : fp.path.q) q.push_back(coeffs(v));
        std::vector<std::vector<double>> u;
        for (const auto& v : fp.path.control.nodes) u.push_back(coeffs(v));
        py::dict d;
        d["converged"] = fp.converged;
        d["iterations"] = fp.iterations;
        d["q"] = q;
        d["u"] = u;
        d["energy"] = fp.path.control.energy;
        d["terminal_error"] = (fp.path.terminal() - p.z).norm_squared();
        d["terminal_identity"] =
            terminal_identity_residual(fp.path, p.eps, gramian_diagonal(p.horizon, basis, p.gain), p.z, p.x0, basis);
        d["selection_defect"] = selection_defect(p, basis, fp.path);
        return d;
      },
      py::arg("text") = "", py::arg("overrides") = py::dict(), py::arg("path_index") = 0);

  m.def(
      "run_ensemble",
      [](const std::string& text, const py::dict& overrides) {
        const ExperimentConfig c = make_config(text, overrides);
        EnsembleOptions eo;
        eo.workers = c.workers;
        eo.confidence_level = c.confidence_level;
        eo.residuals = true;
        eo.report_modes = c.report_modes;
        EnsembleStats st;
        {
          py::gil_scoped_release release;
          st = run_ensemble(c.problem(), eo);
        }
        return stats_dict(st);
      },
      py::arg("text") = "", py::arg("overrides") = py::dict());

  m.def(
      "sweep_csv",
      [](const std::string& text, const py::dict& overrides) {
        const ExperimentConfig c = make_config(text, overrides);
        SweepOptions so;
        so.workers = c.workers;
        so.confidence_level = c.confidence_level;
        so.timing = c.timing;
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = epsilon_sweep(c.problem(), c.eps_list, so);
        }
        return sweep_csv(r, c);
      },
      py::arg("text") = "", py::arg("overrides") = py::dict());

  m.def(
      "selftest",
      [](std::uint64_t seed, double gramian_perturbation) {
        SelftestOptions o;
        o.seed = seed;
        o.gramian_perturbation = gramian_perturbation;
        std::vector<SuiteResult> results;
        {
          py::gil_scoped_release release;
          results = run_selftest(o);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["margin"] = r.margin;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1, py::arg("gramian_perturbation") = 0.0);

  m.attr("SWEEP_HEADER") = kSweepHeader;
  m.attr("SCHEMA_VERSION") = kSchemaVersion;
}
