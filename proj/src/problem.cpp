#include "hvctl/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvctl {

IntervalDiffusion IntervalDiffusion::none(std::size_t modes) {
  IntervalDiffusion d;
  d.glo = [](double, double) { return 0.0; };
  d.ghi = [](double, double) { return 0.0; };
  d.alpha = [](double) { return 0.0; };
  d.shape.assign(modes, 1.0);
  return d;
}

IntervalDiffusion IntervalDiffusion::switching(std::size_t modes, double lo, double hi, double boost,
                                               double switch_level, double shape_exponent,
                                               SelectionPolicy policy) {
  if (!(lo <= hi)) throw std::invalid_argument("diffusion envelope requires lo <= hi");
  if (!(1.0 + boost >= 0.0)) throw std::invalid_argument("diffusion boost must be >= -1");
  IntervalDiffusion d;
  const double lo_hot = lo * (1.0 + boost);
  const double hi_hot = hi * (1.0 + boost);
  d.glo = [=](double, double m) {
    if (m == switch_level) return std::min(lo, lo_hot);
    return m > switch_level ? lo_hot : lo;
  };
  d.ghi = [=](double, double m) {
    if (m == switch_level) return std::max(hi, hi_hot);
    return m > switch_level ? hi_hot : hi;
  };
  if (boost != 0.0) d.switch_level = switch_level;
  const double bound = std::max(std::abs(lo), std::abs(hi)) * std::max(1.0, 1.0 + boost);
  d.alpha = [=](double) { return bound; };
  d.shape.resize(modes);
  for (std::size_t i = 0; i < modes; ++i) d.shape[i] = std::pow(static_cast<double>(i + 1), -shape_exponent);
  d.policy = policy;
  return d;
}

Interval IntervalDiffusion::envelope(double t, double mean, double tol) const {
  Interval iv{glo(t, mean), ghi(t, mean)};
  if (!(iv.lo <= iv.hi)) throw std::domain_error("diffusion envelope has glo > ghi");
  if (tol > 0.0) {
    for (double m : {mean - tol, mean + tol}) {
      iv.lo = std::min(iv.lo, glo(t, m));
      iv.hi = std::max(iv.hi, ghi(t, m));
    }
    if (std::abs(mean - switch_level) <= tol) {
      iv.lo = std::min(iv.lo, glo(t, switch_level));
      iv.hi = std::max(iv.hi, ghi(t, switch_level));
    }
  }
  return iv;
}

double IntervalDiffusion::select_level(double t, double mean) const {
  return hvctl::select(envelope(t, mean), policy);
}

DiffusionOperator IntervalDiffusion::shaped(double level) const {
  DiffusionOperator op;
  op.sigma.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) op.sigma[i] = level * shape[i];
  return op;
}

double IntervalDiffusion::zeta(double t, const QWienerSpec& wiener) const {
  const double a = alpha(t);
  double s = 0.0;
  for (std::size_t i = 0; i < shape.size(); ++i) s += shape[i] * shape[i] * wiener.mu[i];
  return a * a * s;
}

void ControlProblem::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (modes == 0) throw std::invalid_argument("modes must be positive");
  if (grid_size != 0 && grid_size < modes) throw std::invalid_argument("grid_size must be >= modes");
  if (steps == 0) throw std::invalid_argument("steps must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(fp_tol > 0.0)) throw std::invalid_argument("fp_tol must be positive");
  if (fp_max_iter == 0) throw std::invalid_argument("fp_max_iter must be positive");
  if (paths == 0) throw std::invalid_argument("paths must be positive");
  if (!(conv_constant > 0.0)) throw std::invalid_argument("conv_constant must be positive");
  if (x0.size() != modes || z.size() != modes) throw std::invalid_argument("x0 and z must have `modes` entries");
  if (!x0.all_finite() || !z.all_finite()) throw std::invalid_argument("x0 and z must be finite");
  if (wiener.modes() != modes) throw std::invalid_argument("wiener spec must have `modes` entries");
  wiener.validate();
  if (!gain.empty() && gain.size() != modes) throw std::invalid_argument("gain must be empty or have `modes` entries");
  if (diffusion.shape.size() != modes || !diffusion.glo || !diffusion.ghi || !diffusion.alpha)
    throw std::invalid_argument("diffusion is not configured for `modes` entries");
  potential.validate();
}

double ControlProblem::control_norm() const {
  if (gain.empty()) return 1.0;
  double m = 0.0;
  for (double b : gain) m = std::max(m, std::abs(b));
  return m;
}

ControlProblem ControlProblem::thermostat_default() {
  ControlProblem p;
  p.horizon = 1.0;
  p.modes = 16;
  p.steps = 256;
  p.eps = 0.1;
  p.x0 = SpectralVector(p.modes);
  p.z = SpectralVector::unit(p.modes, 0);
  p.potential = ThermostatPotential{0.25, 0.75, -0.5, 0.5};
  p.policy = SelectionPolicy::minimal_norm;
  p.wiener = QWienerSpec::power_law(p.modes);
  p.diffusion = IntervalDiffusion::switching(p.modes, 0.2, 0.4, 0.5, 0.25, 0.0, SelectionPolicy::minimal_norm);
  return p;
}

ControlProblem ControlProblem::linear_heat(std::size_t modes, std::size_t steps) {
  ControlProblem p;
  p.modes = modes;
  p.steps = steps;
  p.x0 = SpectralVector(modes);
  p.z = SpectralVector::unit(modes, 0);
  p.potential = ThermostatPotential{0.0, 0.0, 0.0, 0.0};
  p.wiener = QWienerSpec::power_law(modes);
  p.diffusion = IntervalDiffusion::none(modes);
  return p;
}

}  // namespace hvctl
