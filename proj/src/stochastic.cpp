#include "hvctl/stochastic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hvctl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_key(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t mode,
                       std::uint64_t lane) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ step);
  h = splitmix64(h ^ mode);
  return splitmix64(h ^ lane);
}

// Uniform on (0, 1), never 0.
double to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t mode) {
  const double u1 = to_unit(hash_key(seed, path, step, mode, 0));
  const double u2 = to_unit(hash_key(seed, path, step, mode, 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

QWienerSpec QWienerSpec::power_law(std::size_t modes, double decay, double scale) {
  QWienerSpec spec;
  spec.mu.resize(modes);
  for (std::size_t i = 0; i < modes; ++i) spec.mu[i] = scale * std::pow(static_cast<double>(i + 1), -decay);
  return spec;
}

double QWienerSpec::trace() const {
  double s = 0.0;
  for (double m : mu) s += m;
  return s;
}

void QWienerSpec::validate() const {
  for (double m : mu)
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("Q-Wiener variances must be finite and >= 0");
}

NoisePath NoisePath::coarsen(std::size_t factor) const {
  if (factor == 0 || steps % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide the step count");
  NoisePath out = *this;
  out.steps = steps / factor;
  out.increments.assign(out.steps * modes, 0.0);
  for (std::size_t k = 0; k < steps; ++k)
    for (std::size_t n = 0; n < modes; ++n) out.increments[(k / factor) * modes + n] += increments[k * modes + n];
  return out;
}

NoisePath sample_noise_path(const QWienerSpec& spec, std::size_t steps, double horizon, std::uint64_t seed,
                            std::uint64_t path_index) {
  if (steps == 0) throw std::invalid_argument("sample_noise_path: step count must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_noise_path: horizon must be positive");
  spec.validate();
  NoisePath path;
  path.horizon = horizon;
  path.steps = steps;
  path.modes = spec.modes();
  path.seed = seed;
  path.path_index = path_index;
  path.increments.assign(steps * path.modes, 0.0);
  const double dt = path.dt();
  for (std::size_t n = 0; n < path.modes; ++n) {
    const double sd = std::sqrt(spec.mu[n] * dt);
    if (sd == 0.0) continue;
    for (std::size_t k = 0; k < steps; ++k)
      path.increments[k * path.modes + n] = sd * counter_normal(seed, path_index, k, n);
  }
  return path;
}

double DiffusionOperator::hs_norm_squared(const QWienerSpec& spec) const {
  if (spec.modes() != sigma.size()) throw std::invalid_argument("hs_norm_squared: dimension mismatch");
  double s = 0.0;
  for (std::size_t n = 0; n < sigma.size(); ++n) s += sigma[n] * sigma[n] * spec.mu[n];
  return s;
}

std::vector<SpectralVector> stochastic_convolution(std::span<const DiffusionOperator> sigma_path,
                                                   const NoisePath& noise, const EigenBasis& basis) {
  if (sigma_path.size() != noise.steps)
    throw std::invalid_argument("stochastic_convolution: diffusion path length must equal the step count");
  if (noise.modes != basis.modes()) throw std::invalid_argument("stochastic_convolution: mode mismatch");
  const std::size_t N = basis.modes();
  std::vector<double> decay(N);
  for (std::size_t n = 0; n < N; ++n) decay[n] = std::exp(basis.eigenvalue(n) * noise.dt());

  std::vector<SpectralVector> traj;
  traj.reserve(noise.steps + 1);
  traj.emplace_back(N);
  for (std::size_t k = 0; k < noise.steps; ++k) {
    if (sigma_path[k].size() != N) throw std::invalid_argument("stochastic_convolution: diffusion size mismatch");
    SpectralVector next = traj.back();
    const auto dw = noise.row(k);
    for (std::size_t n = 0; n < N; ++n) next[n] = decay[n] * (next[n] + sigma_path[k].sigma[n] * dw[n]);
    traj.push_back(std::move(next));
  }
  return traj;
}

ItoReport ito_isometry_check(const DiffusionOperator& sigma, const QWienerSpec& spec, std::size_t paths,
                             std::size_t steps, double horizon, std::uint64_t seed) {
  if (paths < 2) throw std::invalid_argument("ito_isometry_check: need at least two paths");
  if (sigma.size() != spec.modes()) throw std::invalid_argument("ito_isometry_check: dimension mismatch");
  const std::size_t N = spec.modes();
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const NoisePath noise = sample_noise_path(spec, steps, horizon, seed, p);
    double sq = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      double integral = 0.0;
      for (std::size_t k = 0; k < steps; ++k) integral += sigma.sigma[n] * noise.increments[k * N + n];
      sq += integral * integral;
    }
    // Welford
    const double delta = sq - mean;
    mean += delta / static_cast<double>(p + 1);
    m2 += delta * (sq - mean);
  }
  ItoReport r;
  r.estimate = mean;
  r.exact = horizon * sigma.hs_norm_squared(spec);
  const double var = m2 / static_cast<double>(paths - 1);
  r.std_error = std::sqrt(var / static_cast<double>(paths));
  if (r.std_error > 0.0)
    r.z_score = (r.estimate - r.exact) / r.std_error;
  else
    r.z_score = r.estimate == r.exact ? 0.0 : std::copysign(INFINITY, r.estimate - r.exact);
  return r;
}

}  // namespace hvctl
