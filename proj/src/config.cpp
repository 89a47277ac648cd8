#include "hvctl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hvctl {

std::string_view version_string() { return HVCTL_VERSION; }

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  return "config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
         std::string(expected);
}

double parse_double(std::string_view key, std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ConfigError(bad_value(key, s, "a number"));
  if (!std::isfinite(v)) throw ConfigError("config key '" + std::string(key) + "' must be finite");
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError(bad_value(key, s, "a nonnegative integer"));
  return v;
}

std::size_t parse_size(std::string_view key, std::string_view s) {
  return static_cast<std::size_t>(parse_uint(key, s));
}

bool parse_bool(std::string_view key, std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(bad_value(key, s, "a boolean"));
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view s, Parse parse) {
  std::vector<T> out;
  s = trim(s);
  if (s.empty()) return out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse(key, s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

SelectionPolicy parse_policy(std::string_view key, std::string_view s) {
  try {
    return parse_selection_policy(trim(s));
  } catch (const std::invalid_argument&) {
    throw ConfigError(bad_value(key, trim(s), "minimal_norm, lower, upper or midpoint"));
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string fmt_list(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += f(v[i]);
  }
  return s;
}

std::string fmt_doubles(const std::vector<double>& v) { return fmt_list(v, fmt); }

struct Field {
  const char* key;
  bool affects_results;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define HV_DOUBLE(name, affects)                                                              \
  Field{#name, affects, [](ExperimentConfig& c, std::string_view v) { c.name = parse_double(#name, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.name); }}
#define HV_SIZE(name, affects)                                                               \
  Field{#name, affects, [](ExperimentConfig& c, std::string_view v) { c.name = parse_size(#name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }}
#define HV_DOUBLES(name, affects)                                                                       \
  Field{#name, affects,                                                                                 \
        [](ExperimentConfig& c, std::string_view v) { c.name = parse_list<double>(#name, v, parse_double); }, \
        [](const ExperimentConfig& c) { return fmt_doubles(c.name); }}
#define HV_POLICY(name, affects)                                                               \
  Field{#name, affects, [](ExperimentConfig& c, std::string_view v) { c.name = parse_policy(#name, v); }, \
        [](const ExperimentConfig& c) { return std::string(to_string(c.name)); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      HV_DOUBLE(a, true),
      HV_SIZE(modes, true),
      HV_SIZE(grid_size, true),
      HV_SIZE(steps, true),
      HV_DOUBLE(eps, true),
      HV_DOUBLES(eps_list, true),
      HV_DOUBLES(x0, true),
      HV_DOUBLES(z, true),
      HV_DOUBLE(s1, true),
      HV_DOUBLE(s2, true),
      HV_DOUBLE(g1, true),
      HV_DOUBLE(g2, true),
      HV_POLICY(policy, true),
      HV_DOUBLE(diffusion_lo, true),
      HV_DOUBLE(diffusion_hi, true),
      HV_DOUBLE(diffusion_boost, true),
      HV_DOUBLE(diffusion_switch, true),
      HV_DOUBLE(diffusion_shape, true),
      HV_POLICY(diffusion_policy, true),
      HV_DOUBLE(wiener_decay, true),
      HV_DOUBLE(wiener_scale, true),
      HV_DOUBLES(gain, true),
      HV_DOUBLE(conv_constant, true),
      HV_DOUBLE(kink_tol, true),
      HV_SIZE(paths, true),
      Field{"seed", true, [](ExperimentConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      HV_DOUBLE(fp_tol, true),
      HV_SIZE(fp_max_iter, true),
      Field{"output_dir", false, [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
            [](const ExperimentConfig& c) { return c.output_dir; }},
      Field{"output_format", false,
            [](ExperimentConfig& c, std::string_view v) { c.output_format = std::string(trim(v)); },
            [](const ExperimentConfig& c) { return c.output_format; }},
      Field{"report_modes", true,
            [](ExperimentConfig& c, std::string_view v) {
              c.report_modes = parse_list<std::size_t>("report_modes", v, parse_size);
            },
            [](const ExperimentConfig& c) {
              return fmt_list(c.report_modes, [](std::size_t m) { return std::to_string(m); });
            }},
      HV_DOUBLE(confidence_level, true),
      HV_SIZE(workers, false),
      HV_SIZE(dump_paths, false),
      Field{"timing", false, [](ExperimentConfig& c, std::string_view v) { c.timing = parse_bool("timing", v); },
            [](const ExperimentConfig& c) { return std::string(c.timing ? "true" : "false"); }},
  };
  return table;
}

#undef HV_DOUBLE
#undef HV_SIZE
#undef HV_DOUBLES
#undef HV_POLICY

SpectralVector padded(const std::vector<double>& values, std::size_t modes) {
  SpectralVector v(modes);
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

}  // namespace

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": repeated key '" + std::string(key) + "'");
    set_config_value(config, key, line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path.string() + "'");
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(a > 0.0, "a must be positive");
  require(modes >= 1, "modes must be >= 1");
  require(grid_size == 0 || grid_size >= modes, "grid_size must be 0 or >= modes");
  require(steps >= 1, "steps must be >= 1");
  require(eps > 0.0, "eps must be positive");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    require(eps_list[i] > 0.0, "eps_list values must be positive");
    require(i == 0 || eps_list[i] < eps_list[i - 1], "eps_list must be strictly decreasing");
  }
  require(x0.size() <= modes && z.size() <= modes, "x0 and z may list at most `modes` coefficients");
  require(s1 <= s2, "s1 must not exceed s2");
  require(g1 <= 0.0 && g2 >= 0.0, "thermostat slopes require g1 <= 0 <= g2");
  require(diffusion_lo <= diffusion_hi, "diffusion_lo must not exceed diffusion_hi");
  require(diffusion_boost >= -1.0, "diffusion_boost must be >= -1");
  require(wiener_scale >= 0.0, "wiener_scale must be nonnegative");
  require(gain.size() <= 1 || gain.size() == modes, "gain must list 0, 1 or `modes` values");
  require(conv_constant > 0.0, "conv_constant must be positive");
  require(kink_tol >= 0.0, "kink_tol must be nonnegative");
  require(paths >= 1, "paths must be >= 1");
  require(fp_tol > 0.0, "fp_tol must be positive");
  require(fp_max_iter >= 1, "fp_max_iter must be >= 1");
  require(output_format == "csv" || output_format == "json", "output_format must be csv or json");
  for (std::size_t m : report_modes) require(m >= 1 && m <= modes, "report_modes must lie in 1..modes");
  require(confidence_level > 0.0 && confidence_level < 1.0, "confidence_level must lie in (0, 1)");
  require(workers >= 1, "workers must be >= 1");
}

ControlProblem ExperimentConfig::problem() const {
  validate();
  ControlProblem p;
  p.horizon = a;
  p.modes = modes;
  p.grid_size = grid_size;
  p.steps = steps;
  p.eps = eps;
  p.x0 = padded(x0, modes);
  p.z = padded(z, modes);
  p.potential = ThermostatPotential{s1, s2, g1, g2};
  p.policy = policy;
  p.diffusion = IntervalDiffusion::switching(modes, diffusion_lo, diffusion_hi, diffusion_boost, diffusion_switch,
                                             diffusion_shape, diffusion_policy);
  p.wiener = QWienerSpec::power_law(modes, wiener_decay, wiener_scale);
  if (gain.size() == 1)
    p.gain.assign(modes, gain[0]);
  else
    p.gain = gain;
  p.paths = paths;
  p.seed = seed;
  p.fp_tol = fp_tol;
  p.fp_max_iter = fp_max_iter;
  p.conv_constant = conv_constant;
  p.kink_tol = kink_tol;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  for (const Field& f : fields()) {
    if (!f.affects_results) continue;
    mix(f.key);
    mix("=");
    mix(f.get(*this));
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hvctl
