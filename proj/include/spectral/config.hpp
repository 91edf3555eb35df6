#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value experiment description. Defaults are the member
// initializers; render_config() emits every key so that
// parse_config(render_config(c)) == c.
struct ExperimentConfig {
  std::string mode = "linear";  // linear | coupled | scf-1d | cross-validate
  int dim = 1;
  std::vector<double> extent = {1.0};
  std::vector<int> points = {199};

  std::string potential = "zero";  // zero | harmonic | square_well | custom
  std::vector<double> potential_center = {0.5};
  double potential_stiffness = 100.0;
  double potential_depth = -50.0;
  std::vector<double> potential_well_lo = {0.25};
  std::vector<double> potential_well_hi = {0.75};
  std::string potential_file;  // samples for potential = custom

  std::string rho_scheme = "geometric";  // geometric | power | boltzmann | explicit
  int rho_count = 4;
  double rho_ratio = 0.5;     // geometric
  double rho_exponent = 4.0;  // power
  double rho_beta = 1.0;      // boltzmann
  std::vector<double> rho_values;  // explicit

  int max_iterations = 50000;
  double gradient_tolerance = 1e-8;
  std::string line_search = "armijo";  // armijo | fixed
  double armijo_c1 = 1e-4;
  double armijo_backtrack = 0.5;
  double fixed_step = 1e-3;
  int reorthonormalize_every = 50;
  std::uint64_t seed = 0;
  int restarts = 3;
  double poisson_tolerance = 1e-10;
  double degeneracy_tolerance = 1e-12;

  int theta_steps = 5;
  double damping = 0.5;
  double scf_tolerance = 1e-10;
  int scf_max_stage_iterations = 1000;

  std::string output_json;
  std::string output_csv;
  std::string output_history_csv;
  std::string output_potential_csv;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode", "dim", "extent", "points",
      "potential", "potential_center", "potential_stiffness", "potential_depth",
      "potential_well_lo", "potential_well_hi", "potential_file",
      "rho_scheme", "rho_count", "rho_ratio", "rho_exponent", "rho_beta", "rho_values",
      "max_iterations", "gradient_tolerance", "line_search", "armijo_c1", "armijo_backtrack",
      "fixed_step", "reorthonormalize_every", "seed", "restarts", "poisson_tolerance",
      "degeneracy_tolerance",
      "theta_steps", "damping", "scf_tolerance", "scf_max_stage_iterations",
      "output_json", "output_csv", "output_history_csv", "output_potential_csv"};
  return keys;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline std::vector<std::string> split_ws(const std::string& v) {
  std::vector<std::string> parts;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) parts.push_back(tok);
  return parts;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& tok : split_ws(v)) out.push_back(parse_double(key, tok));
  return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& tok : split_ws(v)) out.push_back(static_cast<int>(parse_int(key, tok)));
  return out;
}

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_double_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += fmt_double(xs[i]);
  }
  return out;
}

inline std::string fmt_int_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(xs[i]);
  }
  return out;
}

inline void check_enum(const std::string& key, const std::string& v,
                       std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  std::string opts;
  for (const char* a : allowed) {
    if (!opts.empty()) opts += ", ";
    opts += a;
  }
  throw ConfigError("config: key '" + key + "' must be one of {" + opts + "}, got '" + v + "'");
}

}  // namespace detail

// Semantic validation shared by parse and the runner. Names the offending key
// and the violated constraint.
inline void validate_config(const ExperimentConfig& c) {
  using detail::check_enum;
  check_enum("mode", c.mode, {"linear", "coupled", "scf-1d", "cross-validate"});
  if (c.dim < 1 || c.dim > 3)
    throw ConfigError("config: key 'dim' must lie in {1,2,3}, got " + std::to_string(c.dim));
  if (static_cast<int>(c.extent.size()) != c.dim)
    throw ConfigError("config: key 'extent' needs exactly dim = " + std::to_string(c.dim) +
                      " entries");
  if (static_cast<int>(c.points.size()) != c.dim)
    throw ConfigError("config: key 'points' needs exactly dim = " + std::to_string(c.dim) +
                      " entries");
  for (double e : c.extent)
    if (!(e > 0.0)) throw ConfigError("config: key 'extent' entries must be positive");
  for (int p : c.points)
    if (p < 3) throw ConfigError("config: key 'points' entries must be at least 3");

  check_enum("potential", c.potential, {"zero", "harmonic", "square_well", "custom"});
  if (c.potential == "harmonic" && static_cast<int>(c.potential_center.size()) != c.dim)
    throw ConfigError("config: key 'potential_center' needs exactly dim entries");
  if (c.potential == "square_well") {
    if (static_cast<int>(c.potential_well_lo.size()) != c.dim ||
        static_cast<int>(c.potential_well_hi.size()) != c.dim)
      throw ConfigError("config: keys 'potential_well_lo'/'potential_well_hi' need dim entries");
  }
  if (c.potential == "custom" && c.potential_file.empty())
    throw ConfigError("config: potential = custom requires key 'potential_file'");

  check_enum("rho_scheme", c.rho_scheme, {"geometric", "power", "boltzmann", "explicit"});
  if (c.rho_scheme != "explicit" && c.rho_count < 1)
    throw ConfigError("config: key 'rho_count' must be at least 1");
  if (c.rho_scheme == "power" && !(c.rho_exponent > 1.0 + 2.0 / c.dim))
    throw ConfigError("config: key 'rho_exponent' must exceed 1 + 2/dim for a summable tail");
  if (c.rho_scheme == "explicit" && c.rho_values.empty())
    throw ConfigError("config: rho_scheme = explicit requires key 'rho_values'");

  check_enum("line_search", c.line_search, {"armijo", "fixed"});
  if (c.max_iterations < 1) throw ConfigError("config: key 'max_iterations' must be at least 1");
  if (!(c.gradient_tolerance > 0.0))
    throw ConfigError("config: key 'gradient_tolerance' must be positive");
  if (!(c.armijo_c1 > 0.0) || !(c.armijo_c1 <= 0.5))
    throw ConfigError("config: key 'armijo_c1' must lie in (0, 0.5]");
  if (!(c.armijo_backtrack > 0.0) || !(c.armijo_backtrack < 1.0))
    throw ConfigError("config: key 'armijo_backtrack' must lie in (0,1)");
  if (!(c.fixed_step > 0.0)) throw ConfigError("config: key 'fixed_step' must be positive");
  if (c.reorthonormalize_every < 1)
    throw ConfigError("config: key 'reorthonormalize_every' must be at least 1");
  if (c.restarts < 1) throw ConfigError("config: key 'restarts' must be at least 1");
  if (!(c.poisson_tolerance > 0.0))
    throw ConfigError("config: key 'poisson_tolerance' must be positive");
  if (!(c.degeneracy_tolerance >= 0.0))
    throw ConfigError("config: key 'degeneracy_tolerance' must be non-negative");

  if (c.theta_steps < 1) throw ConfigError("config: key 'theta_steps' must be at least 1");
  if (!(c.damping > 0.0) || !(c.damping <= 1.0))
    throw ConfigError("config: key 'damping' must lie in (0,1]");
  if (!(c.scf_tolerance > 0.0)) throw ConfigError("config: key 'scf_tolerance' must be positive");
  if (c.scf_max_stage_iterations < 1)
    throw ConfigError("config: key 'scf_max_stage_iterations' must be at least 1");

  if ((c.mode == "scf-1d" || c.mode == "cross-validate") && c.dim != 1)
    throw ConfigError("config: mode '" + c.mode + "' requires dim = 1");
  if (!c.output_potential_csv.empty() && c.mode == "linear")
    throw ConfigError("config: key 'output_potential_csv' has no field to write in linear mode");
}

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));

    const auto& keys = detail::config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      int best_dist = 4;
      std::string best;
      for (const auto& k : keys) {
        const int d = detail::edit_distance(key, k);
        if (d < best_dist) {
          best_dist = d;
          best = k;
        }
      }
      std::string msg = "config line " + std::to_string(lineno) + ": unknown key '" + key + "'";
      if (!best.empty()) msg += " (did you mean '" + best + "'?)";
      throw ConfigError(msg);
    }
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");

    using detail::parse_double;
    using detail::parse_double_list;
    using detail::parse_int;
    using detail::parse_int_list;

    if (key == "mode") c.mode = val;
    else if (key == "dim") c.dim = static_cast<int>(parse_int(key, val));
    else if (key == "extent") c.extent = parse_double_list(key, val);
    else if (key == "points") c.points = parse_int_list(key, val);
    else if (key == "potential") c.potential = val;
    else if (key == "potential_center") c.potential_center = parse_double_list(key, val);
    else if (key == "potential_stiffness") c.potential_stiffness = parse_double(key, val);
    else if (key == "potential_depth") c.potential_depth = parse_double(key, val);
    else if (key == "potential_well_lo") c.potential_well_lo = parse_double_list(key, val);
    else if (key == "potential_well_hi") c.potential_well_hi = parse_double_list(key, val);
    else if (key == "potential_file") c.potential_file = val;
    else if (key == "rho_scheme") c.rho_scheme = val;
    else if (key == "rho_count") c.rho_count = static_cast<int>(parse_int(key, val));
    else if (key == "rho_ratio") c.rho_ratio = parse_double(key, val);
    else if (key == "rho_exponent") c.rho_exponent = parse_double(key, val);
    else if (key == "rho_beta") c.rho_beta = parse_double(key, val);
    else if (key == "rho_values") c.rho_values = parse_double_list(key, val);
    else if (key == "max_iterations") c.max_iterations = static_cast<int>(parse_int(key, val));
    else if (key == "gradient_tolerance") c.gradient_tolerance = parse_double(key, val);
    else if (key == "line_search") c.line_search = val;
    else if (key == "armijo_c1") c.armijo_c1 = parse_double(key, val);
    else if (key == "armijo_backtrack") c.armijo_backtrack = parse_double(key, val);
    else if (key == "fixed_step") c.fixed_step = parse_double(key, val);
    else if (key == "reorthonormalize_every")
      c.reorthonormalize_every = static_cast<int>(parse_int(key, val));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, val));
    else if (key == "restarts") c.restarts = static_cast<int>(parse_int(key, val));
    else if (key == "poisson_tolerance") c.poisson_tolerance = parse_double(key, val);
    else if (key == "degeneracy_tolerance") c.degeneracy_tolerance = parse_double(key, val);
    else if (key == "theta_steps") c.theta_steps = static_cast<int>(parse_int(key, val));
    else if (key == "damping") c.damping = parse_double(key, val);
    else if (key == "scf_tolerance") c.scf_tolerance = parse_double(key, val);
    else if (key == "scf_max_stage_iterations")
      c.scf_max_stage_iterations = static_cast<int>(parse_int(key, val));
    else if (key == "output_json") c.output_json = val;
    else if (key == "output_csv") c.output_csv = val;
    else if (key == "output_history_csv") c.output_history_csv = val;
    else if (key == "output_potential_csv") c.output_potential_csv = val;
  }
  validate_config(c);
  return c;
}

inline std::string render_config(const ExperimentConfig& c) {
  using detail::fmt_double;
  using detail::fmt_double_list;
  using detail::fmt_int_list;
  std::string out;
  const auto put = [&](const std::string& key, const std::string& val) {
    out += key;
    out += " = ";
    out += val;
    out += '\n';
  };
  put("mode", c.mode);
  put("dim", std::to_string(c.dim));
  put("extent", fmt_double_list(c.extent));
  put("points", fmt_int_list(c.points));
  put("potential", c.potential);
  put("potential_center", fmt_double_list(c.potential_center));
  put("potential_stiffness", fmt_double(c.potential_stiffness));
  put("potential_depth", fmt_double(c.potential_depth));
  put("potential_well_lo", fmt_double_list(c.potential_well_lo));
  put("potential_well_hi", fmt_double_list(c.potential_well_hi));
  put("potential_file", c.potential_file);
  put("rho_scheme", c.rho_scheme);
  put("rho_count", std::to_string(c.rho_count));
  put("rho_ratio", fmt_double(c.rho_ratio));
  put("rho_exponent", fmt_double(c.rho_exponent));
  put("rho_beta", fmt_double(c.rho_beta));
  put("rho_values", fmt_double_list(c.rho_values));
  put("max_iterations", std::to_string(c.max_iterations));
  put("gradient_tolerance", fmt_double(c.gradient_tolerance));
  put("line_search", c.line_search);
  put("armijo_c1", fmt_double(c.armijo_c1));
  put("armijo_backtrack", fmt_double(c.armijo_backtrack));
  put("fixed_step", fmt_double(c.fixed_step));
  put("reorthonormalize_every", std::to_string(c.reorthonormalize_every));
  put("seed", std::to_string(c.seed));
  put("restarts", std::to_string(c.restarts));
  put("poisson_tolerance", fmt_double(c.poisson_tolerance));
  put("degeneracy_tolerance", fmt_double(c.degeneracy_tolerance));
  put("theta_steps", std::to_string(c.theta_steps));
  put("damping", fmt_double(c.damping));
  put("scf_tolerance", fmt_double(c.scf_tolerance));
  put("scf_max_stage_iterations", std::to_string(c.scf_max_stage_iterations));
  put("output_json", c.output_json);
  put("output_csv", c.output_csv);
  put("output_history_csv", c.output_history_csv);
  put("output_potential_csv", c.output_potential_csv);
  return out;
}

}  // namespace spectral
