#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attenua/damping.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/errors.hpp"

namespace attenua {

struct BumpSpec {
  Vec2 center;
  double width = 0.35;
  double amplitude = 1.0;
};

enum class ScenarioKind { Decay, Gcc, Cavity, Refinement };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Decay: return "decay";
    case ScenarioKind::Gcc: return "gcc";
    case ScenarioKind::Cavity: return "cavity";
    case ScenarioKind::Refinement: return "refinement";
  }
  return "unknown";
}

// Everything a run needs, parsed from an INI file. Section/key layout is
// documented in docs/config.md.
struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::Decay;

  // [geometry]
  std::vector<Disk> disks;
  double R_max = 8.5;
  double h = 1.0 / 30.0;

  // [damping]
  DampingKind damping_kind = DampingKind::RadialPlateau;
  double L = 3.0;
  double a_max = 2.0;
  double width = 1.0;
  double r_in = 0.0;
  double r_out = 0.0;
  std::optional<double> eps0;

  // [initial]
  std::vector<BumpSpec> u0_bumps;
  std::vector<BumpSpec> u1_bumps;
  int random_bumps = 0;
  double random_r_min = 1.9, random_r_max = 2.3;
  double random_w_min = 0.3, random_w_max = 0.4;
  int cascade_n = 0;
  int mode_kx = 0, mode_ky = 0;  // cavity eigenmode instead of bumps

  // [time]
  double T_final = 60.0;
  double c_safety = 0.5;
  int record_every = 1;
  long steps = 0;  // when > 0, T_final = steps * c_safety h / sqrt(2)

  // [analysis]
  int theorem = 1;
  std::optional<double> window_lo, window_hi;
  double slack = 0.4;
  double B = 2.0;
  std::optional<double> local_R;
  std::optional<double> k;
  double oracle_tolerance = 0.02;
  double drift_tolerance = 1e-4;
  double min_order = 1.7;
  int refinement_levels = 3;

  // [gcc]
  bool gcc_enabled = true;
  double gcc_T = 10.0;
  int n_pos = 24;
  int n_dir = 64;
  double dt_ray = 0.0;
  std::string omega = "profile";
  std::optional<double> gcc_radius;
  bool expect_controlled = true;

  // [run]
  std::uint64_t seed = 1;

  std::string source_text;  // the INI text this was parsed from

  Obstacle obstacle() const { return Obstacle{disks, 2}; }
  double resolved_eps0() const { return eps0.value_or(a_max / 2.0); }
  DampingProfile damping() const {
    switch (damping_kind) {
      case DampingKind::RadialPlateau: return DampingProfile::radial_plateau(L, width, a_max, resolved_eps0());
      case DampingKind::Constant: return DampingProfile::constant(a_max, resolved_eps0());
      case DampingKind::Annulus: return DampingProfile::annulus(r_in, r_out, a_max, L, resolved_eps0());
      case DampingKind::Table: break;
    }
    throw Error(ErrorKind::ConfigError, "TABLE damping cannot be described in a config file");
  }
  double multiplier_weight() const { return k.value_or(8.0 / resolved_eps0() + 1.0); }
  double effective_T_final() const {
    return steps > 0 ? static_cast<double>(steps) * c_safety * h / std::sqrt(2.0) : T_final;
  }
};

namespace detail {

// Accepts plain numbers and fractions such as "1/30".
inline double parse_number(const std::string& raw, const std::string& key) {
  std::string s = raw;
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  try {
    const auto slash = s.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    std::size_t u1 = 0, u2 = 0;
    const double a = std::stod(num, &u1), b = std::stod(den, &u2);
    if (u1 != num.size() || u2 != den.size()) throw std::invalid_argument(s);
    return a / b;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, "key '" + key + "': cannot parse number '" + raw + "'");
  }
}

inline std::vector<std::vector<double>> parse_groups(const std::string& raw, const std::string& key) {
  std::vector<std::vector<double>> groups;
  std::stringstream outer(raw);
  std::string group;
  while (std::getline(outer, group, ';')) {
    std::replace(group.begin(), group.end(), ',', ' ');
    std::stringstream inner(group);
    std::vector<double> vals;
    std::string tok;
    while (inner >> tok) vals.push_back(parse_number(tok, key));
    if (!vals.empty()) groups.push_back(std::move(vals));
  }
  return groups;
}

inline std::vector<BumpSpec> parse_bumps(const std::string& raw, const std::string& key) {
  std::vector<BumpSpec> out;
  for (const auto& g : parse_groups(raw, key)) {
    if (g.size() != 4) throw Error(ErrorKind::ConfigError, key + ": each bump needs 'cx cy width amplitude'");
    out.push_back({{g[0], g[1]}, g[2], g[3]});
  }
  return out;
}

inline std::pair<double, double> parse_pair(const std::string& raw, const std::string& key) {
  const auto g = parse_groups(raw, key);
  if (g.size() != 1 || g[0].size() != 2) throw Error(ErrorKind::ConfigError, key + ": expected two numbers");
  return {g[0][0], g[0][1]};
}

}  // namespace detail

// Checks the physical invariants of a parsed config.
inline void validate_config(const ScenarioConfig& c) {
  auto fail = [&](const std::string& m) { throw Error(ErrorKind::ConfigError, c.name + ": " + m); };
  if (c.name.empty()) fail("scenario name is empty");
  if (c.kind == ScenarioKind::Gcc) {
    if (!(c.gcc_T > 0.0)) fail("gcc.T must be positive");
    if (c.n_pos < 16 || c.n_dir < 16) fail("gcc.n_pos and gcc.n_dir must be >= 16");
  } else {
    if (!(c.h > 0.0)) fail("geometry.h must be positive");
    if (!(c.R_max > 0.0)) fail("geometry.R_max must be positive");
    if (!(c.c_safety > 0.0 && c.c_safety <= 0.9)) fail("time.c_safety must lie in (0, 0.9]");
    if (!(c.effective_T_final() > 0.0)) fail("time.T_final must be positive");
    if (c.record_every < 1) fail("time.record_every must be >= 1");
    if (c.a_max < 0.0) fail("damping.a_max must be nonnegative");
    if (c.eps0 && !(*c.eps0 >= 0.0)) fail("damping.eps0 must be nonnegative");
  }
  for (const auto& d : c.disks)
    if (!(d.radius > 0.0)) fail("obstacle radius must be positive");
  if (c.kind == ScenarioKind::Decay) {
    if (!(c.L > 0.0)) fail("damping.L must be positive");
    if (!(c.R_max > 2.0 * c.L + 2.0)) fail("R_max must exceed 2L + 2");
    if (!(c.width > 0.0) && c.damping_kind == DampingKind::RadialPlateau) fail("damping.width must be positive");
    if (!(c.resolved_eps0() > 0.0)) fail("damping.eps0 must be positive");
    if (c.theorem != 1 && c.theorem != 2) fail("analysis.theorem must be 1 or 2");
    if (c.cascade_n < 0) fail("initial.cascade_n must be >= 0");
    if (c.u0_bumps.empty() && c.u1_bumps.empty() && c.random_bumps <= 0) fail("no initial data given");
    if (!c.disks.empty()) {
      double inf_r = std::numeric_limits<double>::infinity();
      bool origin_covered = false;
      for (const auto& d : c.disks) {
        if (norm(d.center) < d.radius) origin_covered = true;
        inf_r = std::min(inf_r, d.radius - norm(d.center));
      }
      if (c.theorem == 2 && (!origin_covered || !(c.B * inf_r >= 2.0))) fail("B * inf|x| must be >= 2");
    } else if (c.theorem == 2) {
      fail("weighted data needs an obstacle containing the origin");
    }
    if (!(c.gcc_T > 0.0)) fail("gcc.T must be positive");
  }
  for (const auto* bumps : {&c.u0_bumps, &c.u1_bumps})
    for (const auto& b : *bumps)
      if (!(b.width > 0.0)) fail("bump width must be positive");
}

inline ScenarioConfig parse_config(const std::string& text, const std::string& fallback_name = "scenario") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed INI: ") + e.what());
  }

  ScenarioConfig c;
  c.source_text = text;
  auto str = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
    return std::nullopt;
  };
  auto num = [&](const std::string& key, double& out) {
    if (auto v = str(key)) out = detail::parse_number(*v, key);
  };
  auto opt_num = [&](const std::string& key, std::optional<double>& out) {
    if (auto v = str(key)) out = detail::parse_number(*v, key);
  };
  auto integer = [&](const std::string& key, auto& out) {
    if (auto v = str(key)) {
      const double d = detail::parse_number(*v, key);
      if (d != std::floor(d)) throw Error(ErrorKind::ConfigError, key + " must be an integer");
      out = static_cast<std::remove_reference_t<decltype(out)>>(d);
    }
  };
  auto boolean = [&](const std::string& key, bool& out) {
    if (auto v = str(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") out = true;
      else if (*v == "false" || *v == "0" || *v == "no") out = false;
      else throw Error(ErrorKind::ConfigError, key + " must be true or false");
    }
  };

  c.name = str("scenario.name").value_or(fallback_name);
  if (auto k = str("scenario.kind")) {
    if (*k == "decay") c.kind = ScenarioKind::Decay;
    else if (*k == "gcc") c.kind = ScenarioKind::Gcc;
    else if (*k == "cavity") c.kind = ScenarioKind::Cavity;
    else if (*k == "refinement") c.kind = ScenarioKind::Refinement;
    else throw Error(ErrorKind::ConfigError, "unknown scenario.kind '" + *k + "'");
  }

  if (auto o = str("geometry.obstacles")) {
    for (const auto& g : detail::parse_groups(*o, "geometry.obstacles")) {
      if (g.size() != 3) throw Error(ErrorKind::ConfigError, "geometry.obstacles: each disk needs 'cx cy r'");
      c.disks.push_back({{g[0], g[1]}, g[2]});
    }
  }
  num("geometry.R_max", c.R_max);
  num("geometry.h", c.h);

  if (auto k = str("damping.kind")) {
    if (*k == "RADIAL_PLATEAU") c.damping_kind = DampingKind::RadialPlateau;
    else if (*k == "CONSTANT") c.damping_kind = DampingKind::Constant;
    else if (*k == "ANNULUS") c.damping_kind = DampingKind::Annulus;
    else throw Error(ErrorKind::ConfigError, "unknown damping.kind '" + *k + "'");
  }
  num("damping.L", c.L);
  num("damping.a_max", c.a_max);
  num("damping.width", c.width);
  num("damping.r_in", c.r_in);
  num("damping.r_out", c.r_out);
  opt_num("damping.eps0", c.eps0);

  if (auto v = str("initial.u0_bumps")) c.u0_bumps = detail::parse_bumps(*v, "initial.u0_bumps");
  if (auto v = str("initial.u1_bumps")) c.u1_bumps = detail::parse_bumps(*v, "initial.u1_bumps");
  integer("initial.random_bumps", c.random_bumps);
  if (auto v = str("initial.random_radius"))
    std::tie(c.random_r_min, c.random_r_max) = detail::parse_pair(*v, "initial.random_radius");
  if (auto v = str("initial.random_width"))
    std::tie(c.random_w_min, c.random_w_max) = detail::parse_pair(*v, "initial.random_width");
  integer("initial.cascade_n", c.cascade_n);
  if (auto v = str("initial.mode")) {
    const auto [kx, ky] = detail::parse_pair(*v, "initial.mode");
    c.mode_kx = static_cast<int>(kx);
    c.mode_ky = static_cast<int>(ky);
  }

  num("time.T_final", c.T_final);
  num("time.c_safety", c.c_safety);
  integer("time.record_every", c.record_every);
  integer("time.steps", c.steps);

  integer("analysis.theorem", c.theorem);
  opt_num("analysis.window_lo", c.window_lo);
  opt_num("analysis.window_hi", c.window_hi);
  num("analysis.slack", c.slack);
  num("analysis.B", c.B);
  opt_num("analysis.local_R", c.local_R);
  opt_num("analysis.k", c.k);
  num("analysis.oracle_tolerance", c.oracle_tolerance);
  num("analysis.drift_tolerance", c.drift_tolerance);
  num("analysis.min_order", c.min_order);
  integer("analysis.refinement_levels", c.refinement_levels);

  boolean("gcc.enabled", c.gcc_enabled);
  num("gcc.T", c.gcc_T);
  integer("gcc.n_pos", c.n_pos);
  integer("gcc.n_dir", c.n_dir);
  num("gcc.dt_ray", c.dt_ray);
  if (auto v = str("gcc.omega")) c.omega = *v;
  opt_num("gcc.radius", c.gcc_radius);
  boolean("gcc.expect_controlled", c.expect_controlled);

  integer("run.seed", c.seed);

  validate_config(c);
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.stem().string());
}

// Builtin scenarios. scenarios/<name>.ini in the source tree holds the same text.
inline const std::map<std::string, std::string>& builtin_scenarios() {
  static const std::map<std::string, std::string> registry = {
      {"thm1_disk", R"([scenario]
name = thm1_disk
kind = decay

[geometry]
obstacles = 0 0 1
R_max = 8.5
h = 1/30

[damping]
kind = RADIAL_PLATEAU
L = 3
width = 1
a_max = 2
eps0 = 1

[initial]
random_bumps = 1
random_radius = 1.9 2.3
random_width = 0.3 0.4

[time]
T_final = 60
c_safety = 0.5
record_every = 10

[analysis]
theorem = 1
slack = 0.4
B = 2

[gcc]
T = 10
n_pos = 24
n_dir = 64
omega = profile

[run]
seed = 1
)"},
      {"thm2_disk", R"([scenario]
name = thm2_disk
kind = decay

[geometry]
obstacles = 0 0 1
R_max = 8.5
h = 1/30

[damping]
kind = RADIAL_PLATEAU
L = 3
width = 1
a_max = 2
eps0 = 1

[initial]
u0_bumps = -2.1 0.5 0.35 1

[time]
T_final = 60
c_safety = 0.5
record_every = 10

[analysis]
theorem = 2
slack = 0.4
B = 2

[gcc]
T = 10
n_pos = 24
n_dir = 64
omega = profile

[run]
seed = 1
)"},
      {"prop_cascade_n1", R"([scenario]
name = prop_cascade_n1
kind = decay

[geometry]
obstacles = 0 0 1
R_max = 8.5
h = 1/30

[damping]
kind = RADIAL_PLATEAU
L = 3
width = 1
a_max = 2
eps0 = 1

[initial]
u0_bumps = -2.1 0.5 0.35 1
cascade_n = 1

[time]
T_final = 60
c_safety = 0.5
record_every = 10

[analysis]
theorem = 2
slack = 0.4
B = 2

[gcc]
T = 10
n_pos = 24
n_dir = 64
omega = profile

[run]
seed = 1
)"},
      {"prop_cascade_n2", R"([scenario]
name = prop_cascade_n2
kind = decay

[geometry]
obstacles = 0 0 1
R_max = 8.5
h = 1/30

[damping]
kind = RADIAL_PLATEAU
L = 3
width = 1
a_max = 2
eps0 = 1

[initial]
u0_bumps = -2.1 0.5 0.35 1
cascade_n = 2

[time]
T_final = 60
c_safety = 0.5
record_every = 10

[analysis]
theorem = 2
slack = 0.4
B = 2

[gcc]
T = 10
n_pos = 24
n_dir = 64
omega = profile

[run]
seed = 1
)"},
      {"gcc_disk", R"([scenario]
name = gcc_disk
kind = gcc

[geometry]
obstacles = 0 0 1

[gcc]
T = 10
n_pos = 32
n_dir = 128
omega = radial 3
radius = 3
expect_controlled = true
)"},
      {"gcc_trapped", R"([scenario]
name = gcc_trapped
kind = gcc

[geometry]
obstacles = -3 0 1; 3 0 1

[gcc]
T = 20
n_pos = 33
n_dir = 64
omega = exclude_box -2 2 -0.5 0.5
radius = 3
expect_controlled = false
)"},
      {"oracle_cavity", R"([scenario]
name = oracle_cavity
kind = cavity

[geometry]
R_max = 1
h = 1/64

[damping]
kind = CONSTANT
a_max = 0

[initial]
u0_bumps = 0.1 -0.2 0.2 1

[time]
steps = 10000
c_safety = 0.5
record_every = 50

[analysis]
drift_tolerance = 1e-4
)"},
      {"refinement_suite", R"([scenario]
name = refinement_suite
kind = refinement

[geometry]
R_max = 1
h = 1/32

[damping]
kind = CONSTANT
a_max = 0.5

[initial]
mode = 1 1

[time]
T_final = 10
c_safety = 0.5
record_every = 4

[analysis]
refinement_levels = 3
oracle_tolerance = 0.02
min_order = 1.7
)"},
  };
  return registry;
}

inline std::vector<std::string> list_scenarios(const std::optional<std::filesystem::path>& user_dir = std::nullopt) {
  std::vector<std::string> names;
  for (const auto& [name, text] : builtin_scenarios()) names.push_back(name);
  if (user_dir && std::filesystem::is_directory(*user_dir)) {
    for (const auto& e : std::filesystem::directory_iterator(*user_dir))
      if (e.is_regular_file() && e.path().extension() == ".ini") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

// A path to an INI file, or the name of a builtin scenario.
inline ScenarioConfig resolve_config(const std::string& ref) {
  if (std::filesystem::exists(ref)) return load_config(ref);
  const auto& reg = builtin_scenarios();
  if (auto it = reg.find(ref); it != reg.end()) return parse_config(it->second, ref);
  throw Error(ErrorKind::ConfigError, "no config file or builtin scenario named '" + ref + "'");
}

}  // namespace attenua
