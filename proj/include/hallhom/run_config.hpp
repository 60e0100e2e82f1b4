// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_RUN_CONFIG_HPP
#define HALLHOM_RUN_CONFIG_HPP

// Flat key = value run configuration. Keys are spelled like the command-line
// flags (without the leading dashes); flags override file values.
//
//   # comment
//   alpha1 = 1
//   t = 0.2, 0.1, 0.05
//   h = 0, 0, 1

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hallhom/closed_forms.hpp"
#include "hallhom/error.hpp"
#include "hallhom/krylov.hpp"

namespace hallhom
{

inline const std::vector<std::string> &subcommands()
{
  static const std::vector<std::string> names{"cell-solve", "sweep-cross", "sweep-fiber3d",
                                              "duality-check", "dykhne", "mask"};
  return names;
}

/// Keys accepted by a subcommand.
inline const std::set<std::string> &config_schema(const std::string &command)
{
  static const std::vector<std::string> common{"out",     "res",       "tol",     "max-iter",
                                               "precond", "method",    "restart", "threads",
                                               "no-timing", "seed"};
  static const std::map<std::string, std::vector<std::string>> extra{
    {"cell-solve", {"geometry", "dim", "alpha1", "beta1", "alpha2", "beta2", "h", "t", "ell", "r", "fraction", "axis", "mask"}},
    {"sweep-cross", {"alpha1", "beta1", "alpha2", "beta2", "h", "t", "ell", "fixed-beta"}},
    {"sweep-fiber3d", {"alpha1", "beta1", "alpha2", "beta2", "h", "r", "fixed-beta", "epsilon"}},
    {"duality-check", {"geometry", "alpha1", "beta1", "alpha2", "beta2", "h", "t", "ell", "fraction", "axis", "mask"}},
    {"dykhne", {"alpha1", "beta1", "alpha2", "beta2", "h", "theta"}},
    {"mask", {"geometry", "dim", "t", "ell", "r", "fraction", "axis", "mask"}},
  };
  static std::map<std::string, std::set<std::string>> cache = [] {
    std::map<std::string, std::set<std::string>> m;
    for (const auto &[cmd, keys] : extra) {
      std::set<std::string> s(common.begin(), common.end());
      s.insert(keys.begin(), keys.end());
      m[cmd] = s;
    }
    return m;
  }();
  auto it = cache.find(command);
  if (it == cache.end())
    throw ConfigError("unknown subcommand '" + command + "'");
  return it->second;
}

using KeyValues = std::map<std::string, std::string>;

/// Parses the flat format. Unknown keys are checked later against the
/// subcommand schema; duplicates and malformed lines fail here.
inline KeyValues parse_key_values(std::istream &is, const std::string &source = "config")
{
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos)
        return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

inline KeyValues read_config_file(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open config file '" + path + "'");
  return parse_key_values(is, path);
}

struct RunConfig
{
  std::string command;

  LimitPhases phases; // cell-solve / duality-check use (alpha2, beta2) unscaled as phase 2
  std::vector<double> h;

  std::string geometry;
  int dim = 2;
  bool dim_given = false; // false: a mask file decides
  double t = 0.25;
  double ell = 1.0;
  double r = 0.2;
  double fraction = 0.5;
  int axis = 0;
  std::string mask_path;

  std::vector<double> t_list;
  std::vector<double> r_list;
  std::vector<double> theta_list;
  std::vector<double> epsilon_list;
  bool fixed_beta = false;

  int resolution = 0; // 0: subcommand default
  SolverConfig solver;
  int threads = 1;
  std::string out = "hallhom_out";
  bool no_timing = false;
  std::uint64_t seed = 0; // recorded in reports; no generator is randomized

  double h2d() const { return h.at(0); }
  Vec3 h3d() const { return {h.at(0), h.at(1), h.at(2)}; }
};

namespace detail
{

inline double parse_double(const std::string &key, const std::string &s)
{
  double v = 0.0;
  const char *b = s.data(), *e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || s.empty())
    throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  if (!std::isfinite(v))
    throw ConfigError("key '" + key + "' must be finite");
  return v;
}

inline std::vector<double> parse_list(const std::string &key, const std::string &s)
{
  std::vector<double> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos)
      throw ConfigError("key '" + key + "': empty list element");
    out.push_back(parse_double(key, item.substr(b, e - b + 1)));
  }
  if (out.empty())
    throw ConfigError("key '" + key + "': empty list");
  return out;
}

inline long long parse_int(const std::string &key, const std::string &s)
{
  long long v = 0;
  const char *b = s.data(), *e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || s.empty())
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  return v;
}

inline bool parse_bool(const std::string &key, const std::string &s)
{
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

} // namespace detail

/// Validates `kv` against the schema of `command`, fills subcommand
/// defaults and checks every value before any computation starts.
inline RunConfig build_run_config(const std::string &command, const KeyValues &kv)
{
  const auto &schema = config_schema(command);
  for (const auto &[key, value] : kv)
    if (!schema.count(key))
      throw ConfigError("unknown key '" + key + "' for subcommand " + command);

  RunConfig c;
  c.command = command;
  auto has = [&](const char *k) { return kv.count(k) > 0; };
  auto get = [&](const char *k) { return kv.at(k); };
  auto num = [&](const char *k, double def) { return has(k) ? detail::parse_double(k, get(k)) : def; };
  auto list = [&](const char *k, std::vector<double> def) { return has(k) ? detail::parse_list(k, get(k)) : def; };

  // subcommand defaults
  LimitPhases ph{1.0, 0.0, 4.0, 0.0};
  std::vector<double> h_def{0.0};
  std::string geometry_def = "cross";
  if (command == "sweep-cross" || command == "dykhne") {
    ph = {1.0, 0.5, 2.0, 1.0};
    h_def = {1.0};
  } else if (command == "sweep-fiber3d") {
    ph = {1.0, 1.0, 2.0, 1.0};
    h_def = {0.0, 0.0, 1.0};
  } else if (command == "duality-check") {
    ph = {1.0, 0.5, 50.0, 25.0};
    h_def = {1.0};
    geometry_def = "cross";
  }

  c.geometry = has("geometry") ? get("geometry") : geometry_def;
  static const std::set<std::string> geometries{"constant", "laminate", "checkerboard", "cross", "fiber", "triaxial", "file"};
  if (!geometries.count(c.geometry))
    throw ConfigError("geometry must be one of constant, laminate, checkerboard, cross, fiber, triaxial, file");
  if (c.geometry == "file" && !has("mask"))
    throw ConfigError("geometry=file needs a 'mask' path");
  if (has("mask"))
    c.mask_path = get("mask");

  c.dim = 2;
  if (command == "sweep-fiber3d")
    c.dim = 3;
  if (has("dim")) {
    const auto d = detail::parse_int("dim", get("dim"));
    if (d != 2 && d != 3)
      throw ConfigError("dim must be 2 or 3");
    c.dim = static_cast<int>(d);
    c.dim_given = true;
  } else if (c.geometry == "fiber" || c.geometry == "triaxial") {
    c.dim = 3;
  }
  const bool uses_geometry = schema.count("geometry") > 0;
  if (!uses_geometry)
    c.geometry.clear();
  if ((c.geometry == "fiber" || c.geometry == "triaxial") && c.dim != 3)
    throw ConfigError("geometry=" + c.geometry + " is three-dimensional; dim must be 3");
  if ((c.geometry == "cross" || c.geometry == "checkerboard") && c.dim != 2)
    throw ConfigError("geometry=" + c.geometry + " is two-dimensional; dim must be 2");
  if (command == "duality-check" && c.dim != 2)
    throw ConfigError("duality-check is two-dimensional");

  c.phases.alpha1 = num("alpha1", ph.alpha1);
  c.phases.beta1 = num("beta1", ph.beta1);
  c.phases.alpha2 = num("alpha2", ph.alpha2);
  c.phases.beta2 = num("beta2", ph.beta2);
  try {
    c.phases.validate();
  } catch (const InvalidArgument &e) {
    throw ConfigError(e.what());
  }

  if (c.dim == 3 && h_def.size() == 1)
    h_def = {0.0, 0.0, h_def[0]};
  c.h = list("h", h_def);
  if (c.h.size() != static_cast<std::size_t>(c.dim == 3 ? 3 : 1))
    throw ConfigError("h has " + std::to_string(c.h.size()) + " component(s) but a " + std::to_string(c.dim) +
                      "D run needs " + (c.dim == 3 ? "3 (h = h1, h2, h3)" : "1 (scalar h)"));

  c.ell = num("ell", 1.0);
  if (!(c.ell >= 1.0))
    throw ConfigError("ell must be >= 1");
  c.fraction = num("fraction", 0.5);
  if (!(c.fraction > 0.0 && c.fraction < 1.0))
    throw ConfigError("fraction must lie in (0, 1)");
  if (has("axis")) {
    const auto a = detail::parse_int("axis", get("axis"));
    if (a < 0 || a >= c.dim)
      throw ConfigError("axis must lie in [0, dim)");
    c.axis = static_cast<int>(a);
  }

  if (command == "sweep-cross") {
    c.t_list = list("t", {0.2, 0.1, 0.05});
  } else if (has("t")) {
    c.t = detail::parse_double("t", get("t"));
  }
  for (double t : c.t_list.empty() ? std::vector<double>{c.t} : c.t_list)
    if (!(t > 0.0 && t <= 0.5))
      throw ConfigError("t must lie in (0, 1/2]");
  if (command == "sweep-fiber3d") {
    c.r_list = list("r", {0.25, 0.15, 0.1});
    if (has("epsilon"))
      c.epsilon_list = list("epsilon", {});
    if (!c.epsilon_list.empty() && c.epsilon_list.size() != c.r_list.size())
      throw ConfigError("epsilon needs one value per r");
  } else if (has("r")) {
    c.r = detail::parse_double("r", get("r"));
  }
  for (double r : c.r_list.empty() ? std::vector<double>{c.r} : c.r_list)
    if (!(r > 0.0 && r < 0.5))
      throw ConfigError("r must lie in (0, 1/2)");
  if (command == "dykhne") {
    c.theta_list = list("theta", {1e-2, 1e-4, 1e-6});
    for (double th : c.theta_list)
      if (!(th > 0.0))
        throw ConfigError("theta must be > 0");
  }
  for (const auto *lst : {&c.t_list, &c.r_list, &c.theta_list})
    for (std::size_t i = 1; i < lst->size(); ++i)
      if (!((*lst)[i] < (*lst)[i - 1]))
        throw ConfigError("sweep values must be strictly decreasing");
  if (has("fixed-beta"))
    c.fixed_beta = detail::parse_bool("fixed-beta", get("fixed-beta"));

  if (has("res")) {
    const auto r = detail::parse_int("res", get("res"));
    if (r < CellGeometry::kMinResolution || r > 100000)
      throw ConfigError("res must be >= " + std::to_string(CellGeometry::kMinResolution));
    c.resolution = static_cast<int>(r);
  }
  c.solver.tolerance = num("tol", c.solver.tolerance);
  if (has("max-iter")) {
    const auto m = detail::parse_int("max-iter", get("max-iter"));
    if (m < 1)
      throw ConfigError("max-iter must be >= 1");
    c.solver.max_iterations = static_cast<std::size_t>(m);
  }
  if (has("precond")) {
    const auto &p = get("precond");
    if (p == "none")
      c.solver.preconditioner = Preconditioner::None;
    else if (p == "diagonal")
      c.solver.preconditioner = Preconditioner::Diagonal;
    else
      throw ConfigError("precond must be 'none' or 'diagonal'");
  }
  if (has("method")) {
    const auto &m = get("method");
    if (m == "auto")
      c.solver.method = KrylovMethod::Auto;
    else if (m == "cg")
      c.solver.method = KrylovMethod::CG;
    else if (m == "bicgstab")
      c.solver.method = KrylovMethod::BiCGStab;
    else if (m == "gmres")
      c.solver.method = KrylovMethod::GMRES;
    else
      throw ConfigError("method must be one of auto, cg, bicgstab, gmres");
  }
  if (has("restart")) {
    const auto r = detail::parse_int("restart", get("restart"));
    if (r < 2 || r > 10000)
      throw ConfigError("restart must lie in [2, 10000]");
    c.solver.restart = static_cast<int>(r);
  }
  try {
    c.solver.validate();
  } catch (const InvalidArgument &e) {
    throw ConfigError(e.what());
  }
  if (has("threads")) {
    const auto n = detail::parse_int("threads", get("threads"));
    if (n < 1 || n > 1024)
      throw ConfigError("threads must lie in [1, 1024]");
    c.threads = static_cast<int>(n);
  }
  if (has("out")) {
    c.out = get("out");
    if (c.out.empty())
      throw ConfigError("out must not be empty");
  }
  if (has("no-timing"))
    c.no_timing = detail::parse_bool("no-timing", get("no-timing"));
  if (has("seed")) {
    const auto s = detail::parse_int("seed", get("seed"));
    if (s < 0)
      throw ConfigError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  return c;
}

/// File values first, then flag values on top.
inline RunConfig parse_config(const std::string &command, const KeyValues &file_values, const KeyValues &flag_values)
{
  KeyValues merged = file_values;
  for (const auto &[k, v] : flag_values)
    merged[k] = v;
  return build_run_config(command, merged);
}

} // namespace hallhom

#endif // HALLHOM_RUN_CONFIG_HPP
