#include "chpar/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace chpar {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &v) {
  errno = 0;
  char *end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

long long to_integer(const std::string &key, const std::string &v) {
  errno = 0;
  char *end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return i;
}

int to_int(const std::string &key, const std::string &v) {
  const long long i = to_integer(key, v);
  if (i < -1000000000LL || i > 1000000000LL)
    throw ConfigError(key + ": value out of range: " + v);
  return static_cast<int>(i);
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on")
    return true;
  if (v == "0" || v == "false" || v == "no" || v == "off")
    return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &)>;

const std::vector<std::pair<std::string, Setter>> &setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"algorithm",
       [](RunConfig &c, const std::string &k, const std::string &v) {
         auto a = parse_variant(v);
         if (!a)
           throw ConfigError(k + ": unknown algorithm '" + v +
                             "' (expected pa1, pa2, pa3, npa1, npa2)");
         c.algorithm = a;
       }},
      {"dim", [](RunConfig &c, const std::string &k, const std::string &v) { c.dim = to_int(k, v); }},
      {"T", [](RunConfig &c, const std::string &k, const std::string &v) { c.T = to_double(k, v); }},
      {"N", [](RunConfig &c, const std::string &k, const std::string &v) { c.N = to_int(k, v); }},
      {"J", [](RunConfig &c, const std::string &k, const std::string &v) { c.J = to_int(k, v); }},
      {"h-den", [](RunConfig &c, const std::string &k, const std::string &v) { c.h_den = to_int(k, v); }},
      {"eps", [](RunConfig &c, const std::string &k, const std::string &v) { c.eps = to_double(k, v); }},
      {"tol", [](RunConfig &c, const std::string &k, const std::string &v) { c.tol = to_double(k, v); }},
      {"max-iter",
       [](RunConfig &c, const std::string &k, const std::string &v) {
         if (v == "auto")
           c.max_iter.reset();
         else
           c.max_iter = to_int(k, v);
       }},
      {"init",
       [](RunConfig &c, const std::string &k, const std::string &v) {
         if (v == "random")
           c.init = InitKind::SeededRandom;
         else if (v == "sine")
           c.init = InitKind::SmoothSine;
         else
           throw ConfigError(k + ": expected 'random' or 'sine', got '" + v + "'");
       }},
      {"seed",
       [](RunConfig &c, const std::string &k, const std::string &v) {
         const long long s = to_integer(k, v);
         if (s < 0)
           throw ConfigError(k + ": seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"amplitude", [](RunConfig &c, const std::string &k, const std::string &v) { c.amplitude = to_double(k, v); }},
      {"fine",
       [](RunConfig &c, const std::string &k, const std::string &v) {
         if (v == "direct")
           c.fine = FineSolver::Direct;
         else if (v == "nn" || v == "neumann-neumann")
           c.fine = FineSolver::NeumannNeumann;
         else
           throw ConfigError(k + ": expected 'direct' or 'nn', got '" + v + "'");
       }},
      {"nn-sub", [](RunConfig &c, const std::string &k, const std::string &v) { c.nn_sub = to_int(k, v); }},
      {"theta", [](RunConfig &c, const std::string &k, const std::string &v) { c.theta = to_double(k, v); }},
      {"nn-tol", [](RunConfig &c, const std::string &k, const std::string &v) { c.nn_tol = to_double(k, v); }},
      {"nn-max-iter", [](RunConfig &c, const std::string &k, const std::string &v) { c.nn_max_iter = to_int(k, v); }},
      {"nn-warm-start", [](RunConfig &c, const std::string &k, const std::string &v) { c.nn_warm_start = to_bool(k, v); }},
      {"workers", [](RunConfig &c, const std::string &k, const std::string &v) { c.workers = to_int(k, v); }},
      {"j-downscale", [](RunConfig &c, const std::string &k, const std::string &v) { c.j_downscale = to_int(k, v); }},
      {"preset", [](RunConfig &c, const std::string &, const std::string &v) { c.preset = v; }},
      {"output", [](RunConfig &c, const std::string &, const std::string &v) { c.output = v; }},
  };
  return table;
}

} // namespace

const std::vector<std::string> &config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto &[name, fn] : setters())
      k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig &cfg, const std::string &key, const std::string &value) {
  for (const auto &[name, fn] : setters()) {
    if (name == key) {
      fn(cfg, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> to_settings(const RunConfig &c) {
  return {
      {"algorithm", c.algorithm ? to_string(*c.algorithm) : std::string{}},
      {"dim", std::to_string(c.dim)},
      {"T", format_double(c.T)},
      {"N", std::to_string(c.N)},
      {"J", std::to_string(c.J)},
      {"h-den", std::to_string(c.h_den)},
      {"eps", format_double(c.eps)},
      {"tol", format_double(c.tol)},
      {"max-iter", c.max_iter ? std::to_string(*c.max_iter) : std::string("auto")},
      {"init", c.init == InitKind::SeededRandom ? "random" : "sine"},
      {"seed", std::to_string(c.seed)},
      {"amplitude", format_double(c.amplitude)},
      {"fine", c.fine == FineSolver::Direct ? "direct" : "nn"},
      {"nn-sub", std::to_string(c.nn_sub)},
      {"theta", format_double(c.theta)},
      {"nn-tol", format_double(c.nn_tol)},
      {"nn-max-iter", std::to_string(c.nn_max_iter)},
      {"nn-warm-start", c.nn_warm_start ? "true" : "false"},
      {"workers", std::to_string(c.workers)},
      {"j-downscale", std::to_string(c.j_downscale)},
      {"preset", c.preset},
      {"output", c.output},
  };
}

std::optional<NNParams> RunConfig::nn_params() const {
  if (fine != FineSolver::NeumannNeumann)
    return std::nullopt;
  NNParams p;
  p.subdomains = nn_sub;
  p.theta = theta;
  p.tol = nn_tol;
  p.max_iter = nn_max_iter;
  p.warm_start = nn_warm_start;
  return p;
}

void RunConfig::validate() const {
  if (!algorithm)
    throw ConfigError("algorithm: missing (expected pa1, pa2, pa3, npa1, npa2)");
  if (dim != 1 && dim != 2)
    throw ConfigError("dim: must be 1 or 2, got " + std::to_string(dim));
  if (!(T > 0.0))
    throw ConfigError("T: must be positive");
  if (N < 1)
    throw ConfigError("N: must be at least 1");
  if (J < 1)
    throw ConfigError("J: must be at least 1");
  if (h_den < 3)
    throw ConfigError("h-den: must be at least 3 (grid needs 4 nodes per axis)");
  if (!(eps > 0.0))
    throw ConfigError("eps: must be positive");
  if (!(tol > 0.0))
    throw ConfigError("tol: must be positive");
  if (max_iter && *max_iter < 0)
    throw ConfigError("max-iter: must be non-negative");
  if (!(amplitude >= 0.0))
    throw ConfigError("amplitude: must be non-negative");
  if (workers < 1)
    throw ConfigError("workers: must be at least 1");
  if (j_downscale < 1)
    throw ConfigError("j-downscale: must be at least 1");
  if (fine == FineSolver::NeumannNeumann) {
    if (dim != 1)
      throw ConfigError("fine: the Neumann-Neumann solver is available in 1D only");
    if (*algorithm != Variant::PA1)
      throw ConfigError("fine: the Neumann-Neumann solver replaces the Linear-A fine "
                        "propagator and is only available with pa1");
    if (nn_sub < 2)
      throw ConfigError("nn-sub: at least 2 subdomains required");
    if (!(theta > 0.0 && theta < 1.0))
      throw ConfigError("theta: must lie in (0, 1)");
    if (!(nn_tol > 0.0))
      throw ConfigError("nn-tol: must be positive");
    if (nn_max_iter < 1)
      throw ConfigError("nn-max-iter: must be at least 1");
  }
}

RunConfig parse_config_text(const std::string &text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    apply_setting(base, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return base;
}

RunConfig load_config_file(const std::string &path, RunConfig base) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

RunConfig parse_config(const std::vector<std::string> &args) {
  CLI::App app{"chparareal run"};
  std::string preset_name, config_path;
  app.add_option("--preset", preset_name, "start from a named preset");
  app.add_option("--config", config_path, "key=value config file");
  std::map<std::string, std::string> flags;
  for (const auto &key : config_keys()) {
    if (key != "preset")
      app.add_option("--" + key, flags[key]);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  if (!preset_name.empty())
    cfg = preset(preset_name);
  if (!config_path.empty())
    cfg = load_config_file(config_path, cfg);
  for (const auto &key : config_keys()) {
    if (key == "preset")
      continue;
    if (app.count("--" + key) > 0)
      apply_setting(cfg, key, flags[key]);
  }
  cfg.validate();
  return cfg;
}

namespace {

RunConfig baseline(Variant v, const std::string &name) {
  RunConfig c;
  c.algorithm = v;
  c.preset = name;
  return c;
}

// 2D grids use h = 1/32. Slow fine propagators get a reduced J so that a run
// stays within a few minutes on one core; j-downscale records the factor.
RunConfig planar(RunConfig c, int downscale) {
  c.dim = 2;
  c.h_den = 32;
  c.J /= downscale;
  c.j_downscale = downscale;
  return c;
}

const std::vector<std::pair<std::string, std::function<RunConfig(const std::string &)>>> &
preset_table() {
  using Entry = std::pair<std::string, std::function<RunConfig(const std::string &)>>;
  static const std::vector<Entry> table = {
      {"pa1-fig1-small-eps", [](const std::string &n) { return baseline(Variant::PA1, n); }},
      {"pa1-fig1-large-eps",
       [](const std::string &n) {
         auto c = baseline(Variant::PA1, n);
         c.eps = 0.725;
         return c;
       }},
      {"pa1-mesh-independence",
       [](const std::string &n) {
         auto c = baseline(Variant::PA1, n);
         c.h_den = 128;
         return c;
       }},
      {"pa1-long-window",
       [](const std::string &n) {
         auto c = baseline(Variant::PA1, n);
         c.N = 50;
         return c;
       }},
      {"pa2-baseline", [](const std::string &n) { return baseline(Variant::PA2, n); }},
      {"pa3-baseline", [](const std::string &n) { return baseline(Variant::PA3, n); }},
      {"npa1-baseline",
       [](const std::string &n) {
         auto c = baseline(Variant::NPA1, n);
         c.T = 20.0;
         return c;
       }},
      {"npa2-baseline",
       [](const std::string &n) {
         auto c = baseline(Variant::NPA2, n);
         c.J = 150;
         return c;
       }},
      {"npa2-bound",
       [](const std::string &n) {
         auto c = baseline(Variant::NPA2, n);
         c.T = 20.0;
         return c;
       }},
      {"pa1-nn",
       [](const std::string &n) {
         auto c = baseline(Variant::PA1, n);
         c.h_den = 128;
         c.fine = FineSolver::NeumannNeumann;
         c.nn_sub = 8;
         c.theta = 0.25;
         return c;
       }},
      {"pa1-fig1-small-eps-2d",
       [](const std::string &n) { return planar(baseline(Variant::PA1, n), 4); }},
      {"pa1-fig1-large-eps-2d",
       [](const std::string &n) {
         auto c = baseline(Variant::PA1, n);
         c.eps = 0.725;
         return planar(c, 4);
       }},
      {"pa2-baseline-2d",
       [](const std::string &n) {
         auto c = baseline(Variant::PA2, n);
         c.eps = 0.0825;
         return planar(c, 1);
       }},
      {"pa3-baseline-2d",
       [](const std::string &n) {
         auto c = baseline(Variant::PA3, n);
         c.eps = 0.0625;
         return planar(c, 1);
       }},
      {"npa1-baseline-2d",
       [](const std::string &n) { return planar(baseline(Variant::NPA1, n), 8); }},
  };
  return table;
}

} // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto &[name, fn] : preset_table())
    names.push_back(name);
  return names;
}

RunConfig preset(const std::string &name) {
  for (const auto &[n, fn] : preset_table()) {
    if (n == name)
      return fn(n);
  }
  std::string list;
  for (const auto &n : preset_names())
    list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "'; available: " + list);
}

} // namespace chpar
