#pragma once

// Run configuration for the command-line front end. Configurations are JSON
// documents; all rates are in units of gamma, which is fixed to 1.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "chiral/core/errors.hpp"
#include "chiral/core/params.hpp"
#include "chiral/markov/solve.hpp"
#include "chiral/mps/time_bin.hpp"

namespace chiral::sweep {

enum class Mode { steady, evolve, mps, cavity, dark_curve, sweep };
enum class Format { csv, jsonl };
enum class Engine { markov, mps };

/// Invalid configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& msg, int line = 0)
      : std::runtime_error(format(field, msg, line)), field(field), line(line) {}

  std::string field;
  int line = 0;

 private:
  static std::string format(const std::string& field, const std::string& msg, int line) {
    std::string s;
    if (line > 0) s += "line " + std::to_string(line) + ": ";
    if (!field.empty()) s += "field '" + field + "': ";
    return s + msg;
  }
};

inline std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "steady") return Mode::steady;
  if (s == "evolve") return Mode::evolve;
  if (s == "mps") return Mode::mps;
  if (s == "cavity") return Mode::cavity;
  if (s == "dark-curve") return Mode::dark_curve;
  if (s == "sweep") return Mode::sweep;
  return std::nullopt;
}

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::steady: return "steady";
    case Mode::evolve: return "evolve";
    case Mode::mps: return "mps";
    case Mode::cavity: return "cavity";
    case Mode::dark_curve: return "dark-curve";
    case Mode::sweep: return "sweep";
  }
  return "?";
}

inline std::optional<Format> parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl" || s == "json-lines") return Format::jsonl;
  return std::nullopt;
}

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

/// Solver settings shared by all modes; each mode reads what it needs.
struct SolverSettings {
  Engine engine = Engine::markov;                   // sweep only
  markov::Integrator integrator = markov::Integrator::propagator;
  std::optional<double> dt;                         // defaults per engine
  std::optional<double> t_final;
  int sample_every = 1;
  Index fock_cutoff = 0;                            // 0: choose from Omega
  Index d_max = 64;
  double svd_tol = 1e-8;
  bool stop_when_steady = false;
  mps::Purification purification = mps::Purification::automatic;
  Index n_max = 3;                                  // cavity photon cutoff
  int dark_points = 201;                            // dark-curve resolution
};

struct RunConfig {
  Mode mode = Mode::steady;
  SystemParams params;
  std::vector<GridAxis> grid;
  SolverSettings solver;
  std::string output_path;  // empty: stdout
  Format format = Format::csv;
};

/// Parameter names accepted in "params" and as grid axes. "delta" sets both
/// detunings equal.
inline const std::vector<std::string>& param_names() {
  static const std::vector<std::string> names{
      "omega", "gamma_prime", "delta", "delta1", "delta2", "dphi", "phi_prime",
      "tau",   "eta",         "g",     "kappa",  "kappa_prime"};
  return names;
}

inline void set_param(SystemParams& p, const std::string& name, double v) {
  if (name == "omega") p.omega = v;
  else if (name == "gamma_prime") p.gamma_prime = v;
  else if (name == "delta") p.delta1 = p.delta2 = v;
  else if (name == "delta1") p.delta1 = v;
  else if (name == "delta2") p.delta2 = v;
  else if (name == "dphi") p.dphi = v;
  else if (name == "phi_prime") p.phi_prime = v;
  else if (name == "tau") p.tau = v;
  else if (name == "eta") p.eta = v;
  else if (name == "g") p.g = v;
  else if (name == "kappa") p.kappa = v;
  else if (name == "kappa_prime") p.kappa_prime = v;
  else throw ConfigError(name, "unknown parameter");
}

/// Evenly spaced values including both ends.
inline std::vector<double> linspace(double start, double stop, int points) {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    v[static_cast<std::size_t>(i)] =
        points == 1 ? start : start + (stop - start) * i / (points - 1);
  }
  return v;
}

namespace detail {

using json = nlohmann::json;

/// Line of the first occurrence of "key" in the source text, 0 if absent.
inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

struct Reader {
  const std::string& text;

  [[noreturn]] void fail(const std::string& path, const std::string& key,
                         const std::string& msg) const {
    throw ConfigError(path, msg, line_of_key(text, key));
  }

  void only(const json& obj, const std::string& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) fail(path + "." + it.key(), it.key(), "unknown field");
    }
  }

  double number(const json& v, const std::string& path, const std::string& key) const {
    if (!v.is_number()) fail(path, key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, key, "must be finite");
    return x;
  }

  long integer(const json& v, const std::string& path, const std::string& key) const {
    if (!v.is_number_integer()) fail(path, key, "expected an integer");
    return v.get<long>();
  }

  std::string string(const json& v, const std::string& path, const std::string& key) const {
    if (!v.is_string()) fail(path, key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& v, const std::string& path, const std::string& key) const {
    if (!v.is_boolean()) fail(path, key, "expected true or false");
    return v.get<bool>();
  }
};

}  // namespace detail

/// Parses and validates a configuration document. Throws ConfigError.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError("", std::string("JSON syntax error: ") + e.what(), line);
  }
  const detail::Reader rd{text};
  rd.only(doc, "", {"mode", "params", "grid", "solver", "output"});

  RunConfig cfg;
  if (!doc.contains("mode")) throw ConfigError("mode", "missing");
  const std::string mode = rd.string(doc["mode"], "mode", "mode");
  const auto m = parse_mode(mode);
  if (!m) rd.fail("mode", "mode", "unknown mode '" + mode + "'");
  cfg.mode = *m;

  if (doc.contains("params")) {
    const json& p = doc["params"];
    std::set<std::string> allowed(param_names().begin(), param_names().end());
    allowed.insert("gamma");
    rd.only(p, "params", allowed);
    for (auto it = p.begin(); it != p.end(); ++it) {
      const double v = rd.number(it.value(), "params." + it.key(), it.key());
      if (it.key() == "gamma") {
        if (v != 1.0) rd.fail("params.gamma", "gamma", "gamma is the unit of rates and must be 1");
        continue;
      }
      set_param(cfg.params, it.key(), v);
    }
  }
  try {
    cfg.params.validate();
  } catch (const ParameterError& e) {
    std::string what = e.what();
    std::string field = "params";
    const auto dot = what.find('.'), colon = what.find(':');
    if (dot != std::string::npos && colon != std::string::npos && colon > dot) {
      field = "params." + what.substr(dot + 1, colon - dot - 1);
    }
    throw ConfigError(field, what, detail::line_of_key(text, field.substr(field.find('.') + 1)));
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_array()) rd.fail("grid", "grid", "expected an array of axes");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string path = "grid[" + std::to_string(i) + "]";
      rd.only(g[i], path, {"name", "start", "stop", "points", "values"});
      GridAxis axis;
      if (!g[i].contains("name")) rd.fail(path + ".name", "grid", "missing");
      axis.name = rd.string(g[i]["name"], path + ".name", "name");
      if (std::find(param_names().begin(), param_names().end(), axis.name) == param_names().end()) {
        rd.fail(path + ".name", axis.name, "'" + axis.name + "' is not a parameter name");
      }
      if (!seen.insert(axis.name).second) rd.fail(path + ".name", axis.name, "duplicate axis");
      if (g[i].contains("values")) {
        if (g[i].contains("start") || g[i].contains("stop") || g[i].contains("points")) {
          rd.fail(path, "values", "give either values or start/stop/points");
        }
        const json& vs = g[i]["values"];
        if (!vs.is_array()) rd.fail(path + ".values", "values", "expected an array");
        for (const auto& v : vs) axis.values.push_back(rd.number(v, path + ".values", "values"));
      } else {
        for (const char* k : {"start", "stop", "points"}) {
          if (!g[i].contains(k)) rd.fail(path + "." + k, axis.name, "missing");
        }
        const double a = rd.number(g[i]["start"], path + ".start", "start");
        const double b = rd.number(g[i]["stop"], path + ".stop", "stop");
        const long n = rd.integer(g[i]["points"], path + ".points", "points");
        if (n < 2 || n > 1000000) rd.fail(path + ".points", "points", "must lie in [2, 1e6]");
        axis.values = linspace(a, b, static_cast<int>(n));
      }
      if (axis.values.empty()) rd.fail(path + ".values", "values", "empty axis");
      for (double v : axis.values) {
        SystemParams probe = cfg.params;
        set_param(probe, axis.name, v);
        try {
          probe.validate();
        } catch (const ParameterError& e) {
          rd.fail(path, axis.name, std::string("grid value out of range: ") + e.what());
        }
      }
      cfg.grid.push_back(std::move(axis));
    }
  }
  if (cfg.mode == Mode::sweep) {
    if (cfg.grid.empty()) throw ConfigError("grid", "mode sweep needs at least one grid axis");
    for (const auto& a : cfg.grid) {
      if (a.values.size() < 2) {
        throw ConfigError("grid", "sweep axis '" + a.name + "' needs at least 2 points",
                          detail::line_of_key(text, a.name));
      }
    }
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    rd.only(s, "solver",
            {"engine", "integrator", "dt", "t_final", "sample_every", "fock_cutoff", "d_max",
             "svd_tol", "stop_when_steady", "purification", "n_max", "dark_points"});
    SolverSettings& o = cfg.solver;
    auto pos = [&](const char* k) {
      const double v = rd.number(s[k], std::string("solver.") + k, k);
      if (!(v > 0.0)) rd.fail(std::string("solver.") + k, k, "must be > 0");
      return v;
    };
    if (s.contains("engine")) {
      const std::string e = rd.string(s["engine"], "solver.engine", "engine");
      if (e == "markov") o.engine = Engine::markov;
      else if (e == "mps") o.engine = Engine::mps;
      else rd.fail("solver.engine", "engine", "expected 'markov' or 'mps'");
    }
    if (s.contains("integrator")) {
      const std::string e = rd.string(s["integrator"], "solver.integrator", "integrator");
      if (e == "propagator") o.integrator = markov::Integrator::propagator;
      else if (e == "rk4") o.integrator = markov::Integrator::rk4;
      else rd.fail("solver.integrator", "integrator", "expected 'propagator' or 'rk4'");
    }
    if (s.contains("purification")) {
      const std::string e = rd.string(s["purification"], "solver.purification", "purification");
      if (e == "auto") o.purification = mps::Purification::automatic;
      else if (e == "environment") o.purification = mps::Purification::environment_bond;
      else if (e == "local") o.purification = mps::Purification::local;
      else rd.fail("solver.purification", "purification", "expected 'auto', 'environment' or 'local'");
    }
    if (s.contains("dt")) o.dt = pos("dt");
    if (s.contains("t_final")) o.t_final = pos("t_final");
    if (s.contains("svd_tol")) {
      o.svd_tol = rd.number(s["svd_tol"], "solver.svd_tol", "svd_tol");
      if (!(o.svd_tol >= 0.0 && o.svd_tol < 1.0)) rd.fail("solver.svd_tol", "svd_tol", "must lie in [0, 1)");
    }
    auto count = [&](const char* k, long lo) {
      const long v = rd.integer(s[k], std::string("solver.") + k, k);
      if (v < lo) rd.fail(std::string("solver.") + k, k, "must be >= " + std::to_string(lo));
      return v;
    };
    if (s.contains("sample_every")) o.sample_every = static_cast<int>(count("sample_every", 1));
    if (s.contains("fock_cutoff")) o.fock_cutoff = count("fock_cutoff", 1);
    if (s.contains("d_max")) o.d_max = count("d_max", 1);
    if (s.contains("n_max")) o.n_max = count("n_max", 1);
    if (s.contains("dark_points")) o.dark_points = static_cast<int>(count("dark_points", 2));
    if (s.contains("stop_when_steady")) {
      o.stop_when_steady = rd.boolean(s["stop_when_steady"], "solver.stop_when_steady", "stop_when_steady");
    }
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    rd.only(o, "output", {"path", "format"});
    if (o.contains("path")) cfg.output_path = rd.string(o["path"], "output.path", "path");
    if (o.contains("format")) {
      const std::string f = rd.string(o["format"], "output.format", "format");
      const auto fmt = parse_format(f);
      if (!fmt) rd.fail("output.format", "format", "expected 'csv' or 'jsonl'");
      cfg.format = *fmt;
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

/// Every grid point in row-major order (first axis slowest), as parameter
/// sets derived from cfg.params. Without a grid: the single base point.
inline std::vector<SystemParams> grid_points(const RunConfig& cfg) {
  std::vector<SystemParams> pts{cfg.params};
  for (const auto& axis : cfg.grid) {
    std::vector<SystemParams> next;
    next.reserve(pts.size() * axis.values.size());
    for (const auto& p : pts) {
      for (double v : axis.values) {
        SystemParams q = p;
        set_param(q, axis.name, v);
        next.push_back(q);
      }
    }
    pts = std::move(next);
  }
  return pts;
}

}  // namespace chiral::sweep
