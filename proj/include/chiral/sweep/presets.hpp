#pragma once

// Built-in run configurations producing the data behind the standard
// figures. Each preset is an ordinary JSON config, so `sim preset <name>
// --print` can be used as a starting point for custom runs.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chiral/sweep/config.hpp"

namespace chiral::sweep {

struct Preset {
  std::string name;
  std::string description;
  std::string json;
};

inline const std::vector<Preset>& figure_recipes() {
  static const std::vector<Preset> presets{
      {"fig4a", "Markov steady state over (Omega, dphi), delta = 0",
       R"({
  "mode": "sweep",
  "params": {"delta": 0.0},
  "grid": [
    {"name": "omega", "start": 0.0, "stop": 4.0, "points": 81},
    {"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 81}
  ],
  "solver": {"engine": "markov"},
  "output": {"path": "fig4a.csv"}
})"},
      {"fig4-delta1", "Markov steady state over (Omega, dphi), delta = 1",
       R"({
  "mode": "sweep",
  "params": {"delta": 1.0},
  "grid": [
    {"name": "omega", "start": 0.0, "stop": 4.0, "points": 81},
    {"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 81}
  ],
  "solver": {"engine": "markov"},
  "output": {"path": "fig4-delta1.csv"}
})"},
      {"fig5", "Time-bin MPS time series, tau = 10, Omega = 1, delta = 0, dphi = 0",
       R"({
  "mode": "mps",
  "params": {"omega": 1.0, "tau": 10.0, "dphi": 0.0},
  "solver": {"dt": 0.02, "t_final": 25.0, "fock_cutoff": 1, "d_max": 64, "sample_every": 5},
  "output": {"path": "fig5.csv"}
})"},
      {"fig6", "Time-bin MPS steady state over (tau, dphi), Omega = 2, delta = 0",
       R"({
  "mode": "sweep",
  "params": {"omega": 2.0, "delta": 0.0},
  "grid": [
    {"name": "tau", "values": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]},
    {"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 65}
  ],
  "solver": {"engine": "mps", "dt": 0.02, "t_final": 60.0},
  "output": {"path": "fig6.csv"}
})"},
      {"fig7a", "Markov steady state over (Omega, dphi) with gamma' = 0.05, delta = 0",
       R"({
  "mode": "sweep",
  "params": {"gamma_prime": 0.05, "delta": 0.0},
  "grid": [
    {"name": "omega", "start": 0.0, "stop": 4.0, "points": 81},
    {"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 81}
  ],
  "solver": {"engine": "markov"},
  "output": {"path": "fig7a.csv"}
})"},
      {"fig7c", "Markov steady state over (gamma', dphi) at Omega = 2",
       R"({
  "mode": "sweep",
  "params": {"omega": 2.0, "delta": 0.0},
  "grid": [
    {"name": "gamma_prime", "start": 0.0, "stop": 0.1, "points": 21},
    {"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 81}
  ],
  "solver": {"engine": "markov"},
  "output": {"path": "fig7c.csv"}
})"},
      {"fig8", "Markov steady state over (eta, dphi) at delta = 0, Omega = 1",
       R"({
  "mode": "sweep",
  "params": {"omega": 1.0, "delta": 0.0},
  "grid": [
    {"name": "eta", "start": 0.5, "stop": 1.0, "points": 26},
    {"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 81}
  ],
  "solver": {"engine": "markov"},
  "output": {"path": "fig8.csv"}
})"},
  };
  return presets;
}

inline std::optional<Preset> find_preset(const std::string& name) {
  for (const auto& p : figure_recipes()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace chiral::sweep
