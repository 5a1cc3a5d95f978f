#pragma once

#include <cmath>

#include "chiral/core/params.hpp"
#include "chiral/dark/analytics.hpp"
#include "chiral/markov/solve.hpp"

namespace chiral::markov {

/// dt = 0.005/gamma. t_final = 50/gamma_eff with gamma_eff = 2 gamma/(1+|alpha|^2)
/// when an analytic dark amplitude exists, 200/gamma otherwise.
inline EvolveOptions default_evolve_options(const SystemParams& p) {
  EvolveOptions opt;
  opt.dt = 0.005 / p.gamma;
  opt.t_final = 200.0 / p.gamma;
  if (p.eta == 1.0) {
    const dark::DarkStatePrediction d = dark::predict_dark_state(p);
    if (d.exists) {
      const double gamma_eff = 2.0 * p.gamma / (1.0 + std::norm(d.alpha));
      opt.t_final = 50.0 / gamma_eff;
    }
  }
  return opt;
}

}  // namespace chiral::markov
