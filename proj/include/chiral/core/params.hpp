#pragma once

#include <cmath>
#include <string>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"

namespace chiral {

/// Physical parameters of the driven V atom, its feedback loop and the
/// optional cavity. Rates are in units of the guided coupling gamma, which
/// every builder treats as the unit scale.
struct SystemParams {
  double omega = 0.0;        // Rabi frequency (real, >= 0)
  double gamma = 1.0;        // guided coupling
  double gamma_prime = 0.0;  // loss to non-guided modes, per transition
  double delta1 = 0.0;       // laser detuning of |e1>
  double delta2 = 0.0;       // laser detuning of |e2>
  double dphi = 0.0;         // feedback minus driving phase, in [-pi, pi]
  double phi_prime = 0.0;    // relative driving phase (gauged out)
  double tau = 0.0;          // feedback delay
  double eta = 1.0;          // directionality, in [0.5, 1]
  double g = 0.0;            // atom-cavity coupling
  double kappa = 0.0;        // cavity-waveguide coupling
  double kappa_prime = 0.0;  // intra-cavity loss

  void validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
      throw ParameterError("SystemParams." + field + ": " + why);
    };
    const double fields[] = {omega, gamma, gamma_prime, delta1, delta2, dphi,
                             phi_prime, tau, eta, g, kappa, kappa_prime};
    for (double f : fields) {
      if (!std::isfinite(f)) bad("*", "non-finite value");
    }
    if (omega < 0.0) bad("omega", "must be >= 0");
    if (gamma <= 0.0) bad("gamma", "must be > 0");
    if (gamma_prime < 0.0) bad("gamma_prime", "must be >= 0");
    if (eta < 0.5 || eta > 1.0) bad("eta", "must lie in [0.5, 1]");
    if (std::abs(dphi) > kPi + 1e-12) bad("dphi", "must lie in [-pi, pi]");
    if (tau < 0.0) bad("tau", "must be >= 0");
    if (kappa < 0.0) bad("kappa", "must be >= 0");
    if (kappa_prime < 0.0) bad("kappa_prime", "must be >= 0");
  }
};

/// Wrap a phase to [-pi, pi]; exact odd multiples of pi round away from zero,
/// so +pi maps to -pi and -pi maps to +pi.
inline double wrap_phase(double phi) {
  return phi - 2.0 * kPi * std::round(phi / (2.0 * kPi));
}

/// Gauge the driving phase into the feedback phase: only the difference of
/// the bare feedback phase and the relative driving phase is physical.
inline double gauge_phase(double bare_feedback_phase, double phi_prime) {
  return wrap_phase(bare_feedback_phase - phi_prime);
}

}  // namespace chiral
