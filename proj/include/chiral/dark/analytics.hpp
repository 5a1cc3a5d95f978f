#pragma once

// Closed-form dark-state predictors for the V atom with coherent feedback
// and for the cascaded two-atom dimer.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/core/params.hpp"

namespace chiral::dark {

/// Excited amplitude of the dark state for dphi = 0 and delta2 = -delta1.
inline cplx alpha_commensurate(double omega, double delta1, double gamma) {
  return -std::sqrt(2.0) * omega / (kI * gamma + 2.0 * delta1);
}

/// Amplitude that cancels the coupling of the dark state to |T>.
inline cplx alpha_general(double omega, double dphi, double delta1, double delta2,
                          double gamma) {
  return -(omega / std::sqrt(2.0)) * (1.0 + std::exp(kI * dphi)) /
         (kI * gamma + delta1 - delta2);
}

/// Rabi frequency that makes the dressed state |+> dark when
/// delta1 = delta2 = delta. Empty when no real solution exists or at
/// dphi = +/-pi. dphi = 0 belongs to the commensurate regime and throws.
inline std::optional<double> dark_rabi(double dphi, double delta, double gamma) {
  if (dphi == 0.0) {
    throw RegimeError("dark_rabi: dphi = 0 is the commensurate regime");
  }
  const double s = std::sin(dphi);
  const double c = std::cos(dphi);
  if (std::abs(dphi) >= kPi || 1.0 + c <= 0.0 || s == 0.0) return std::nullopt;
  const double radicand = 1.0 / (1.0 + c) - (2.0 * delta / gamma) / s;
  if (!(radicand > 0.0)) return std::nullopt;
  return gamma * std::sqrt(radicand);
}

struct DressedAlphas {
  cplx plus{0.0, 0.0};
  cplx minus{0.0, 0.0};
  bool degenerate = false;       // dphi = 0: route to the commensurate solver
  bool minus_divergent = false;  // |->  collapses onto |S>
  bool plus_divergent = false;
};

/// Amplitudes of the dressed states |+/-> = (|g> + alpha_pm |S>)/norm of
/// the coherent g-S dynamics for equal detunings.
inline DressedAlphas dressed_alphas(double omega, double delta, double dphi) {
  DressedAlphas out;
  if (dphi == 0.0) {
    out.degenerate = true;
    return out;
  }
  if (omega == 0.0) {
    out.minus_divergent = true;
    return out;
  }
  const cplx coupling = omega * (1.0 - std::exp(kI * dphi)) / std::sqrt(2.0);
  const double root = std::sqrt(delta * delta + std::norm(coupling));
  const double sgn = dphi > 0.0 ? 1.0 : -1.0;
  const double den_plus = delta + sgn * root;
  const double den_minus = delta - sgn * root;
  if (den_plus == 0.0) {
    out.plus_divergent = true;
  } else {
    out.plus = -coupling / den_plus;
  }
  if (den_minus == 0.0) {
    out.minus_divergent = true;
  } else {
    out.minus = -coupling / den_minus;
  }
  return out;
}

struct DarkEnergies {
  double e_plus = 0.0;
  double e_minus = 0.0;
  cplx j_tb{0.0, 0.0};
};

/// Energies of the dark (+) and bright (-) dressed states and the bright to
/// |T> coupling, for delta1 = delta2 = delta. (1 - cos x)/sin x is written as
/// tan(x/2).
inline DarkEnergies dark_energies(double dphi, double delta, double gamma) {
  if (dphi == 0.0 || std::abs(dphi) >= kPi) {
    throw RegimeError(
        "dark_energies: dphi must lie in (-pi, 0) or (0, pi); E+ and E- diverge "
        "as dphi -> +/-pi while J_TB stays finite");
  }
  const double t = std::tan(0.5 * dphi);
  DarkEnergies e;
  e.e_plus = -delta + 0.5 * gamma * t;
  e.e_minus = -0.5 * gamma * t;
  e.j_tb = kI * (0.5 * gamma) * std::sqrt(cplx(2.0 + delta / e.e_minus, 0.0));
  return e;
}

/// Purity-maximum line of the delayed problem: the Markovian dark phase
/// shifted by (E+ - E-) tau. At phi_d = 0 the energy difference takes its
/// limiting value -delta.
inline double predicted_phase_line(double phi_d, double delta, double gamma, double tau) {
  const double splitting = -delta + gamma * std::tan(0.5 * phi_d);
  return wrap_phase(phi_d + splitting * tau);
}

/// Normalized dimer dark state (|gg> + alpha |S12>)/sqrt(1 + |alpha|^2) in
/// the basis (|gg>, |eg>, |ge>, |ee>).
inline ComplexVector dimer_dark_state(double omega, double delta1, double gamma) {
  const cplx alpha = alpha_commensurate(omega, delta1, gamma);
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = 1.0;
  v(1) = alpha / std::sqrt(2.0);
  v(2) = -alpha / std::sqrt(2.0);
  return v / std::sqrt(1.0 + std::norm(alpha));
}

/// (|g> + alpha |S>)/sqrt(1 + |alpha|^2)
inline ComplexVector v_atom_state(cplx alpha, double dphi) {
  ComplexVector v = atom_ket(AtomLevel::g) + alpha * ket_s(dphi);
  return v / std::sqrt(1.0 + std::norm(alpha));
}

struct DarkStatePrediction {
  bool exists = false;
  cplx alpha{0.0, 0.0};
  ComplexVector state;  // normalized |D>
  double e_plus = 0.0;
  double e_minus = 0.0;
  cplx j_tb{0.0, 0.0};
  std::optional<double> omega_required;
};

/// Analytic prediction for a perfectly chiral, lossless atom. dphi = 0 uses
/// the commensurate solution (requires delta1 = -delta2); otherwise equal
/// detunings and the dark Rabi frequency are required.
inline DarkStatePrediction predict_dark_state(const SystemParams& p, double tol = 1e-9) {
  DarkStatePrediction d;
  if (p.dphi == 0.0) {
    d.alpha = alpha_commensurate(p.omega, p.delta1, p.gamma);
    d.exists = std::abs(p.delta1 + p.delta2) <= tol;
    d.omega_required = std::nullopt;
  } else {
    d.alpha = alpha_general(p.omega, p.dphi, p.delta1, p.delta2, p.gamma);
    if (std::abs(p.dphi) < kPi) {
      d.omega_required = dark_rabi(p.dphi, p.delta1, p.gamma);
      const DarkEnergies e = dark_energies(p.dphi, p.delta1, p.gamma);
      d.e_plus = e.e_plus;
      d.e_minus = e.e_minus;
      d.j_tb = e.j_tb;
    }
    d.exists = std::abs(p.delta1 - p.delta2) <= tol && d.omega_required &&
               std::abs(*d.omega_required - p.omega) <= tol * std::max(1.0, p.omega);
  }
  d.state = v_atom_state(d.alpha, p.dphi);
  return d;
}

/// All Markovian dark phases at fixed Rabi frequency and equal detunings
/// delta, ascending. dphi = 0 is included when delta = 0 (the commensurate
/// line, which then has delta1 = -delta2 as well).
inline std::vector<double> dark_phases(double omega, double delta, double gamma,
                                       int scan_points = 4096) {
  std::vector<double> roots;
  auto f = [&](double x) {
    const double r = 1.0 / (1.0 + std::cos(x)) - (2.0 * delta / gamma) / std::sin(x);
    return r - (omega / gamma) * (omega / gamma);
  };
  auto scan = [&](double lo, double hi) {
    const double h = (hi - lo) / scan_points;
    double x0 = lo + 0.5 * h;
    double f0 = f(x0);
    for (int i = 1; i < scan_points; ++i) {
      const double x1 = lo + (i + 0.5) * h;
      const double f1 = f(x1);
      if (std::isfinite(f0) && std::isfinite(f1) && (f0 == 0.0 || f0 * f1 < 0.0)) {
        double a = x0, b = x1, fa = f0;
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
          const double mid = 0.5 * (a + b);
          const double fm = f(mid);
          if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        roots.push_back(0.5 * (a + b));
      }
      x0 = x1;
      f0 = f1;
    }
  };
  scan(-kPi, 0.0);
  scan(0.0, kPi);
  if (delta == 0.0) roots.push_back(0.0);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace chiral::dark
