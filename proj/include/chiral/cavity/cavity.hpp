#pragma once

// Atom coupled to a chiral two-mode cavity that leaks into the waveguide,
// its bad-cavity reduction to an effective V-atom master equation, and the
// vacuum correlation functions of the cavity modes.

#include <cmath>
#include <string>
#include <vector>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/core/params.hpp"
#include "chiral/markov/liouvillian.hpp"
#include "chiral/markov/model.hpp"
#include "chiral/markov/solve.hpp"

namespace chiral::cavity {

struct CavityConfig {
  double g = 0.0;            // atom-cavity coupling
  double kappa = 0.0;        // cavity-waveguide coupling
  double kappa_prime = 0.0;  // intra-cavity loss
  Index n_max = 3;           // Fock cutoff per mode

  void validate() const {
    if (n_max < 1) throw ParameterError("CavityConfig.n_max: must be >= 1");
    if (!(g >= 0.0)) throw ParameterError("CavityConfig.g: must be >= 0");
    if (!(kappa > 0.0)) throw ParameterError("CavityConfig.kappa: must be > 0");
    if (!(kappa_prime >= 0.0)) throw ParameterError("CavityConfig.kappa_prime: must be >= 0");
  }

  [[nodiscard]] static CavityConfig from_params(const SystemParams& p, Index n_max = 3) {
    return {p.g, p.kappa, p.kappa_prime, n_max};
  }
};

/// gamma = (2g)^2 kappa / (kappa + kappa')^2
inline double effective_coupling(const CavityConfig& c) {
  return 4.0 * c.g * c.g * c.kappa / ((c.kappa + c.kappa_prime) * (c.kappa + c.kappa_prime));
}

enum class Mode { T, S };

/// Cavity operators on the two-mode space {0..n_max}^2, first mode coupled
/// to sigma_1 and second to sigma_2. a_{T/S} = (a1 +/- e^{i dphi} a2)/sqrt(2).
struct ModeOperators {
  ComplexMatrix a1, a2, a_t, a_s;
};

inline ModeOperators mode_operators(Index n_max, double dphi) {
  const ComplexMatrix a = annihilation(n_max);
  const ComplexMatrix id = identity(n_max + 1);
  ModeOperators m;
  m.a1 = kron(a, id);
  m.a2 = kron(id, a);
  const cplx phase = std::exp(kI * dphi);
  m.a_t = (m.a1 + phase * m.a2) / std::sqrt(2.0);
  m.a_s = (m.a1 - phase * m.a2) / std::sqrt(2.0);
  return m;
}

/// Free cavity dynamics: coherent T-S exchange, 2 kappa D[a_T] and
/// kappa'(D[a1] + D[a2]). The exchange term (kappa/2)[a_S^+ a_T - a_T^+ a_S, rho]
/// is the Hamiltonian i(kappa/2)(a_S^+ a_T - a_T^+ a_S).
inline markov::LindbladModel cavity_only_model(const ModeOperators& m, double kappa,
                                               double kappa_prime) {
  markov::LindbladModel model;
  model.hamiltonian = kI * (0.5 * kappa) *
                      (m.a_s.adjoint() * m.a_t - m.a_t.adjoint() * m.a_s);
  model.jumps.push_back({m.a_t, 2.0 * kappa, true, "a_T"});
  if (kappa_prime > 0.0) {
    model.jumps.push_back({m.a1, kappa_prime, false, "a_1 loss"});
    model.jumps.push_back({m.a2, kappa_prime, false, "a_2 loss"});
  }
  return model;
}

/// Full atom + cavity model on C^3 (x) C^{n_max+1} (x) C^{n_max+1}.
inline markov::LindbladModel build_cavity_model(const SystemParams& p, const CavityConfig& c) {
  p.validate();
  c.validate();
  const Index nc = (c.n_max + 1) * (c.n_max + 1);
  const ComplexMatrix id_atom = identity(kAtomDim);
  const ComplexMatrix id_cav = identity(nc);

  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  const ComplexMatrix sigma_t = ops.sigma_t / std::sqrt(2.0);
  const ComplexMatrix sigma_s = ops.sigma_s / std::sqrt(2.0);
  const ModeOperators modes = mode_operators(c.n_max, p.dphi);
  const markov::LindbladModel cav = cavity_only_model(modes, c.kappa, c.kappa_prime);

  const ComplexMatrix coupling = kron(sigma_t.adjoint(), modes.a_t) +
                                 kron(sigma_s.adjoint(), modes.a_s);

  markov::LindbladModel model;
  model.kind = markov::ModelKind::cavity;
  model.dphi = p.dphi;
  model.hamiltonian = kron(markov::drive_hamiltonian(p, ops), id_cav) +
                      c.g * (coupling + coupling.adjoint()) +
                      kron(id_atom, cav.hamiltonian);
  for (const auto& j : cav.jumps) {
    model.jumps.push_back({kron(id_atom, j.op), j.rate, j.guided, j.label});
  }
  if (p.gamma_prime > 0.0) {
    model.jumps.push_back({kron(ops.sigma1, id_cav), p.gamma_prime, false, "sigma_1 loss"});
    model.jumps.push_back({kron(ops.sigma2, id_cav), p.gamma_prime, false, "sigma_2 loss"});
  }
  return model;
}

/// Probability that either mode sits at the Fock cutoff, from the full
/// atom + cavity density matrix.
inline double cutoff_population(const ComplexMatrix& rho_full, Index n_max) {
  const Index nf = n_max + 1;
  const std::vector<Index> dims = {kAtomDim, nf, nf};
  const std::vector<std::size_t> keep = {1, 2};
  const ComplexMatrix cav = partial_trace(rho_full, dims, keep);
  double p = 0.0;
  for (Index n1 = 0; n1 < nf; ++n1) {
    for (Index n2 = 0; n2 < nf; ++n2) {
      if (n1 == n_max || n2 == n_max) p += cav(n1 * nf + n2, n1 * nf + n2).real();
    }
  }
  return p;
}

inline constexpr double kCutoffWarning = 1e-6;

inline ComplexMatrix atom_reduced(const ComplexMatrix& rho_full, Index n_max) {
  const std::vector<Index> dims = {kAtomDim, n_max + 1, n_max + 1};
  const std::vector<std::size_t> keep = {0};
  return partial_trace(rho_full, dims, keep);
}

/// Bad-cavity effective master equation for the atom. The cavity imprints a
/// pi shift on the feedback phase, so the S/T operators are built at
/// dphi + pi; the guided rate is the effective coupling and the cavity loss
/// adds gamma kappa'/kappa to the non-guided decay.
inline markov::LindbladModel adiabatic_model(const SystemParams& p, const CavityConfig& c) {
  p.validate();
  c.validate();
  const double gamma = effective_coupling(c);
  const double dphi_eff = wrap_phase(p.dphi + kPi);
  const AtomicOperators ops = atomic_operators(p.eta, dphi_eff);
  const ComplexMatrix sigma_t = ops.sigma_t / std::sqrt(2.0);
  const ComplexMatrix sigma_s = ops.sigma_s / std::sqrt(2.0);

  markov::LindbladModel model;
  model.kind = markov::ModelKind::v_atom;
  model.dphi = dphi_eff;
  const ComplexMatrix exchange =
      sigma_s.adjoint() * sigma_t - sigma_t.adjoint() * sigma_s;
  model.hamiltonian = markov::drive_hamiltonian(p, ops) + kI * (0.5 * gamma) * exchange;
  model.jumps.push_back({sigma_t, 2.0 * gamma, true, "sigma_T"});
  const double loss = p.gamma_prime + gamma * c.kappa_prime / c.kappa;
  if (loss > 0.0) {
    model.jumps.push_back({ops.sigma1, loss, false, "sigma_1 loss"});
    model.jumps.push_back({ops.sigma2, loss, false, "sigma_2 loss"});
  }
  return model;
}

/// gamma'_tot / gamma of the reduced model.
inline double loss_ratio(const SystemParams& p, const CavityConfig& c) {
  return p.gamma_prime / effective_coupling(c) + c.kappa_prime / c.kappa;
}

/// Vacuum correlation <0| a_i(t) a_k^+(0) |0> of the free cavity.
inline cplx cavity_correlation(Mode i, Mode k, double t, double kappa, double kappa_prime) {
  if (t < 0.0) throw ParameterError("cavity_correlation: t must be >= 0");
  const double envelope = std::exp(-0.5 * (kappa + kappa_prime) * t);
  const double x = 0.5 * kappa * t;
  if (i == Mode::T && k == Mode::T) return envelope * (1.0 - x);
  if (i == Mode::S && k == Mode::S) return envelope * (1.0 + x);
  if (i == Mode::T && k == Mode::S) return -x * envelope;
  return x * envelope;
}

/// Same correlation through the quantum regression theorem:
/// Tr(a_i exp(L_cav t)(a_k^+ |0><0|)), propagated on the vectorized Liouvillian.
inline cplx regression_correlation(Mode i, Mode k, double t, double kappa,
                                   double kappa_prime, Index n_max = 2, double dphi = 0.0) {
  if (t < 0.0) throw ParameterError("regression_correlation: t must be >= 0");
  const ModeOperators m = mode_operators(n_max, dphi);
  const markov::Liouvillian l = markov::vectorize(cavity_only_model(m, kappa, kappa_prime));
  const Index nc = m.a1.rows();
  ComplexMatrix vac = ComplexMatrix::Zero(nc, nc);
  vac(0, 0) = 1.0;
  const ComplexMatrix& ak = (k == Mode::T) ? m.a_t : m.a_s;
  const ComplexMatrix& ai = (i == Mode::T) ? m.a_t : m.a_s;
  const ComplexVector evolved = expm(l.superop * t) * markov::vec(ak.adjoint() * vac);
  return (ai * markov::unvec(evolved, nc)).trace();
}

struct AdiabaticReport {
  double trace_distance = 0.0;      // atomic steady states, full vs reduced
  double gamma_eff_fit = 0.0;       // from full-model decay of |e1>
  double gamma_eff_predicted = 0.0; // (2g)^2 kappa/(kappa+kappa')^2
  double cutoff_population = 0.0;
  ComplexMatrix rho_full_atom;
  ComplexMatrix rho_reduced;
  std::vector<std::string> warnings;
};

/// Decay rate of |e1> in the full model with the drive switched off, from a
/// least-squares fit of log P_e1(t) on t in [10/kappa, max(3/gamma_eff, 30/kappa)]. With
/// no drive the dynamics stays in the single-excitation sector, so a Fock
/// cutoff of one is exact.
inline double fit_decay_rate(const SystemParams& p, const CavityConfig& c) {
  SystemParams q = p;
  q.omega = 0.0;
  CavityConfig c1 = c;
  c1.n_max = 1;
  const markov::LindbladModel model = build_cavity_model(q, c1);
  const Index d = model.dim();
  ComplexMatrix rho0 = ComplexMatrix::Zero(d, d);
  const Index e1_vac = 1 * (c1.n_max + 1) * (c1.n_max + 1);
  rho0(e1_vac, e1_vac) = 1.0;

  const double gamma = effective_coupling(c);
  const double rate_scale = c.kappa + c.kappa_prime + gamma + p.gamma_prime;
  markov::EvolveOptions opt;
  opt.integrator = markov::Integrator::propagator;
  opt.dt = 0.05 / rate_scale;
  const double t0 = 10.0 / (c.kappa + c.kappa_prime);
  opt.t_final = std::max(3.0 / gamma, 3.0 * t0);
  const auto traj = markov::evolve(model, rho0, opt);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& pt : traj) {
    if (pt.t < t0) continue;
    const double pop = pt.rho(e1_vac, e1_vac).real();
    if (!(pop > 0.0)) continue;
    const double y = std::log(pop);
    sx += pt.t;
    sy += y;
    sxx += pt.t * pt.t;
    sxy += pt.t * y;
    ++n;
  }
  if (n < 3) throw NumericalError("fit_decay_rate: too few samples in fit window");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

inline AdiabaticReport verify_adiabatic_limit(const SystemParams& p, const CavityConfig& c) {
  AdiabaticReport r;
  r.gamma_eff_predicted = effective_coupling(c);
  if (c.g / c.kappa > 0.2) {
    r.warnings.push_back("g/kappa = " + std::to_string(c.g / c.kappa) +
                         " exceeds 0.2; adiabatic elimination is not justified");
  }
  const markov::LindbladModel full = build_cavity_model(p, c);
  const ComplexMatrix rho_full = markov::steady_state(full).rho;
  r.cutoff_population = cutoff_population(rho_full, c.n_max);
  if (r.cutoff_population > kCutoffWarning) {
    r.warnings.push_back("population at Fock cutoff " + std::to_string(r.cutoff_population) +
                         " exceeds 1e-6; increase n_max");
  }
  r.rho_full_atom = atom_reduced(rho_full, c.n_max);
  r.rho_reduced = markov::steady_state(adiabatic_model(p, c)).rho;
  r.trace_distance = trace_distance(r.rho_full_atom, r.rho_reduced);
  if (c.g > 0.0) r.gamma_eff_fit = fit_decay_rate(p, c);
  return r;
}

}  // namespace chiral::cavity
