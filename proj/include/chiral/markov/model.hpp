#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/core/params.hpp"

namespace chiral::markov {

struct JumpOperator {
  ComplexMatrix op;
  double rate = 0.0;
  bool guided = false;  // counts towards the waveguide emission rate
  std::string label;
};

enum class ModelKind { v_atom, dimer, cavity, generic };

/// Hamiltonian plus weighted jump operators:
///   d rho/dt = -i[H, rho] + sum_k rate_k D[J_k] rho.
struct LindbladModel {
  ComplexMatrix hamiltonian;
  std::vector<JumpOperator> jumps;
  ModelKind kind = ModelKind::generic;
  double dphi = 0.0;  // phase defining the S/T basis for observables

  [[nodiscard]] Index dim() const { return hamiltonian.rows(); }

  void validate() const {
    if (hamiltonian.rows() != hamiltonian.cols()) {
      throw DimensionError("LindbladModel: Hamiltonian must be square");
    }
    const double herm = dim() == 0 ? 0.0
                                   : (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12) {
      throw ParameterError("LindbladModel: Hamiltonian not Hermitian (deviation " +
                           std::to_string(herm) + ")");
    }
    for (const auto& j : jumps) {
      if (j.op.rows() != dim() || j.op.cols() != dim()) {
        throw DimensionError("LindbladModel: jump '" + j.label + "' has wrong shape");
      }
      if (!(j.rate >= 0.0)) {
        throw ParameterError("LindbladModel: jump '" + j.label + "' has negative rate");
      }
    }
  }
};

/// -delta1|e1><e1| - delta2|e2><e2| - (Omega/2)(sigma1 + sigma2 + h.c.)
inline ComplexMatrix drive_hamiltonian(const SystemParams& p, const AtomicOperators& ops) {
  ComplexMatrix h = ComplexMatrix::Zero(kAtomDim, kAtomDim);
  h(1, 1) = -p.delta1;
  h(2, 2) = -p.delta2;
  const ComplexMatrix drive = ops.sigma1 + ops.sigma2;
  h -= 0.5 * p.omega * (drive + drive.adjoint());
  return h;
}

/// Waveguide-mediated exchange i(gamma/2)(e^{i dphi} sigma_l^+ sigma_r - h.c.).
inline ComplexMatrix dipole_dipole_hamiltonian(const SystemParams& p,
                                               const AtomicOperators& ops) {
  const ComplexMatrix x = std::exp(kI * p.dphi) * ops.sigma_l.adjoint() * ops.sigma_r;
  return kI * (0.5 * p.gamma) * (x - x.adjoint());
}

/// Markovian V atom in front of the mirror, including non-guided loss and
/// imperfect directionality.
inline LindbladModel build_v_atom_model(const SystemParams& p) {
  p.validate();
  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  LindbladModel m;
  m.kind = ModelKind::v_atom;
  m.dphi = p.dphi;
  m.hamiltonian = drive_hamiltonian(p, ops) + dipole_dipole_hamiltonian(p, ops);
  m.jumps.push_back({ops.sigma_t, p.gamma, true, "sigma_T"});
  if (p.gamma_prime > 0.0) {
    m.jumps.push_back({ops.sigma1, p.gamma_prime, false, "sigma_1 loss"});
    m.jumps.push_back({ops.sigma2, p.gamma_prime, false, "sigma_2 loss"});
  }
  return m;
}

inline constexpr Index kDimerDim = 4;

/// Lowering operators of the dimer in the basis (|gg>, |eg>, |ge>, |ee>),
/// where the first label belongs to atom 1.
struct DimerOperators {
  ComplexMatrix sigma1;
  ComplexMatrix sigma2;
};

inline DimerOperators dimer_operators() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  const ComplexMatrix id2 = identity(2);
  // Atom 1 is the least significant factor so that |eg> sits at index 1.
  return {kron(id2, s), kron(s, id2)};
}

/// Two cascaded two-level atoms on a unidirectional waveguide.
inline LindbladModel build_dimer_model(double omega, double gamma, double delta1,
                                       double delta2, double dphi) {
  if (omega < 0.0) throw ParameterError("build_dimer_model: omega must be >= 0");
  if (gamma <= 0.0) throw ParameterError("build_dimer_model: gamma must be > 0");
  const DimerOperators ops = dimer_operators();
  const ComplexMatrix n1 = ops.sigma1.adjoint() * ops.sigma1;
  const ComplexMatrix n2 = ops.sigma2.adjoint() * ops.sigma2;
  const ComplexMatrix drive = ops.sigma1 + ops.sigma2;
  const cplx phase = std::exp(kI * dphi);
  const ComplexMatrix x = phase * ops.sigma1.adjoint() * ops.sigma2;

  LindbladModel m;
  m.kind = ModelKind::dimer;
  m.dphi = dphi;
  m.hamiltonian = -delta1 * n1 - delta2 * n2 -
                  0.5 * omega * (drive + drive.adjoint()) +
                  kI * (0.5 * gamma) * (x - x.adjoint());
  m.jumps.push_back({ops.sigma1 + phase * ops.sigma2, gamma, true, "sigma_tot"});
  return m;
}

}  // namespace chiral::markov
