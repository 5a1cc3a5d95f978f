#pragma once

#include <cmath>
#include <limits>

#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/markov/model.hpp"

namespace chiral::markov {

struct Observables {
  double purity = 0.0;
  double pop_g = 0.0;
  double pop_s = 0.0;
  double pop_t = 0.0;
  double emission_rate = 0.0;  // guided photons per unit time
  double h_expectation = 0.0;  // Tr(H rho)
};

/// Singlet and triplet of the dimer single-excitation manifold,
/// (|eg> -/+ e^{-i dphi}|ge>)/sqrt(2).
inline ComplexVector dimer_singlet(double dphi) {
  ComplexVector v = ComplexVector::Zero(kDimerDim);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -std::exp(-kI * dphi) / std::sqrt(2.0);
  return v;
}

inline ComplexVector dimer_triplet(double dphi) {
  ComplexVector v = ComplexVector::Zero(kDimerDim);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = std::exp(-kI * dphi) / std::sqrt(2.0);
  return v;
}

/// Emission sums rate * <J^dagger J> over the guided jumps only.
inline Observables observables(const ComplexMatrix& rho, const LindbladModel& model) {
  if (rho.rows() != model.dim()) throw DimensionError("observables: rho has wrong dimension");
  Observables o;
  o.purity = purity(rho);
  o.pop_g = rho(0, 0).real();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (model.dim() == kAtomDim) {
    o.pop_s = fidelity(rho, ket_s(model.dphi));
    o.pop_t = fidelity(rho, ket_t(model.dphi));
  } else if (model.kind == ModelKind::dimer) {
    o.pop_s = fidelity(rho, dimer_singlet(model.dphi));
    o.pop_t = fidelity(rho, dimer_triplet(model.dphi));
  } else {
    o.pop_s = nan;
    o.pop_t = nan;
  }
  for (const auto& j : model.jumps) {
    if (!j.guided) continue;
    o.emission_rate += j.rate * (j.op.adjoint() * j.op * rho).trace().real();
  }
  o.h_expectation = (model.hamiltonian * rho).trace().real();
  return o;
}

}  // namespace chiral::markov
