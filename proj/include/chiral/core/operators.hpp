#pragma once

// Operator and state constructors for the three-level V atom, basis order
// (|g>, |e1>, |e2>), and for bosonic modes truncated at a Fock cutoff.

#include <cmath>
#include <complex>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"

namespace chiral {

inline constexpr Index kAtomDim = 3;

enum class AtomLevel : Index { g = 0, e1 = 1, e2 = 2 };

inline ComplexVector atom_ket(AtomLevel level) {
  ComplexVector v = ComplexVector::Zero(kAtomDim);
  v(static_cast<Index>(level)) = 1.0;
  return v;
}

/// |S> = (|e1> - e^{-i dphi}|e2>)/sqrt(2)
inline ComplexVector ket_s(double dphi) {
  ComplexVector v = ComplexVector::Zero(kAtomDim);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -std::exp(-kI * dphi) / std::sqrt(2.0);
  return v;
}

/// |T> = (|e1> + e^{-i dphi}|e2>)/sqrt(2)
inline ComplexVector ket_t(double dphi) {
  ComplexVector v = ComplexVector::Zero(kAtomDim);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = std::exp(-kI * dphi) / std::sqrt(2.0);
  return v;
}

/// Transition operators of the V atom. sigma_t and sigma_s are the
/// unnormalized collective operators sigma_l +/- e^{i dphi} sigma_r; at
/// eta = 1 they equal sqrt(2) |g><T| and sqrt(2) |g><S|.
struct AtomicOperators {
  ComplexMatrix sigma1;   // |g><e1|
  ComplexMatrix sigma2;   // |g><e2|
  ComplexMatrix sigma_l;  // emits towards the mirror
  ComplexMatrix sigma_r;  // emits away from the mirror
  ComplexMatrix sigma_t;
  ComplexMatrix sigma_s;
};

/// phi_prime is gauged into dphi when eta = 1; for imperfect chirality the
/// driving phase is pinned to zero and any other value is rejected.
inline AtomicOperators atomic_operators(double eta, double dphi,
                                        double phi_prime = 0.0) {
  if (!(eta >= 0.5 && eta <= 1.0)) {
    throw ParameterError("atomic_operators: eta must lie in [0.5, 1]");
  }
  if (eta < 1.0 && phi_prime != 0.0) {
    throw ParameterError(
        "atomic_operators: phi_prime must be 0 when eta < 1");
  }
  AtomicOperators ops;
  ops.sigma1 = ComplexMatrix::Zero(kAtomDim, kAtomDim);
  ops.sigma2 = ComplexMatrix::Zero(kAtomDim, kAtomDim);
  ops.sigma1(0, 1) = 1.0;
  ops.sigma2(0, 2) = 1.0;
  const double a = std::sqrt(eta);
  const double b = std::sqrt(1.0 - eta);
  ops.sigma_l = a * ops.sigma1 + b * ops.sigma2;
  ops.sigma_r = b * ops.sigma1 + a * ops.sigma2;
  const cplx phase = std::exp(kI * dphi);
  ops.sigma_t = ops.sigma_l + phase * ops.sigma_r;
  ops.sigma_s = ops.sigma_l - phase * ops.sigma_r;
  return ops;
}

/// Truncated bosonic annihilation operator on {|0>, ..., |cutoff>}.
inline ComplexMatrix annihilation(Index cutoff) {
  if (cutoff < 1) throw ParameterError("annihilation: Fock cutoff must be >= 1");
  ComplexMatrix a = ComplexMatrix::Zero(cutoff + 1, cutoff + 1);
  for (Index n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline ComplexMatrix number_operator(Index cutoff) {
  ComplexMatrix n = ComplexMatrix::Zero(cutoff + 1, cutoff + 1);
  for (Index k = 0; k <= cutoff; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

}  // namespace chiral
