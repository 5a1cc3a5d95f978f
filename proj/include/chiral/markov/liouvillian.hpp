#pragma once

#include "chiral/core/matrix.hpp"
#include "chiral/markov/model.hpp"

namespace chiral::markov {

/// Superoperator acting on column-stacked density matrices:
/// d vec(rho)/dt = superop * vec(rho).
struct Liouvillian {
  ComplexMatrix superop;
  Index dim = 0;  // Hilbert-space dimension d; superop is d^2 x d^2
};

/// Column-major vec: vec(A X B) = (B^T kron A) vec(X).
inline ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index dim) {
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

inline Liouvillian vectorize(const LindbladModel& model) {
  model.validate();
  const Index d = model.dim();
  const ComplexMatrix id = identity(d);
  Liouvillian l;
  l.dim = d;
  l.superop = -kI * (kron(id, model.hamiltonian) -
                     kron(model.hamiltonian.transpose(), id));
  for (const auto& j : model.jumps) {
    if (j.rate == 0.0) continue;
    const ComplexMatrix jdj = j.op.adjoint() * j.op;
    l.superop += j.rate * (kron(j.op.conjugate(), j.op) - 0.5 * kron(id, jdj) -
                           0.5 * kron(jdj.transpose(), id));
  }
  return l;
}

/// Right-hand side of the master equation evaluated term by term, without
/// forming the superoperator.
inline ComplexMatrix apply_lindblad(const LindbladModel& model, const ComplexMatrix& rho) {
  ComplexMatrix out = -kI * (model.hamiltonian * rho - rho * model.hamiltonian);
  for (const auto& j : model.jumps) {
    if (j.rate == 0.0) continue;
    const ComplexMatrix jr = j.op * rho;
    const ComplexMatrix jdj = j.op.adjoint() * j.op;
    out += j.rate * (jr * j.op.adjoint() - 0.5 * (jdj * rho + rho * jdj));
  }
  return out;
}

}  // namespace chiral::markov
