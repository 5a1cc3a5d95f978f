#pragma once

// Dense complex linear algebra shared by every engine: Kronecker products,
// the matrix exponential, partial traces and density-matrix diagnostics.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "chiral/core/errors.hpp"

namespace chiral {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Kronecker product of a list, left factor most significant.
inline ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return ComplexMatrix::Ones(1, 1);
  ComplexMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

inline double one_norm(const ComplexMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

/// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("expm: matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
  const Index n = a.rows();
  if (n == 0) return a;
  constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm = one_norm(a);
  int squarings = 0;
  if (norm > theta13) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
  }
  const ComplexMatrix s = a / std::ldexp(1.0, squarings);
  const ComplexMatrix id = identity(n);
  const ComplexMatrix s2 = s * s;
  const ComplexMatrix s4 = s2 * s2;
  const ComplexMatrix s6 = s4 * s2;

  const ComplexMatrix u_inner = s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) +
                                b[7] * s6 + b[5] * s4 + b[3] * s2 + b[1] * id;
  const ComplexMatrix u = s * u_inner;
  const ComplexMatrix v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) +
                          b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;

  ComplexMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

/// Reduced matrix over the subsystems listed in `keep` (ascending order
/// preserved). Subsystem 0 is the most significant Kronecker factor.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho,
                                   std::span<const Index> dims,
                                   std::span<const std::size_t> keep) {
  const Index total = std::accumulate(dims.begin(), dims.end(), Index{1},
                                      std::multiplies<>{});
  if (rho.rows() != total || rho.cols() != total) {
    throw DimensionError("partial_trace: subsystem dimensions multiply to " +
                         std::to_string(total) + " but matrix is " +
                         std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()));
  }
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw DimensionError("partial_trace: keep index out of range");
    kept[k] = true;
  }
  Index kept_dim = 1;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (kept[s]) kept_dim *= dims[s];
  }

  // Split a flat index into its kept and traced components.
  const std::size_t ns = dims.size();
  auto split = [&](Index flat, Index& kept_idx, Index& traced_idx) {
    std::vector<Index> digits(ns);
    for (std::size_t s = ns; s-- > 0;) {
      digits[s] = flat % dims[s];
      flat /= dims[s];
    }
    kept_idx = 0;
    traced_idx = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (kept[s]) {
        kept_idx = kept_idx * dims[s] + digits[s];
      } else {
        traced_idx = traced_idx * dims[s] + digits[s];
      }
    }
  };

  std::vector<Index> kept_of(static_cast<std::size_t>(total));
  std::vector<Index> traced_of(static_cast<std::size_t>(total));
  for (Index i = 0; i < total; ++i) {
    split(i, kept_of[static_cast<std::size_t>(i)], traced_of[static_cast<std::size_t>(i)]);
  }

  ComplexMatrix out = ComplexMatrix::Zero(kept_dim, kept_dim);
  for (Index i = 0; i < total; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (Index j = 0; j < total; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (traced_of[ui] == traced_of[uj]) out(kept_of[ui], kept_of[uj]) += rho(i, j);
    }
  }
  return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& rho,
                                   std::initializer_list<Index> dims,
                                   std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const Index>(dims.begin(), dims.size()),
                       std::span<const std::size_t>(keep.begin(), keep.size()));
}

inline double purity(const ComplexMatrix& rho) {
  // Tr(rho^2) = sum_ij rho_ij rho_ji
  return (rho.cwiseProduct(rho.transpose())).sum().real();
}

inline ComplexMatrix hermitize(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

/// Half the trace norm of the (Hermitized) difference.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(a - b),
                                                  Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// <psi| rho |psi> for a normalized state vector.
inline double fidelity(const ComplexMatrix& rho, const ComplexVector& psi) {
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

inline bool all_finite(const ComplexMatrix& a) {
  return a.allFinite();
}

struct DensityCheck {
  double hermiticity = 0.0;  // max |rho - rho^dagger|
  double trace_error = 0.0;  // |Tr rho - 1|
  double min_eigenvalue = 0.0;
  bool finite = true;

  [[nodiscard]] bool ok(double tol = 1e-12, double eig_tol = 1e-10) const {
    return finite && hermiticity <= tol && trace_error <= tol &&
           min_eigenvalue >= -eig_tol;
  }
};

inline DensityCheck check_density(const ComplexMatrix& rho) {
  DensityCheck c;
  c.finite = all_finite(rho);
  if (!c.finite || rho.rows() != rho.cols()) {
    c.finite = false;
    return c;
  }
  c.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  c.trace_error = std::abs(rho.trace() - cplx{1.0, 0.0});
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(rho),
                                                  Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

inline void require_density(const ComplexMatrix& rho, double tol, const char* what) {
  const DensityCheck c = check_density(rho);
  if (!c.ok(tol, std::max(tol, 1e-10))) {
    throw ParameterError(std::string(what) +
                         ": not a valid density matrix (hermiticity " +
                         std::to_string(c.hermiticity) + ", trace error " +
                         std::to_string(c.trace_error) + ", min eigenvalue " +
                         std::to_string(c.min_eigenvalue) + ")");
  }
}

inline ComplexMatrix projector(const ComplexVector& psi) { return psi * psi.adjoint(); }

}  // namespace chiral
