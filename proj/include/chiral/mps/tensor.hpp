#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"

namespace chiral::mps {

/// Three-index tensor A(l, s, r) stored column-major with the left bond
/// fastest, so that both (l*p) x r and l x (p*r) reshapes are free.
struct Tensor3 {
  Index l = 1;
  Index p = 1;
  Index r = 1;
  ComplexVector data;

  Tensor3() : data(ComplexVector::Zero(1)) {}
  Tensor3(Index l_, Index p_, Index r_)
      : l(l_), p(p_), r(r_), data(ComplexVector::Zero(l_ * p_ * r_)) {}

  cplx& operator()(Index a, Index s, Index b) { return data(a + l * (s + p * b)); }
  cplx operator()(Index a, Index s, Index b) const { return data(a + l * (s + p * b)); }

  Eigen::Map<ComplexMatrix> left_matrix() { return {data.data(), l * p, r}; }
  Eigen::Map<const ComplexMatrix> left_matrix() const { return {data.data(), l * p, r}; }
  Eigen::Map<ComplexMatrix> right_matrix() { return {data.data(), l, p * r}; }
  Eigen::Map<const ComplexMatrix> right_matrix() const { return {data.data(), l, p * r}; }

  static Tensor3 from_left_matrix(const ComplexMatrix& m, Index l, Index p) {
    Tensor3 t(l, p, m.cols());
    t.left_matrix() = m;
    return t;
  }
  static Tensor3 from_right_matrix(const ComplexMatrix& m, Index p, Index r) {
    Tensor3 t(m.rows(), p, r);
    t.right_matrix() = m;
    return t;
  }
};

/// Result of a truncated Gram eigendecomposition: `basis` holds the kept
/// orthonormal eigenvectors, `weights` the matching eigenvalues.
struct GramTruncation {
  ComplexMatrix basis;
  Eigen::VectorXd weights;
  double discarded = 0.0;  // relative discarded weight
  bool overflow = false;   // D_max forced a cut above 100 * tol
};

/// Keeps the largest eigenvalues of the Gram matrix g = M M^dagger while the
/// relative discarded weight stays at or below tol, capped at d_max.
inline GramTruncation truncate_gram(const ComplexMatrix& g, double tol, Index d_max) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(g));
  if (es.info() != Eigen::Success) throw NumericalError("Gram eigendecomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);  // ascending
  const Index n = lam.size();
  const double total = lam.sum();
  if (!(total > 0.0)) throw NumericalError("tensor split of a zero block");

  Index keep = n;
  double tail = 0.0;
  // drop from the smallest while the accumulated tail is within tolerance
  for (Index i = 0; i < n - 1; ++i) {
    if ((tail + lam(i)) / total > tol) break;
    tail += lam(i);
    --keep;
  }
  GramTruncation out;
  if (keep > d_max) {
    for (Index i = n - keep; i < n - d_max; ++i) tail += lam(i);
    keep = d_max;
    out.overflow = tail / total > 100.0 * tol;
  }
  out.discarded = tail / total;
  out.basis = es.eigenvectors().rightCols(keep).rowwise().reverse();
  out.weights = lam.tail(keep).reverse();
  return out;
}

struct SplitInfo {
  double discarded = 0.0;
  bool overflow = false;
};

/// Splits theta (rows x cols) as U * R with U left-orthonormal. The returned
/// pair holds U and R; R carries the norm.
inline std::pair<ComplexMatrix, ComplexMatrix> split_center_right(const ComplexMatrix& theta,
                                                                  double tol, Index d_max,
                                                                  SplitInfo& info) {
  const GramTruncation t = truncate_gram(theta * theta.adjoint(), tol, d_max);
  info.discarded = t.discarded;
  info.overflow = t.overflow;
  ComplexMatrix r = t.basis.adjoint() * theta;
  return {t.basis, std::move(r)};
}

/// Splits theta as L * V^dagger with V^dagger right-orthonormal. L carries
/// the norm.
inline std::pair<ComplexMatrix, ComplexMatrix> split_center_left(const ComplexMatrix& theta,
                                                                 double tol, Index d_max,
                                                                 SplitInfo& info) {
  const GramTruncation t = truncate_gram(theta.adjoint() * theta, tol, d_max);
  info.discarded = t.discarded;
  info.overflow = t.overflow;
  ComplexMatrix l = theta * t.basis;
  return {std::move(l), t.basis.adjoint()};
}

/// Replaces M (rows x cols) by X (rows x k) with X X^dagger ~ M M^dagger.
/// Used to fold an environment index that is never touched again into a
/// single compressed bond.
inline ComplexMatrix compress_environment(const ComplexMatrix& m, double tol, Index d_max,
                                          SplitInfo& info) {
  const GramTruncation t = truncate_gram(m * m.adjoint(), tol, d_max);
  info.discarded = t.discarded;
  info.overflow = t.overflow;
  return t.basis * t.weights.cwiseSqrt().asDiagonal();
}

}  // namespace chiral::mps
