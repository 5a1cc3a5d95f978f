#include <gtest/gtest.h>

#include <cmath>

#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/core/parallel.hpp"
#include "chiral/core/params.hpp"

using namespace chiral;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  return x;
}

// Truncated Taylor series, adequate for small norms.
ComplexMatrix taylor_exp(const ComplexMatrix& a, int terms = 40) {
  ComplexMatrix out = identity(a.rows());
  ComplexMatrix term = identity(a.rows());
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    out += term;
  }
  return out;
}

}  // namespace

TEST(Expm, PauliRotationClosedForm) {
  for (double theta : {0.0, 0.3, 2.0, 17.5, 250.0}) {
    const ComplexMatrix u = expm(-kI * theta * pauli_x());
    ComplexMatrix expected = std::cos(theta) * identity(2) - kI * std::sin(theta) * pauli_x();
    EXPECT_LT((u - expected).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, theta)) << theta;
  }
}

TEST(Expm, MatchesTaylorSeriesForSmallRandomMatrix) {
  ComplexMatrix a = ComplexMatrix::Random(5, 5) * 0.3;
  EXPECT_LT((expm(a) - taylor_exp(a)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Expm, DiagonalAndNilpotent) {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = -40.0;
  d(1, 1) = cplx(0.0, 3.0);
  d(2, 2) = 1.5;
  const ComplexMatrix e = expm(d);
  EXPECT_NEAR(std::abs(e(0, 0) - std::exp(-40.0)), 0.0, 1e-25);
  EXPECT_NEAR(std::abs(e(1, 1) - std::exp(cplx(0.0, 3.0))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e(2, 2) - std::exp(1.5)), 0.0, 1e-13);
  ComplexMatrix n = ComplexMatrix::Zero(2, 2);
  n(0, 1) = 7.0;
  EXPECT_NEAR(std::abs(expm(n)(0, 1) - 7.0), 0.0, 1e-13);
}

TEST(Kron, DimensionsAndMixedProduct) {
  const ComplexMatrix a = ComplexMatrix::Random(2, 3);
  const ComplexMatrix b = ComplexMatrix::Random(3, 2);
  const ComplexMatrix c = ComplexMatrix::Random(3, 2);
  const ComplexMatrix d = ComplexMatrix::Random(2, 4);
  const ComplexMatrix lhs = kron(a, b) * kron(c, d);
  EXPECT_EQ(lhs.rows(), 6);
  EXPECT_LT((lhs - kron(a * c, b * d)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(PartialTrace, ProductStateFactorizes) {
  ComplexMatrix r1 = projector(ComplexVector::Random(2).normalized());
  ComplexMatrix r2 = projector(ComplexVector::Random(3).normalized());
  const ComplexMatrix rho = kron(r1, r2);
  EXPECT_LT((partial_trace(rho, {2, 3}, {0}) - r1).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((partial_trace(rho, {2, 3}, {1}) - r2).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(partial_trace(rho, {2, 2}, {0}), DimensionError);
}

TEST(DensityMeasures, PurityTraceDistanceFidelity) {
  const ComplexVector psi = atom_ket(AtomLevel::e1);
  const ComplexMatrix pure = projector(psi);
  const ComplexMatrix mixed = identity(3) / 3.0;
  EXPECT_NEAR(purity(pure), 1.0, 1e-15);
  EXPECT_NEAR(purity(mixed), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(trace_distance(pure, projector(atom_ket(AtomLevel::g))), 1.0, 1e-14);
  EXPECT_NEAR(trace_distance(pure, mixed), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(fidelity(mixed, psi), 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(check_density(mixed).ok());
  ComplexMatrix bad = mixed;
  bad(0, 0) = -0.1;
  EXPECT_FALSE(check_density(bad).ok());
}

TEST(Operators, SingletTripletBasisIsOrthonormal) {
  for (double dphi : {0.0, 0.7, -2.9}) {
    const ComplexVector s = ket_s(dphi), t = ket_t(dphi);
    EXPECT_NEAR(std::abs(s.dot(t)), 0.0, 1e-15);
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(s.dot(atom_ket(AtomLevel::g))), 0.0, 1e-15);
  }
}

TEST(Operators, CollectiveOperatorsAtPerfectChirality) {
  const double dphi = 1.1;
  const AtomicOperators ops = atomic_operators(1.0, dphi);
  const ComplexMatrix g_t = atom_ket(AtomLevel::g) * ket_t(dphi).adjoint();
  const ComplexMatrix g_s = atom_ket(AtomLevel::g) * ket_s(dphi).adjoint();
  EXPECT_LT((ops.sigma_t - std::sqrt(2.0) * g_t).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((ops.sigma_s - std::sqrt(2.0) * g_s).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Operators, DirectionalMixingPreservesTotalDecay) {
  for (double eta : {0.5, 0.8, 1.0}) {
    const AtomicOperators ops = atomic_operators(eta, 0.0);
    const ComplexMatrix total = ops.sigma_l.adjoint() * ops.sigma_l + ops.sigma_r.adjoint() * ops.sigma_r;
    const ComplexMatrix expected =
        ops.sigma1.adjoint() * ops.sigma1 + ops.sigma2.adjoint() * ops.sigma2 +
        2.0 * std::sqrt(eta * (1.0 - eta)) *
            (ops.sigma1.adjoint() * ops.sigma2 + ops.sigma2.adjoint() * ops.sigma1);
    EXPECT_LT((total - expected).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_THROW(atomic_operators(0.4, 0.0), ParameterError);
  EXPECT_THROW(atomic_operators(0.9, 0.0, 0.3), ParameterError);
}

TEST(Operators, BosonicLadder) {
  const ComplexMatrix a = annihilation(3);
  EXPECT_EQ(a.rows(), 4);
  EXPECT_NEAR(std::abs(a(1, 2) - std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_LT((a.adjoint() * a - number_operator(3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(annihilation(0), ParameterError);
}

TEST(Params, ValidationRejectsBadValues) {
  SystemParams p;
  EXPECT_NO_THROW(p.validate());
  p.eta = 0.3;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.omega = -1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.tau = -0.1;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.dphi = 4.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.gamma_prime = NAN;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Params, WrapPhase) {
  EXPECT_NEAR(wrap_phase(0.5), 0.5, 1e-15);
  EXPECT_NEAR(wrap_phase(2.0 * kPi + 0.5), 0.5, 1e-14);
  EXPECT_NEAR(wrap_phase(-2.0 * kPi - 0.5), -0.5, 1e-14);
  EXPECT_NEAR(std::abs(wrap_phase(3.0 * kPi)), kPi, 1e-14);
}

TEST(Parallel, CoversEveryIndexOnceAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw NumericalError("boom");
                            }),
               NumericalError);
}
