#include <gtest/gtest.h>

#include <cmath>

#include "chiral/dark/analytics.hpp"
#include "chiral/markov/model.hpp"

using namespace chiral;

namespace {

// A dark state is annihilated by the collective jump and is an eigenvector
// of the effective Hamiltonian; returns the eigenvalue.
double check_dark(const SystemParams& p, const ComplexVector& d) {
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  EXPECT_LT((m.jumps.front().op * d).norm(), 1e-12);
  const ComplexVector hd = m.hamiltonian * d;
  const cplx e = d.dot(hd);
  EXPECT_LT((hd - e * d).norm(), 1e-12);
  EXPECT_NEAR(e.imag(), 0.0, 1e-12);
  return e.real();
}

}  // namespace

TEST(Commensurate, StateIsDarkForAnyDrive) {
  for (double omega : {0.2, 1.0, 3.0}) {
    for (double delta : {0.0, 0.7, -1.3}) {
      SystemParams p;
      p.omega = omega;
      p.delta1 = delta;
      p.delta2 = -delta;
      check_dark(p, dark::v_atom_state(dark::alpha_commensurate(omega, delta, 1.0), 0.0));
    }
  }
}

TEST(Commensurate, AlphaGrowsLinearlyWithDrive) {
  const cplx a1 = dark::alpha_commensurate(1.0, 0.0, 1.0);
  const cplx a3 = dark::alpha_commensurate(3.0, 0.0, 1.0);
  EXPECT_NEAR(std::abs(a3 - 3.0 * a1), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a1), std::sqrt(2.0), 1e-15);  // sqrt2 Omega / gamma
}

TEST(DarkCurve, RabiFrequencyHandValues) {
  EXPECT_NEAR(dark::dark_rabi(kPi / 2, 0.0, 1.0).value(), 1.0, 1e-14);
  EXPECT_NEAR(dark::dark_rabi(kPi / 4, 0.0, 1.0).value(),
              1.0 / std::sqrt(1.0 + std::sqrt(0.5)), 1e-14);
  EXPECT_NEAR(dark::dark_rabi(-kPi / 2, 0.0, 1.0).value(), 1.0, 1e-14);
  // approaches the critical drive gamma/sqrt2 as dphi -> 0
  EXPECT_NEAR(dark::dark_rabi(1e-6, 0.0, 1.0).value(), 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_FALSE(dark::dark_rabi(kPi, 0.0, 1.0).has_value());
  EXPECT_THROW(dark::dark_rabi(0.0, 0.0, 1.0), RegimeError);
}

TEST(DarkCurve, PredictedStateIsDarkWithEnergyEplus) {
  for (double x : {kPi / 4, 2.0, -kPi / 2, -2.7}) {
    for (double delta : {0.0, 0.3}) {
      SystemParams p;
      p.dphi = x;
      p.delta1 = p.delta2 = delta;
      const auto omega = dark::dark_rabi(x, delta, 1.0);
      if (!omega) continue;
      p.omega = *omega;
      const dark::DarkStatePrediction d = dark::predict_dark_state(p);
      ASSERT_TRUE(d.exists);
      const double e = check_dark(p, d.state);
      EXPECT_NEAR(e, -delta + 0.5 * std::tan(0.5 * x), 1e-12);
      EXPECT_NEAR(e, d.e_plus, 1e-12);
    }
  }
}

TEST(DarkCurve, ResonantAlphaHasUnitModulus) {
  for (double x : {0.5, 1.5, -2.0}) {
    const double omega = dark::dark_rabi(x, 0.0, 1.0).value();
    const dark::DressedAlphas a = dark::dressed_alphas(omega, 0.0, x);
    EXPECT_NEAR(std::abs(a.plus), 1.0, 1e-12);
  }
}

TEST(DarkCurve, EnergiesAreOppositeAtResonance) {
  const dark::DarkEnergies e = dark::dark_energies(1.0, 0.0, 1.0);
  EXPECT_NEAR(e.e_plus, -e.e_minus, 1e-15);
  EXPECT_THROW(dark::dark_energies(0.0, 0.0, 1.0), RegimeError);
  EXPECT_THROW(dark::dark_energies(kPi, 0.0, 1.0), RegimeError);
}

TEST(DarkPhases, ThreeSolutionsAboveCriticalDrive) {
  const auto phases = dark::dark_phases(2.0, 0.0, 1.0);
  ASSERT_EQ(phases.size(), 3u);
  const double phi_d = std::acos(1.0 / 4.0 - 1.0);  // 1 + cos = gamma^2/Omega^2
  EXPECT_NEAR(phases[0], -phi_d, 1e-10);
  EXPECT_NEAR(phases[1], 0.0, 1e-12);
  EXPECT_NEAR(phases[2], phi_d, 1e-10);
  EXPECT_EQ(dark::dark_phases(0.5, 0.0, 1.0).size(), 1u);
}

TEST(PhaseLine, ShiftedByEnergySplitting) {
  const double phi_d = std::acos(-0.75);
  const double split = std::sqrt(7.0);  // tan(phi_d / 2)
  EXPECT_NEAR(dark::predicted_phase_line(phi_d, 0.0, 1.0, 0.25), phi_d + 0.25 * split, 1e-12);
  EXPECT_NEAR(dark::predicted_phase_line(phi_d, 0.0, 1.0, 0.5),
              phi_d + 0.5 * split - 2.0 * kPi, 1e-12);
  EXPECT_NEAR(dark::predicted_phase_line(-phi_d, 0.0, 1.0, 0.25), -phi_d - 0.25 * split, 1e-12);
  EXPECT_NEAR(dark::predicted_phase_line(0.0, 0.0, 1.0, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(dark::predicted_phase_line(0.0, 1.0, 1.0, 0.5), -0.5, 1e-15);
}
