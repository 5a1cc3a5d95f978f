#include <gtest/gtest.h>

#include <cmath>

#include "chiral/dark/analytics.hpp"
#include "chiral/markov/defaults.hpp"
#include "chiral/markov/liouvillian.hpp"
#include "chiral/markov/model.hpp"
#include "chiral/markov/observables.hpp"
#include "chiral/markov/solve.hpp"

using namespace chiral;

namespace {

// Resonance fluorescence of a driven two-level atom.
markov::LindbladModel two_level(double omega, double delta, double gamma) {
  markov::LindbladModel m;
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  m.hamiltonian = -delta * s.adjoint() * s - 0.5 * omega * (s + s.adjoint());
  m.jumps.push_back({s, gamma, true, "sigma"});
  return m;
}

}  // namespace

TEST(Liouvillian, TracePreserving) {
  SystemParams p;
  p.omega = 1.3;
  p.dphi = 0.4;
  p.gamma_prime = 0.1;
  p.eta = 0.8;
  const markov::Liouvillian l = markov::vectorize(markov::build_v_atom_model(p));
  // vec(identity)^dagger L = 0 means d Tr(rho)/dt = 0
  const ComplexVector tr = markov::vec(identity(kAtomDim));
  EXPECT_LT((tr.adjoint() * l.superop).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Liouvillian, MatchesDirectApplication) {
  SystemParams p;
  p.omega = 0.7;
  p.dphi = -1.2;
  p.delta1 = 0.3;
  p.delta2 = -0.5;
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  ComplexMatrix rho = ComplexMatrix::Random(3, 3);
  rho = rho * rho.adjoint();
  rho /= rho.trace();
  const ComplexVector lhs = markov::vectorize(m).superop * markov::vec(rho);
  EXPECT_LT((lhs - markov::vec(markov::apply_lindblad(m, rho))).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SteadyState, TwoLevelResonanceFluorescence) {
  for (double omega : {0.3, 1.0, 4.0}) {
    for (double delta : {0.0, 0.8}) {
      const double gamma = 1.0;
      const ComplexMatrix rho = markov::steady_state(two_level(omega, delta, gamma)).rho;
      const double expected =
          0.25 * omega * omega / (delta * delta + 0.25 * gamma * gamma + 0.5 * omega * omega);
      EXPECT_NEAR(rho(1, 1).real(), expected, 1e-12) << omega << " " << delta;
    }
  }
}

TEST(SteadyState, CommensurateDarkStateIsPure) {
  SystemParams p;
  p.omega = 1.0;
  p.delta1 = 0.5;
  p.delta2 = -0.5;
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  const markov::SteadyState ss = markov::steady_state(m);
  const markov::Observables o = markov::observables(ss.rho, m);
  EXPECT_NEAR(o.purity, 1.0, 1e-10);
  EXPECT_NEAR(o.emission_rate, 0.0, 1e-10);
  EXPECT_NEAR(o.pop_t, 0.0, 1e-10);
  EXPECT_LT(ss.residual, 1e-10);
}

TEST(SteadyState, GenericPointIsMixedAndEmits) {
  SystemParams p;
  p.omega = 1.0;
  p.dphi = 1.0;
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  const markov::Observables o = markov::observables(markov::steady_state(m).rho, m);
  EXPECT_LT(o.purity, 0.99);
  EXPECT_GT(o.emission_rate, 1e-3);
}

TEST(SteadyState, DegenerateKernelIsReported) {
  SystemParams p;
  p.omega = 1.0;
  p.dphi = kPi / 2;
  p.eta = 0.5;
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  EXPECT_THROW(markov::steady_state(m), DegenerateSteadyStateError);
  const ComplexMatrix g = projector(atom_ket(AtomLevel::g));
  const ComplexMatrix limit = markov::asymptotic_state(markov::vectorize(m), g);
  EXPECT_TRUE(check_density(limit).ok(1e-10, 1e-10));
  markov::EvolveOptions opt;
  opt.dt = 0.05;
  opt.t_final = 400.0;
  opt.sample_every = 1000000;
  const auto traj = markov::evolve(m, g, opt);
  EXPECT_LT(trace_distance(traj.back().rho, limit), 1e-6);
}

TEST(Evolve, PropagatorAgreesWithRk4) {
  SystemParams p;
  p.omega = 2.0;
  p.dphi = 0.9;
  p.gamma_prime = 0.05;
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  const ComplexMatrix g = projector(atom_ket(AtomLevel::g));
  markov::EvolveOptions a;
  a.dt = 0.01;
  a.t_final = 5.0;
  markov::EvolveOptions b = a;
  b.integrator = markov::Integrator::rk4;
  const auto ta = markov::evolve(m, g, a);
  const auto tb = markov::evolve(m, g, b);
  ASSERT_EQ(ta.size(), tb.size());
  EXPECT_LT((ta.back().rho - tb.back().rho).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(ta.back().rho.trace().real(), 1.0, 1e-12);
}

TEST(Evolve, ReachesSteadyState) {
  SystemParams p;
  p.omega = 1.0;
  const markov::LindbladModel m = markov::build_v_atom_model(p);
  markov::EvolveOptions opt = markov::default_evolve_options(p);
  opt.t_final = 80.0;
  const auto traj = markov::evolve(m, projector(atom_ket(AtomLevel::g)), opt);
  EXPECT_LT(trace_distance(traj.back().rho, markov::steady_state(m).rho), 1e-6);
}

TEST(Dimer, CascadedPairFormsDarkState) {
  const double omega = 1.5, delta = 0.4;
  const markov::LindbladModel m = markov::build_dimer_model(omega, 1.0, delta, -delta, 0.0);
  const ComplexMatrix rho = markov::steady_state(m).rho;
  EXPECT_NEAR(purity(rho), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(rho, dark::dimer_dark_state(omega, delta, 1.0)), 1.0, 1e-10);
}

TEST(Model, RejectsInvalidParameters) {
  SystemParams p;
  p.eta = 0.2;
  EXPECT_THROW(markov::build_v_atom_model(p), ParameterError);
  EXPECT_THROW(markov::build_dimer_model(-1.0, 1.0, 0.0, 0.0, 0.0), ParameterError);
}
