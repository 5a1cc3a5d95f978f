#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chiral/markov/model.hpp"
#include "chiral/markov/solve.hpp"
#include "chiral/mps/checkpoint.hpp"
#include "chiral/mps/run.hpp"
#include "chiral/mps/tensor.hpp"
#include "chiral/mps/time_bin.hpp"

using namespace chiral;
using namespace chiral::mps;

namespace {

TimeBinConfig config(double dt, Index m, double t_final) {
  TimeBinConfig c;
  c.dt = dt;
  c.m = m;
  c.t_final = t_final;
  return c;
}

// Undriven |e1> with a perfectly chiral coupling: the photon emitted by e1
// returns after tau and is absorbed on e2. Amplitudes solve a delay equation
// with c1 = e^{-t/2} and c2 = -(t - tau) e^{-(t - tau)/2} for gamma = 1.
double delay_oracle_error(double tau, double dt, double t_final) {
  SystemParams p;
  p.omega = 0.0;
  p.tau = tau;
  const TimeBinConfig c = config_for_delay(config(dt, 0, t_final), tau);
  RunOptions opt;
  opt.initial_state = atom_ket(AtomLevel::e1);
  const MpsRun r = run(p, c, opt);
  double err = 0.0;
  for (const auto& s : r.samples) {
    const double p1 = std::exp(-s.t);
    const double x = std::max(0.0, s.t - c.delay());
    const double p2 = x * x * std::exp(-x);
    err = std::max({err, std::abs(s.rho_atom(1, 1).real() - p1),
                    std::abs(s.rho_atom(2, 2).real() - p2)});
  }
  return err;
}

std::vector<markov::TrajectoryPoint> markov_reference(const SystemParams& p, double dt, double t_final) {
  markov::EvolveOptions o;
  o.dt = dt;
  o.t_final = t_final;
  return markov::evolve(markov::build_v_atom_model(p), projector(atom_ket(AtomLevel::g)), o);
}

}  // namespace

TEST(Tensor, GramTruncationKeepsDominantSubspace) {
  ComplexMatrix a = ComplexMatrix::Random(6, 2);
  const ComplexMatrix g = a * a.adjoint();
  const GramTruncation t = truncate_gram(g, 1e-12, 10);
  EXPECT_EQ(t.basis.cols(), 2);
  EXPECT_LT((t.basis * t.basis.adjoint() * a - a).norm(), 1e-10);
  EXPECT_FALSE(t.overflow);
  const GramTruncation capped = truncate_gram(g, 1e-12, 1);
  EXPECT_EQ(capped.basis.cols(), 1);
  EXPECT_TRUE(capped.overflow);
  EXPECT_GT(capped.discarded, 0.0);
}

TEST(StepUnitary, IsUnitaryAndMatchesFirstOrderGenerator) {
  SystemParams p;
  p.omega = 0.8;
  p.dphi = 0.6;
  p.eta = 0.9;
  const TimeBinConfig c = config(1e-4, 1, 1.0);
  const ComplexMatrix u = build_step_unitary(p, c);
  EXPECT_LT((u * u.adjoint() - identity(u.rows())).cwiseAbs().maxCoeff(), 1e-13);
  // the O(sqrt(dt)) photon amplitude of |e1, 0, 0> -> |g, 1, 0>
  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  const Index d = c.bin_dim();
  const cplx amp = u(0 * d * d + 1 * d + 0, 1 * d * d);
  EXPECT_NEAR(std::abs(amp - std::sqrt(c.dt) * ops.sigma_l(0, 1)), 0.0, 1e-5);
}

TEST(Step, SingleEmissionProbability) {
  SystemParams p;
  p.omega = 0.0;
  const TimeBinConfig c = config(0.01, 1, 0.01);
  TensorTrainState s = init_state(atom_ket(AtomLevel::e1), c);
  const StepResult r = step(s, build_step_gates(p, c), c);
  EXPECT_NEAR(r.flux_in_loop * c.dt, std::pow(std::sin(std::sqrt(c.dt)), 2), 1e-14);
  EXPECT_NEAR(r.rho_atom(1, 1).real(), std::pow(std::cos(std::sqrt(c.dt)), 2), 1e-14);
}

TEST(DelayOracle, SinglePhotonFeedbackWithinTolerance) {
  EXPECT_LT(delay_oracle_error(1.0, 0.01, 4.0), 1e-3);
}

TEST(DelayOracle, FirstOrderConvergenceInStep) {
  const double coarse = delay_oracle_error(1.0, 0.02, 3.0);
  const double fine = delay_oracle_error(1.0, 0.01, 3.0);
  EXPECT_GT(coarse / fine, 1.6);
  EXPECT_LT(coarse / fine, 2.5);
}

TEST(ClosedDynamics, ZeroCouplingIsUnitaryAtomEvolution) {
  SystemParams p;
  p.omega = 1.0;
  p.delta1 = 0.3;
  p.delta2 = -0.2;
  TimeBinConfig c = config(0.02, 3, 20.0);
  SystemParams closed = p;
  closed.gamma = 0.0;
  const ComplexMatrix u = build_step_unitary(closed, c);
  const ComplexMatrix h = markov::drive_hamiltonian(p, atomic_operators(p.eta, p.dphi));
  TensorTrainState s = init_state(atom_ket(AtomLevel::g), c);
  double err = 0.0;
  for (long k = 1; k <= c.steps(); ++k) {
    const StepResult r = step(s, u, c);
    const ComplexVector psi = expm(-kI * h * (k * c.dt)) * atom_ket(AtomLevel::g);
    err = std::max(err, (r.rho_atom - projector(psi)).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(err, 1e-6);
  EXPECT_EQ(s.max_bond_dim(), 1);
}

TEST(Truncation, FockCutoffConvergedAtWeakDrive) {
  SystemParams p;
  p.omega = 0.3;
  p.dphi = 1.0;
  p.tau = 0.2;
  TimeBinConfig c1 = config_for_delay(config(0.02, 0, 10.0), p.tau);
  TimeBinConfig c2 = c1;
  c2.fock_cutoff = 2;
  const MpsRun a = run(p, c1);
  const MpsRun b = run(p, c2);
  EXPECT_LT((a.samples.back().rho_atom - b.samples.back().rho_atom).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Truncation, NormLossBoundedBySvdTolerance) {
  SystemParams p;
  p.omega = 1.5;
  p.dphi = -0.7;
  p.gamma_prime = 0.03;
  const TimeBinConfig c = config_for_delay(config(0.02, 0, 8.0), 0.3);
  const StepGates g = build_step_gates(p, c);
  TensorTrainState s = init_state(atom_ket(AtomLevel::g), c);
  for (long k = 0; k < c.steps(); ++k) {
    const StepResult r = step(s, g, c);
    ASSERT_LE(r.norm_before_renormalization, 1.0 + 1e-12);
    ASSERT_GE(r.norm_before_renormalization, 1.0 - 10.0 * c.svd_tol);
  }
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  EXPECT_NEAR(reduced_atom(s).trace().real(), 1.0, 1e-10);
}

TEST(Purification, EnvironmentBondAndLocalAgree) {
  SystemParams p;
  p.omega = 1.0;
  p.dphi = 0.8;
  p.tau = 0.3;
  p.gamma_prime = 0.02;
  TimeBinConfig a = config_for_delay(config(0.02, 0, 1.0), p.tau);
  a.purification = Purification::environment_bond;
  TimeBinConfig b = a;
  b.purification = Purification::local;
  const MpsRun ra = run(p, a);
  const MpsRun rb = run(p, b);
  ASSERT_EQ(ra.samples.size(), rb.samples.size());
  double err = 0.0;
  for (std::size_t i = 0; i < ra.samples.size(); ++i) {
    err = std::max(err, (ra.samples[i].rho_atom - rb.samples[i].rho_atom).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(err, 1e-5);
  EXPECT_GT(ra.final_state.sites.front().l, 1);
  EXPECT_EQ(rb.final_state.sites.front().l, 1);
  EXPECT_TRUE(TimeBinConfig{.m = 500}.local_purification(1.0));
  EXPECT_FALSE(TimeBinConfig{.m = 25}.local_purification(1.0));
}

TEST(Checkpoint, RoundTripIsBitExactAndResumable) {
  SystemParams p;
  p.omega = 1.2;
  p.dphi = 0.4;
  p.tau = 0.1;
  TimeBinConfig c = config_for_delay(config(0.02, 0, 1.0), p.tau);
  const MpsRun first = run(p, c);
  std::stringstream buf;
  save_checkpoint(buf, {p, c, first.final_state});
  const Checkpoint back = load_checkpoint(buf);
  ASSERT_EQ(back.state.sites.size(), first.final_state.sites.size());
  for (std::size_t j = 0; j < back.state.sites.size(); ++j) {
    EXPECT_EQ(back.state.sites[j].data, first.final_state.sites[j].data);
  }
  EXPECT_EQ(back.config.m, c.m);
  EXPECT_EQ(back.config.dt, c.dt);
  EXPECT_EQ(back.params.omega, p.omega);

  c.t_final = 2.0;
  const MpsRun a = run_from(first.final_state, p, c);
  const MpsRun b = run_from(back.state, back.params, c);
  EXPECT_EQ(a.samples.back().rho_atom, b.samples.back().rho_atom);

  std::stringstream bad("NOTMAGIC");
  EXPECT_THROW(load_checkpoint(bad), NumericalError);
}

TEST(MarkovLimit, ZeroDelayMatchesMasterEquation) {
  SystemParams p;
  p.omega = 1.0;
  p.dphi = kPi / 2;
  p.gamma_prime = 0.05;
  const TimeBinConfig c = config(0.01, 0, 10.0);
  const MpsRun r = run(p, c);
  const auto ref = markov_reference(p, c.dt, c.t_final);
  EXPECT_LT(trace_distance(r.samples.back().rho_atom, ref.back().rho), 2e-2);
}

TEST(MarkovLimit, SingleStepDelayTracksMasterEquation) {
  SystemParams p;
  p.omega = 2.0;
  p.gamma_prime = 0.02;
  p.tau = 0.01;
  const TimeBinConfig c = config_for_delay(config(0.01, 0, 20.0), p.tau);
  ASSERT_EQ(c.m, 1);
  const MpsRun r = run(p, c);
  SystemParams q = p;
  q.tau = 0.0;
  const auto ref = markov_reference(q, c.dt, c.t_final);
  EXPECT_LT(trace_distance(r.samples.back().rho_atom, ref.back().rho), 2e-2);
  EXPECT_NEAR(r.samples.back().purity, purity(ref.back().rho), 2e-2);
}

TEST(SteadyDetector, BondDimensionSaturatesOnceSteady) {
  SystemParams p;
  p.omega = 1.0;
  p.dphi = 1.0;
  p.tau = 0.2;
  TimeBinConfig c = config_for_delay(config(0.02, 0, 60.0), p.tau);
  RunOptions opt;
  opt.sample_every = 10;
  opt.steady_tol = 1e-4;
  const MpsRun r = run(p, c, opt);
  ASSERT_TRUE(r.steady_time.has_value());
  Index at_steady = 0, after = 0;
  for (const auto& s : r.samples) {
    if (s.t <= *r.steady_time) at_steady = std::max(at_steady, s.max_bond_dim);
    else after = std::max(after, s.max_bond_dim);
  }
  EXPECT_LE(after, at_steady);
  EXPECT_LE(r.samples.back().max_bond_dim, c.d_max);
}

TEST(Config, DelayStepsAndValidation) {
  EXPECT_EQ(delay_steps(0.5, 0.01), 50);
  EXPECT_EQ(delay_steps(0.3, 0.1), 3);
  const TimeBinConfig c = config_for_delay(config(0.02, 0, 1.0), 0.25);
  EXPECT_EQ(c.m, 13);
  EXPECT_NEAR(c.delay(), 0.25, 1e-15);
  SystemParams p;
  p.omega = 4.0;
  EXPECT_THROW(config(0.02, 1, 1.0).validate(p), ParameterError);
  EXPECT_THROW(config(-0.1, 1, 1.0).validate(SystemParams{}), ParameterError);
}
