#pragma once

// Time-bin matrix product state for a V atom in front of a mirror. The chain
// is ordered [atom, newest bin, ..., bin k-m+1]. Bins that leave the system
// are kept in one of two places:
//  - environment bond: folded into the open left bond of the atom, which
//    then purifies the state of atom and loop. Compact when the loop is short.
//  - local: stored as a purification (Kraus) index on the bin created in the
//    same step, so a bin's physical dimension is d K with the photon number
//    fastest. Leaving photons stay in time order next to the photons they
//    are correlated with, which keeps long loops cheap before the first
//    return.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/core/params.hpp"
#include "chiral/markov/model.hpp"
#include "chiral/mps/tensor.hpp"

namespace chiral::mps {

enum class Purification { automatic, environment_bond, local };

/// Delay (in units of 1/gamma) from which `automatic` selects local purification.
inline constexpr double kLocalPurificationDelay = 2.0;

struct TimeBinConfig {
  double dt = 0.02;
  Index m = 0;  // delay in steps, floor(tau/dt); 0 runs the Markov collision model
  Index fock_cutoff = 1;
  Index d_max = 64;
  double svd_tol = 1e-8;
  double t_final = 50.0;
  bool enforce_step_bound = true;  // dt * max(gamma, omega, |delta|) <= 0.05
  Purification purification = Purification::automatic;

  Index bin_dim() const { return fock_cutoff + 1; }
  bool local_purification(double gamma) const {
    if (purification == Purification::automatic) {
      return gamma * delay() >= kLocalPurificationDelay;
    }
    return purification == Purification::local;
  }
  long steps() const { return static_cast<long>(std::llround(t_final / dt)); }
  double delay() const { return static_cast<double>(m) * dt; }

  void validate(const SystemParams& p) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("TimeBinConfig.dt: must be > 0");
    if (m < 0) throw ParameterError("TimeBinConfig.m: must be >= 0");
    if (fock_cutoff < 1) throw ParameterError("TimeBinConfig.fock_cutoff: must be >= 1");
    if (d_max < 1) throw ParameterError("TimeBinConfig.d_max: must be >= 1");
    if (!(svd_tol >= 0.0 && svd_tol < 1.0)) {
      throw ParameterError("TimeBinConfig.svd_tol: must lie in [0, 1)");
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
      throw ParameterError("TimeBinConfig.t_final: must be >= 0");
    }
    if (enforce_step_bound) {
      const double scale = std::max({p.gamma, p.omega, std::abs(p.delta1), std::abs(p.delta2)});
      if (dt * scale > 0.05 + 1e-12) {
        throw ParameterError("TimeBinConfig.dt: dt * max(gamma, omega, |delta|) = " +
                             std::to_string(dt * scale) + " exceeds 0.05");
      }
    }
  }
};

/// m = floor(tau/dt), with a relative guard against round-off just below an
/// integer.
inline Index delay_steps(double tau, double dt) {
  return static_cast<Index>(std::floor(tau / dt * (1.0 + 1e-12) + 1e-12));
}

/// Step 0.02/gamma, cutoff 2 above Omega = 2 gamma, delay in whole steps,
/// t_final = 50/gamma.
inline TimeBinConfig default_time_bin_config(const SystemParams& p) {
  TimeBinConfig c;
  c.dt = 0.02 / p.gamma;
  c.fock_cutoff = p.omega > 2.0 * p.gamma ? 2 : 1;
  c.m = delay_steps(p.tau, c.dt);
  c.t_final = 50.0 / p.gamma;
  return c;
}

/// Same as `base` but with dt shrunk so that m dt equals tau exactly.
inline TimeBinConfig config_for_delay(const TimeBinConfig& base, double tau) {
  TimeBinConfig c = base;
  if (tau <= 0.0) {
    c.m = 0;
    return c;
  }
  c.m = std::max<Index>(1, static_cast<Index>(std::ceil(tau / base.dt - 1e-9)));
  c.dt = tau / static_cast<double>(c.m);
  return c;
}

struct TruncationWarning {
  long step = 0;
  double discarded = 0.0;
  std::string where;
};

struct TensorTrainState {
  std::deque<Tensor3> sites;  // sites[0] is the atom
  Index atom_position = 0;
  Index center = 0;
  long step_index = 0;
  double emitted_photons = 0.0;   // guided photons that have left the loop
  double discarded_weight = 0.0;  // accumulated over all truncations
  std::vector<TruncationWarning> warnings;

  Index max_bond_dim() const {
    Index d = 1;
    for (const auto& t : sites) d = std::max({d, t.l, t.r});
    return d;
  }
  double norm() const { return sites[static_cast<std::size_t>(center)].data.norm(); }
};

inline TensorTrainState init_state(const ComplexVector& atom_state, const TimeBinConfig& cfg) {
  if (atom_state.size() != kAtomDim) throw DimensionError("init_state: atom state must be 3-dim");
  if (std::abs(atom_state.norm() - 1.0) > 1e-10) {
    throw ParameterError("init_state: atom state must be normalized");
  }
  TensorTrainState s;
  Tensor3 atom(1, kAtomDim, 1);
  atom.data = atom_state;
  s.sites.push_back(std::move(atom));
  for (Index j = 0; j < cfg.m; ++j) {
    Tensor3 bin(1, cfg.bin_dim(), 1);
    bin(0, 0, 0) = 1.0;
    s.sites.push_back(std::move(bin));
  }
  s.center = cfg.m;
  return s;
}

/// exp(-i H_a dt + sqrt(gamma dt)(b_k^dagger sigma_L + e^{i dphi} b_{k-m}^dagger sigma_R - h.c.))
/// on atom (x) bin_k (x) bin_{k-m}.
inline ComplexMatrix build_step_unitary(const SystemParams& p, const TimeBinConfig& cfg) {
  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  const Index d = cfg.bin_dim();
  const ComplexMatrix bd = annihilation(cfg.fock_cutoff).adjoint();
  const ComplexMatrix id = identity(d);
  const ComplexMatrix h = kron(kron(markov::drive_hamiltonian(p, ops), id), id);
  const ComplexMatrix x = kron(kron(ops.sigma_l, bd), id) +
                          std::exp(kI * p.dphi) * kron(kron(ops.sigma_r, id), bd);
  const ComplexMatrix gen = -kI * cfg.dt * h + std::sqrt(p.gamma * cfg.dt) * (x - x.adjoint());
  return expm(gen);
}

/// Zero-delay limit on atom (x) bin_k: both channels share one bin and the
/// coherent exchange term is added explicitly.
inline ComplexMatrix build_markov_step_unitary(const SystemParams& p, const TimeBinConfig& cfg) {
  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  const Index d = cfg.bin_dim();
  const ComplexMatrix bd = annihilation(cfg.fock_cutoff).adjoint();
  const ComplexMatrix h = kron(markov::drive_hamiltonian(p, ops) +
                                   markov::dipole_dipole_hamiltonian(p, ops),
                               identity(d));
  const ComplexMatrix x = kron(ops.sigma_t, bd);
  const ComplexMatrix gen = -kI * cfg.dt * h + std::sqrt(p.gamma * cfg.dt) * (x - x.adjoint());
  return expm(gen);
}

/// Non-guided loss of both transitions into a fresh environment qutrit
/// {|0>, |1a>, |1b>}; returned as the three Kraus operators on the atom.
inline std::vector<ComplexMatrix> build_loss_kraus(const SystemParams& p, const TimeBinConfig& cfg) {
  const AtomicOperators ops = atomic_operators(1.0, 0.0);
  ComplexMatrix e1 = ComplexMatrix::Zero(3, 3);
  ComplexMatrix e2 = ComplexMatrix::Zero(3, 3);
  e1(1, 0) = 1.0;
  e2(2, 0) = 1.0;
  const ComplexMatrix x = kron(ops.sigma1, e1) + kron(ops.sigma2, e2);
  const ComplexMatrix u = expm(std::sqrt(p.gamma_prime * cfg.dt) * (x - x.adjoint()));
  std::vector<ComplexMatrix> k(3, ComplexMatrix::Zero(kAtomDim, kAtomDim));
  for (Index e = 0; e < 3; ++e)
    for (Index s = 0; s < kAtomDim; ++s)
      for (Index t = 0; t < kAtomDim; ++t) k[e](s, t) = u(s * 3 + e, t * 3);
  return k;
}

/// Everything a step needs that does not change between steps.
struct StepGates {
  ComplexMatrix unitary;              // 3 d^2 (m >= 1) or 3 d (m = 0)
  std::vector<ComplexMatrix> loss;    // empty when gamma' = 0
  ComplexMatrix loop_number;          // gamma sigma_L^dagger sigma_L, for m = 0
  double dt = 0.0;
  bool local_purification = false;
};

inline StepGates build_step_gates(const SystemParams& p, const TimeBinConfig& cfg) {
  StepGates g;
  g.unitary = cfg.m == 0 ? build_markov_step_unitary(p, cfg) : build_step_unitary(p, cfg);
  if (p.gamma_prime > 0.0) g.loss = build_loss_kraus(p, cfg);
  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  g.loop_number = p.gamma * ops.sigma_l.adjoint() * ops.sigma_l;
  g.dt = cfg.dt;
  g.local_purification = cfg.local_purification(p.gamma);
  return g;
}

struct StepResult {
  ComplexMatrix rho_atom;
  double flux_in_loop = 0.0;  // photons per unit time written into bin k
  double flux_emitted = 0.0;  // photons per unit time leaving with bin k-m
  double norm_before_renormalization = 1.0;
  double discarded = 0.0;
};

namespace detail {

inline void record(TensorTrainState& s, const SplitInfo& info, const char* where) {
  s.discarded_weight += info.discarded;
  if (info.overflow) s.warnings.push_back({s.step_index, info.discarded, where});
}

/// Swaps the physical indices of sites j and j+1. The orthogonality center
/// (on one of the two) ends up on site j when move_left, on j+1 otherwise.
inline void swap_sites(TensorTrainState& s, Index j, bool move_left, const TimeBinConfig& cfg,
                       double& discarded) {
  auto& a = s.sites[static_cast<std::size_t>(j)];
  auto& b = s.sites[static_cast<std::size_t>(j + 1)];
  const Index l = a.l, p1 = a.p, p2 = b.p, r = b.r;
  const ComplexMatrix theta = a.left_matrix() * b.right_matrix();
  ComplexMatrix swapped(l * p2, p1 * r);
  const cplx* src = theta.data();
  cplx* dst = swapped.data();
  for (Index c = 0; c < r; ++c)
    for (Index s2 = 0; s2 < p2; ++s2)
      for (Index s1 = 0; s1 < p1; ++s1)
        std::copy_n(src + l * (s1 + p1 * (s2 + p2 * c)), l, dst + l * (s2 + p2 * (s1 + p1 * c)));
  SplitInfo info;
  if (move_left) {
    auto [left, right] = split_center_left(swapped, cfg.svd_tol, cfg.d_max, info);
    a = Tensor3::from_left_matrix(left, l, p2);
    b = Tensor3::from_right_matrix(right, p1, r);
  } else {
    auto [left, right] = split_center_right(swapped, cfg.svd_tol, cfg.d_max, info);
    a = Tensor3::from_left_matrix(left, l, p2);
    b = Tensor3::from_right_matrix(right, p1, r);
  }
  discarded += info.discarded;
  record(s, info, "swap");
}

/// theta: flat (a, s_atom, rest_in) with `groups` trailing blocks; each
/// block's (s_atom, bins_in) columns are mapped to (s_atom, bins_out) by map.
inline ComplexVector apply_block_gate(const ComplexVector& theta, Index lp, Index in_cols,
                                      Index out_cols, Index groups, const ComplexMatrix& map_t) {
  ComplexVector out(lp * out_cols * groups);
  for (Index g = 0; g < groups; ++g) {
    Eigen::Map<const ComplexMatrix> x(theta.data() + lp * in_cols * g, lp, in_cols);
    Eigen::Map<ComplexMatrix> y(out.data() + lp * out_cols * g, lp, out_cols);
    y.noalias() = x * map_t;
  }
  return out;
}

/// Applies Kraus operators on s_atom and records the environment qutrit e
/// inside the rest columns: c = lo + q hi becomes lo + q (e + ne hi).
inline ComplexVector apply_loss(const ComplexVector& phi, Index lp, Index rest, Index q,
                                const std::vector<ComplexMatrix>& kraus) {
  const auto ne = static_cast<Index>(kraus.size());
  ComplexVector out = ComplexVector::Zero(lp * kAtomDim * rest * ne);
  for (Index c = 0; c < rest; ++c) {
    const Index lo = c % q, hi = c / q;
    for (Index e = 0; e < ne; ++e) {
      const Index c2 = lo + q * (e + ne * hi);
      for (Index s = 0; s < kAtomDim; ++s) {
        auto dst = out.segment(lp * (s + kAtomDim * c2), lp);
        for (Index t = 0; t < kAtomDim; ++t) {
          const cplx k = kraus[static_cast<std::size_t>(e)](s, t);
          if (k != cplx(0.0, 0.0)) dst += k * phi.segment(lp * (t + kAtomDim * c), lp);
        }
      }
    }
  }
  return out;
}

/// rho(s, s') = sum phi(a, s, rest) phi*(a, s', rest), trace normalized.
inline ComplexMatrix atom_density(const ComplexVector& phi, Index lp, Index rest) {
  Eigen::Map<const ComplexMatrix> mat(phi.data(), lp * kAtomDim, rest);
  const ComplexMatrix gram = mat * mat.adjoint();
  ComplexMatrix rho = ComplexMatrix::Zero(kAtomDim, kAtomDim);
  for (Index s = 0; s < kAtomDim; ++s)
    for (Index t = 0; t < kAtomDim; ++t)
      for (Index a = 0; a < lp; ++a) rho(s, t) += gram(a + lp * s, a + lp * t);
  return hermitize(rho / rho.trace().real());
}

/// <n> of the bin whose index sits at `stride` inside the rest columns.
inline double bin_number(const ComplexVector& phi, Index lp, Index rest, Index d, Index stride) {
  const Index row = lp * kAtomDim;
  double n = 0.0, norm = 0.0;
  for (Index c = 0; c < rest; ++c) {
    const double w = phi.segment(row * c, row).squaredNorm();
    n += w * static_cast<double>((c / stride) % d);
    norm += w;
  }
  return n / norm;
}

/// Replaces the purification index x of a site with physical index n + d x
/// by its dominant subspace, keeping at most d_max directions.
inline Tensor3 compress_purification(const Tensor3& t, Index d, const TimeBinConfig& cfg,
                                     SplitInfo& info) {
  const Index kx = t.p / d;
  const Index rows = t.l * d * t.r;
  ComplexMatrix mat(rows, kx);
  for (Index c = 0; c < t.r; ++c)
    for (Index x = 0; x < kx; ++x)
      for (Index n = 0; n < d; ++n)
        for (Index a = 0; a < t.l; ++a) mat(a + t.l * (n + d * c), x) = t(a, n + d * x, c);
  const GramTruncation g = truncate_gram(mat.adjoint() * mat, cfg.svd_tol, cfg.d_max);
  info = {g.discarded, g.overflow};
  const ComplexMatrix reduced = mat * g.basis;
  const Index k = reduced.cols();
  Tensor3 out(t.l, d * k, t.r);
  for (Index c = 0; c < t.r; ++c)
    for (Index x = 0; x < k; ++x)
      for (Index n = 0; n < d; ++n)
        for (Index a = 0; a < t.l; ++a) out(a, n + d * x, c) = reduced(a + t.l * (n + d * c), x);
  return out;
}

/// Moves the outgoing index of phi (lp, s_atom, n_new, out, right) into the
/// left bond and compresses it: returns (lp', s_atom) x (n_new, right).
inline ComplexMatrix fold_outgoing_left(const ComplexVector& phi, Index lp, Index d, Index out,
                                        Index right, const TimeBinConfig& cfg, SplitInfo& info) {
  const Index cols = kAtomDim * d * right;
  ComplexMatrix a(lp * out, cols);
  for (Index r = 0; r < right; ++r)
    for (Index o = 0; o < out; ++o)
      for (Index n = 0; n < d; ++n)
        for (Index sa = 0; sa < kAtomDim; ++sa) {
          const cplx* src = phi.data() + lp * (sa + kAtomDim * (n + d * (o + out * r)));
          std::copy_n(src, lp, a.col(sa + kAtomDim * (n + d * r)).data() + lp * o);
        }
  const GramTruncation g = truncate_gram(a * a.adjoint(), cfg.svd_tol, cfg.d_max);
  info = {g.discarded, g.overflow};
  const ComplexMatrix b = g.basis.adjoint() * a;
  const Index e = b.rows();
  ComplexMatrix theta(e * kAtomDim, d * right);
  for (Index r = 0; r < right; ++r)
    for (Index n = 0; n < d; ++n)
      for (Index sa = 0; sa < kAtomDim; ++sa)
        theta.col(n + d * r).segment(e * sa, e) = b.col(sa + kAtomDim * (n + d * r));
  return theta;
}

/// Moves the orthogonality center from site j to site j+1.
inline void shift_center_right(TensorTrainState& s, Index j, const TimeBinConfig& cfg,
                               double& discarded) {
  auto& a = s.sites[static_cast<std::size_t>(j)];
  auto& b = s.sites[static_cast<std::size_t>(j + 1)];
  SplitInfo info;
  auto [u, r] = split_center_right(a.left_matrix(), cfg.svd_tol, cfg.d_max, info);
  const ComplexMatrix next = r * b.right_matrix();
  a = Tensor3::from_left_matrix(u, a.l, a.p);
  b = Tensor3::from_right_matrix(next, b.p, b.r);
  discarded += info.discarded;
  record(s, info, "sweep");
}

}  // namespace detail

/// One collision step: swap bin k-m next to the atom, insert a vacuum bin
/// k, apply the gates and fold bin k-m into the environment bond or into the
/// purification index of bin k.
inline StepResult step(TensorTrainState& s, const StepGates& gates, const TimeBinConfig& cfg) {
  const Index m = cfg.m;
  const Index d = cfg.bin_dim();
  if (static_cast<Index>(s.sites.size()) != m + 1) {
    throw DimensionError("step: chain length does not match the configured delay");
  }
  const Index gate_dim = m == 0 ? kAtomDim * d : kAtomDim * d * d;
  if (gates.unitary.rows() != gate_dim) throw DimensionError("step: gate dimension mismatch");

  StepResult res;
  double discarded = 0.0;
  // the discarded-weight budget is shared by every truncation of the step
  TimeBinConfig sub = cfg;
  sub.svd_tol = cfg.svd_tol / static_cast<double>(m == 0 ? 1 : 2 * m + 1);

  // bring bin k-m next to the atom
  for (Index j = m - 1; j >= 1; --j) detail::swap_sites(s, j, true, sub, discarded);

  const Tensor3& atom = s.sites.front();
  const Index lp = atom.l;
  ComplexVector phi;
  Index rest = 0;
  Index right = 0;
  if (m == 0) {
    right = atom.r;
    // columns (s_atom) -> (s_atom, n)
    ComplexMatrix map_t(kAtomDim, kAtomDim * d);
    for (Index sa = 0; sa < kAtomDim; ++sa)
      for (Index so = 0; so < kAtomDim; ++so)
        for (Index n = 0; n < d; ++n) map_t(sa, so + kAtomDim * n) = gates.unitary(so * d + n, sa * d);
    phi = detail::apply_block_gate(atom.data, lp, kAtomDim, kAtomDim * d, right, map_t);
    rest = d * right;
  } else {
    const Tensor3& del = s.sites[1];
    right = del.r;
    const ComplexMatrix theta = atom.left_matrix() * del.right_matrix();
    // columns (s_atom, s_del) -> (s_atom, n_new, s_del)
    ComplexMatrix map_t(kAtomDim * d, kAtomDim * d * d);
    for (Index sa = 0; sa < kAtomDim; ++sa)
      for (Index sd = 0; sd < d; ++sd)
        for (Index so = 0; so < kAtomDim; ++so)
          for (Index n = 0; n < d; ++n)
            for (Index dd = 0; dd < d; ++dd)
              map_t(sa + kAtomDim * sd, so + kAtomDim * (n + d * dd)) =
                  gates.unitary(so * d * d + n * d + dd, sa * d * d + sd);
    const ComplexVector flat = Eigen::Map<const ComplexVector>(theta.data(), theta.size());
    const Index kdel = del.p / d;
    phi = detail::apply_block_gate(flat, lp, kAtomDim * d, kAtomDim * d * d, kdel * right, map_t);
    rest = d * d * kdel * right;
  }

  if (m == 0) {
    res.flux_emitted = detail::bin_number(phi, lp, rest, d, 1) / cfg.dt;
  } else {
    res.flux_in_loop = detail::bin_number(phi, lp, rest, d, 1) / cfg.dt;
    res.flux_emitted = detail::bin_number(phi, lp, rest, d, d) / cfg.dt;
  }

  // the loss record joins the bin that leaves in this step
  Index out_dim = d;
  if (!gates.loss.empty()) {
    const Index q = m == 0 ? d : d * d;
    phi = detail::apply_loss(phi, lp, rest, q, gates.loss);
    out_dim = d * static_cast<Index>(gates.loss.size());
    rest = rest / d * out_dim;
  }

  res.rho_atom = detail::atom_density(phi, lp, rest);
  if (m == 0) res.flux_in_loop = (gates.loop_number * res.rho_atom).trace().real();

  SplitInfo info;
  if (m == 0) {
    Eigen::Map<const ComplexMatrix> mat(phi.data(), lp * kAtomDim, rest);
    const ComplexMatrix x = compress_environment(mat, sub.svd_tol, sub.d_max, info);
    discarded += info.discarded;
    detail::record(s, info, "emitted bond");
    s.sites[0] = Tensor3::from_left_matrix(x, lp, kAtomDim);
    s.center = 0;
  } else {
    // columns are (n_new, outgoing, right) with the outgoing bin, its loss
    // record and its own purification index folded into `outgoing`
    const Index outgoing = rest / (d * right);
    if (gates.local_purification) {
      Eigen::Map<const ComplexMatrix> mat(phi.data(), lp * kAtomDim, rest);
      auto [u1, r1] = split_center_right(mat, sub.svd_tol, sub.d_max, info);
      discarded += info.discarded;
      detail::record(s, info, "atom split");
      s.sites[0] = Tensor3::from_left_matrix(u1, lp, kAtomDim);
      s.sites[1] = detail::compress_purification(
          Tensor3::from_right_matrix(r1, d * outgoing, right), d, sub, info);
      discarded += info.discarded;
      detail::record(s, info, "purification");
    } else {
      const ComplexMatrix theta =
          detail::fold_outgoing_left(phi, lp, d, outgoing, right, sub, info);
      discarded += info.discarded;
      detail::record(s, info, "environment");
      const Index lnew = theta.rows() / kAtomDim;
      auto [u1, r1] = split_center_right(theta, sub.svd_tol, sub.d_max, info);
      discarded += info.discarded;
      detail::record(s, info, "atom split");
      s.sites[0] = Tensor3::from_left_matrix(u1, lnew, kAtomDim);
      s.sites[1] = Tensor3::from_right_matrix(r1, d, right);
    }

    for (Index j = 1; j < m; ++j) detail::shift_center_right(s, j, sub, discarded);
    s.center = m;
  }

  Tensor3& c = s.sites[static_cast<std::size_t>(s.center)];
  res.norm_before_renormalization = c.data.norm();
  if (!(res.norm_before_renormalization > 0.0) || !std::isfinite(res.norm_before_renormalization)) {
    throw NumericalError("step: state norm collapsed");
  }
  c.data /= res.norm_before_renormalization;
  res.discarded = discarded;
  s.emitted_photons += res.flux_emitted * cfg.dt;
  ++s.step_index;
  return res;
}

inline StepResult step(TensorTrainState& s, const ComplexMatrix& unitary, const TimeBinConfig& cfg) {
  StepGates g;
  g.unitary = unitary;
  g.local_purification = cfg.purification == Purification::local;
  g.loop_number = ComplexMatrix::Zero(kAtomDim, kAtomDim);
  g.dt = cfg.dt;
  return step(s, g, cfg);
}

/// Atomic density matrix obtained by contracting every bin and both open
/// bonds; valid in any gauge.
inline ComplexMatrix reduced_atom(const TensorTrainState& s) {
  ComplexMatrix env = ComplexMatrix::Identity(1, 1);
  for (std::size_t j = s.sites.size(); j-- > 1;) {
    const Tensor3& t = s.sites[j];
    if (j + 1 == s.sites.size()) {
      env = t.right_matrix() * t.right_matrix().adjoint();
      continue;
    }
    ComplexMatrix next = ComplexMatrix::Zero(t.l, t.l);
    for (Index q = 0; q < t.p; ++q) {
      Eigen::Map<const ComplexMatrix, 0, Eigen::OuterStride<>> slice(
          t.data.data() + t.l * q, t.l, t.r, Eigen::OuterStride<>(t.l * t.p));
      next.noalias() += slice * env * slice.adjoint();
    }
    env = std::move(next);
  }
  const Tensor3& a = s.sites.front();
  if (s.sites.size() == 1) env = ComplexMatrix::Identity(a.r, a.r);
  ComplexMatrix rho(kAtomDim, kAtomDim);
  for (Index q = 0; q < kAtomDim; ++q) {
    Eigen::Map<const ComplexMatrix, 0, Eigen::OuterStride<>> sq(
        a.data.data() + a.l * q, a.l, a.r, Eigen::OuterStride<>(a.l * a.p));
    for (Index w = 0; w < kAtomDim; ++w) {
      Eigen::Map<const ComplexMatrix, 0, Eigen::OuterStride<>> sw(
          a.data.data() + a.l * w, a.l, a.r, Eigen::OuterStride<>(a.l * a.p));
      rho(q, w) = (sq * env * sw.adjoint()).trace();
    }
  }
  return hermitize(rho / rho.trace().real());
}

struct PhotonFluxes {
  double flux_in_loop = 0.0;
  double flux_emitted = 0.0;
};

/// Fluxes of the last step: the freshest bin measured at creation, and the
/// bin leaving after its second pass.
inline PhotonFluxes photon_fluxes(const StepResult& r) { return {r.flux_in_loop, r.flux_emitted}; }

}  // namespace chiral::mps
