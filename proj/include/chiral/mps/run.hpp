#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "chiral/core/matrix.hpp"
#include "chiral/core/operators.hpp"
#include "chiral/core/parallel.hpp"
#include "chiral/core/params.hpp"
#include "chiral/mps/time_bin.hpp"

namespace chiral::mps {

struct RunOptions {
  ComplexVector initial_state = atom_ket(AtomLevel::g);
  int sample_every = 1;
  bool stop_when_steady = false;
  double steady_tol = 1e-5;     // trace distance between rho_a(t) and rho_a(t - window)
  double steady_window = 5.0;   // in units of 1/gamma
};

struct MpsSample {
  double t = 0.0;
  ComplexMatrix rho_atom;
  double purity = 1.0;
  double flux_in_loop = 0.0;
  double flux_emitted = 0.0;
  Index max_bond_dim = 1;
  double discarded_weight = 0.0;  // accumulated
};

struct MpsRun {
  std::vector<MpsSample> samples;
  std::optional<double> steady_time;
  std::vector<TruncationWarning> warnings;
  TensorTrainState final_state;
};

/// Continues `state` until cfg.t_final, sampling every opt.sample_every
/// steps (the last step is always kept).
inline MpsRun run_from(TensorTrainState state, const SystemParams& p, const TimeBinConfig& cfg,
                       const RunOptions& opt = {}) {
  p.validate();
  cfg.validate(p);
  if (opt.sample_every < 1) throw ParameterError("RunOptions.sample_every: must be >= 1");
  const StepGates gates = build_step_gates(p, cfg);
  const long steps = cfg.steps();
  const long window =
      std::max<long>(1, std::llround(opt.steady_window / (p.gamma * cfg.dt)));

  MpsRun out;
  std::deque<ComplexMatrix> history;
  ComplexMatrix rho = reduced_atom(state);
  history.push_back(rho);
  if (state.step_index == 0) {
    out.samples.push_back({0.0, rho, purity(rho), 0.0, 0.0, state.max_bond_dim(),
                           state.discarded_weight});
  }
  for (long k = state.step_index; k < steps; ++k) {
    const StepResult r = step(state, gates, cfg);
    const double t = static_cast<double>(state.step_index) * cfg.dt;
    history.push_back(r.rho_atom);
    if (static_cast<long>(history.size()) > window + 1) history.pop_front();
    bool fired = false;
    if (!out.steady_time && static_cast<long>(history.size()) == window + 1 &&
        trace_distance(history.back(), history.front()) < opt.steady_tol) {
      out.steady_time = t;
      fired = true;
    }
    const bool last = k + 1 == steps || (fired && opt.stop_when_steady);
    if (state.step_index % opt.sample_every == 0 || last) {
      out.samples.push_back({t, r.rho_atom, purity(r.rho_atom), r.flux_in_loop, r.flux_emitted,
                             state.max_bond_dim(), state.discarded_weight});
    }
    if (fired && opt.stop_when_steady) break;
  }
  out.warnings = state.warnings;
  out.final_state = std::move(state);
  return out;
}

inline MpsRun run(const SystemParams& p, const TimeBinConfig& cfg, const RunOptions& opt = {}) {
  return run_from(init_state(opt.initial_state, cfg), p, cfg, opt);
}

struct ScanRow {
  double dphi = 0.0;
  double tau = 0.0;
  double purity = 0.0;
  double flux_in_loop = 0.0;
  double flux_emitted = 0.0;
  bool steady = false;
  double t_end = 0.0;
  Index max_bond_dim = 1;
};

/// Steady-state purity and fluxes on a (tau, dphi) grid, rows ordered tau
/// major. The step of `base` is shrunk per tau so that the delay is a whole
/// number of steps; each run stops once the steady-state detector fires.
inline std::vector<ScanRow> purity_vs_phase_delay_scan(const SystemParams& p,
                                                       const std::vector<double>& dphis,
                                                       const std::vector<double>& taus,
                                                       const TimeBinConfig& base, int threads = 1,
                                                       RunOptions opt = {}) {
  std::vector<ScanRow> rows(dphis.size() * taus.size());
  opt.stop_when_steady = true;
  opt.sample_every = std::numeric_limits<int>::max();
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    SystemParams q = p;
    q.tau = taus[i / dphis.size()];
    q.dphi = dphis[i % dphis.size()];
    const TimeBinConfig cfg = config_for_delay(base, q.tau);
    const MpsRun r = run(q, cfg, opt);
    const MpsSample& last = r.samples.back();
    rows[i] = {q.dphi, q.tau, last.purity, last.flux_in_loop, last.flux_emitted,
               r.steady_time.has_value(), last.t, last.max_bond_dim};
  });
  return rows;
}

/// Indices of interior points strictly above both neighbours.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] > y[i + 1]) idx.push_back(i);
  }
  return idx;
}

}  // namespace chiral::mps
