#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chiral/cavity/cavity.hpp"
#include "chiral/core/parallel.hpp"
#include "chiral/dark/analytics.hpp"
#include "chiral/markov/defaults.hpp"
#include "chiral/markov/observables.hpp"
#include "chiral/markov/solve.hpp"
#include "chiral/mps/run.hpp"
#include "chiral/sweep/config.hpp"

namespace chiral::sweep {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunOutput {
  Table table;
  std::vector<std::string> warnings;
};

/// "%.10g"; non-finite values print as nan/inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

/// One JSON object per row; non-finite values become null.
inline void write_jsonl(std::ostream& os, const Table& t) {
  for (const auto& row : t.rows) {
    os << '{';
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << '"' << t.columns[i] << "\":";
      os << (std::isfinite(row[i]) ? format_number(row[i]) : "null");
    }
    os << "}\n";
  }
}

inline void write_table(std::ostream& os, const Table& t, Format f) {
  if (f == Format::csv) write_csv(os, t);
  else write_jsonl(os, t);
}

namespace detail {

inline const std::vector<std::string>& param_columns() {
  static const std::vector<std::string> c{"omega", "gamma_prime", "delta1", "delta2",
                                          "dphi",  "eta",         "tau"};
  return c;
}

inline std::vector<double> param_values(const SystemParams& p) {
  return {p.omega, p.gamma_prime, p.delta1, p.delta2, p.dphi, p.eta, p.tau};
}

inline std::vector<std::string> with_params(std::vector<std::string> tail) {
  std::vector<std::string> c = param_columns();
  c.insert(c.end(), tail.begin(), tail.end());
  return c;
}

inline std::vector<double> populations(const ComplexMatrix& rho, double dphi) {
  return {rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real(), fidelity(rho, ket_s(dphi)),
          fidelity(rho, ket_t(dphi))};
}

struct PointResult {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
};

inline std::string where(const SystemParams& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "omega=%g dphi=%g delta1=%g delta2=%g gamma_prime=%g eta=%g tau=%g",
                p.omega, p.dphi, p.delta1, p.delta2, p.gamma_prime, p.eta, p.tau);
  return buf;
}

/// Markov steady state; a degenerate kernel falls back to the long-time
/// limit from |g> with a warning.
inline ComplexMatrix markov_steady(const markov::LindbladModel& model, const SystemParams& p,
                                   std::vector<std::string>& warnings) {
  try {
    return markov::steady_state(model).rho;
  } catch (const DegenerateSteadyStateError& e) {
    warnings.push_back(where(p) + ": " + e.what() + "; using the long-time limit from |g>");
    return markov::asymptotic_state(markov::vectorize(model), projector(atom_ket(AtomLevel::g)));
  }
}

inline const std::vector<std::string>& steady_columns() {
  static const std::vector<std::string> c =
      with_params({"purity", "pop_g", "pop_e1", "pop_e2", "pop_s", "pop_t", "emission_rate",
                   "h_expectation", "flux_in_loop", "flux_emitted", "steady"});
  return c;
}

inline PointResult markov_point(const SystemParams& p) {
  PointResult r;
  const markov::LindbladModel model = markov::build_v_atom_model(p);
  const ComplexMatrix rho = markov_steady(model, p, r.warnings);
  const markov::Observables o = markov::observables(rho, model);
  const AtomicOperators ops = atomic_operators(p.eta, p.dphi);
  const double loop = p.gamma * (ops.sigma_l.adjoint() * ops.sigma_l * rho).trace().real();
  std::vector<double> row = param_values(p);
  row.push_back(o.purity);
  for (double v : populations(rho, p.dphi)) row.push_back(v);
  row.insert(row.end(), {o.emission_rate, o.h_expectation, loop, o.emission_rate, 1.0});
  r.rows.push_back(std::move(row));
  return r;
}

inline mps::TimeBinConfig time_bin_config(const SystemParams& p, const SolverSettings& s) {
  mps::TimeBinConfig c = mps::default_time_bin_config(p);
  if (s.dt) c.dt = *s.dt;
  if (s.t_final) c.t_final = *s.t_final;
  if (s.fock_cutoff > 0) c.fock_cutoff = s.fock_cutoff;
  c.d_max = s.d_max;
  c.svd_tol = s.svd_tol;
  c.purification = s.purification;
  c.m = mps::delay_steps(p.tau, c.dt);
  return c;
}

inline void note_mps(const SystemParams& p, const mps::TimeBinConfig& c, const mps::MpsRun& run,
                     std::vector<std::string>& warnings) {
  if (std::abs(c.delay() - p.tau) > 1e-9 * std::max(1.0, p.tau)) {
    warnings.push_back(where(p) + ": delay rounded down to " + format_number(c.delay()));
  }
  if (!run.warnings.empty()) {
    warnings.push_back(where(p) + ": " + std::to_string(run.warnings.size()) +
                       " truncations above 100*svd_tol (bond cap " + std::to_string(c.d_max) + ")");
  }
}

inline PointResult mps_steady_point(const SystemParams& p, const SolverSettings& s) {
  PointResult r;
  const mps::TimeBinConfig c = time_bin_config(p, s);
  mps::RunOptions opt;
  opt.stop_when_steady = true;
  opt.sample_every = std::numeric_limits<int>::max();
  const mps::MpsRun run = mps::run(p, c, opt);
  note_mps(p, c, run, r.warnings);
  if (!run.steady_time) r.warnings.push_back(where(p) + ": steady-state detector did not fire");
  const mps::MpsSample& last = run.samples.back();
  std::vector<double> row = param_values(p);
  row.push_back(last.purity);
  for (double v : populations(last.rho_atom, p.dphi)) row.push_back(v);
  row.insert(row.end(), {last.flux_emitted, kNaN, last.flux_in_loop, last.flux_emitted,
                         run.steady_time ? 1.0 : 0.0});
  r.rows.push_back(std::move(row));
  return r;
}

inline const std::vector<std::string>& evolve_columns() {
  static const std::vector<std::string> c = with_params(
      {"t", "purity", "pop_g", "pop_e1", "pop_e2", "pop_s", "pop_t", "emission_rate"});
  return c;
}

inline PointResult evolve_point(const SystemParams& p, const SolverSettings& s) {
  PointResult r;
  const markov::LindbladModel model = markov::build_v_atom_model(p);
  markov::EvolveOptions opt = markov::default_evolve_options(p);
  if (s.dt) opt.dt = *s.dt;
  if (s.t_final) opt.t_final = *s.t_final;
  opt.integrator = s.integrator;
  opt.sample_every = s.sample_every;
  for (const auto& pt : markov::evolve(model, projector(atom_ket(AtomLevel::g)), opt)) {
    const markov::Observables o = markov::observables(pt.rho, model);
    std::vector<double> row = param_values(p);
    row.push_back(pt.t);
    row.push_back(o.purity);
    for (double v : populations(pt.rho, p.dphi)) row.push_back(v);
    row.push_back(o.emission_rate);
    r.rows.push_back(std::move(row));
  }
  return r;
}

inline const std::vector<std::string>& mps_columns() {
  static const std::vector<std::string> c =
      with_params({"t", "purity", "pop_g", "pop_e1", "pop_e2", "pop_s", "pop_t", "flux_in_loop",
                   "flux_emitted", "max_bond_dim", "discarded_weight"});
  return c;
}

inline PointResult mps_point(const SystemParams& p, const SolverSettings& s) {
  PointResult r;
  const mps::TimeBinConfig c = time_bin_config(p, s);
  mps::RunOptions opt;
  opt.sample_every = s.sample_every;
  opt.stop_when_steady = s.stop_when_steady;
  const mps::MpsRun run = mps::run(p, c, opt);
  note_mps(p, c, run, r.warnings);
  for (const auto& smp : run.samples) {
    std::vector<double> row = param_values(p);
    row.push_back(smp.t);
    row.push_back(smp.purity);
    for (double v : populations(smp.rho_atom, p.dphi)) row.push_back(v);
    row.insert(row.end(), {smp.flux_in_loop, smp.flux_emitted,
                           static_cast<double>(smp.max_bond_dim), smp.discarded_weight});
    r.rows.push_back(std::move(row));
  }
  return r;
}

inline const std::vector<std::string>& cavity_columns() {
  static const std::vector<std::string> c = with_params(
      {"g", "kappa", "kappa_prime", "n_max", "purity_full", "purity_adiabatic",
       "trace_distance", "gamma_eff_fit", "gamma_eff_predicted", "cutoff_population"});
  return c;
}

inline PointResult cavity_point(const SystemParams& p, const SolverSettings& s) {
  PointResult r;
  const cavity::CavityConfig c = cavity::CavityConfig::from_params(p, s.n_max);
  c.validate();
  const cavity::AdiabaticReport rep = cavity::verify_adiabatic_limit(p, c);
  for (const auto& w : rep.warnings) r.warnings.push_back(where(p) + ": " + w);
  std::vector<double> row = param_values(p);
  row.insert(row.end(), {c.g, c.kappa, c.kappa_prime, static_cast<double>(c.n_max),
                         purity(rep.rho_full_atom), purity(rep.rho_reduced), rep.trace_distance,
                         c.g > 0.0 ? rep.gamma_eff_fit : kNaN, rep.gamma_eff_predicted,
                         rep.cutoff_population});
  r.rows.push_back(std::move(row));
  return r;
}

inline const std::vector<std::string>& dark_columns() {
  static const std::vector<std::string> c{"delta", "dphi", "omega_dark", "e_plus", "e_minus",
                                          "phase_shift_rate"};
  return c;
}

/// Dark Rabi frequency along a dphi grid for equal detunings delta1.
inline PointResult dark_point(const SystemParams& p, const std::vector<double>& dphis) {
  PointResult r;
  const double delta = p.delta1;
  if (p.delta2 != p.delta1) {
    r.warnings.push_back(where(p) + ": dark curve uses delta = delta1 for both transitions");
  }
  for (double x : dphis) {
    double omega = kNaN, ep = kNaN, em = kNaN;
    if (x != 0.0 && std::abs(x) < kPi) {
      if (const auto o = dark::dark_rabi(x, delta, p.gamma)) omega = *o;
      const dark::DarkEnergies e = dark::dark_energies(x, delta, p.gamma);
      ep = e.e_plus;
      em = e.e_minus;
    }
    r.rows.push_back({delta, x, omega, ep, em, ep - em});
  }
  return r;
}

inline std::vector<double> dark_dphi_grid(const RunConfig& cfg) {
  for (const auto& a : cfg.grid) {
    if (a.name == "dphi") return a.values;
  }
  std::vector<double> v = linspace(-kPi, kPi, cfg.solver.dark_points);
  return v;
}

}  // namespace detail

/// Executes a configuration. Grid points run in parallel; rows come out in
/// grid order.
inline RunOutput execute(const RunConfig& cfg, int threads = 1) {
  RunOutput out;
  RunConfig local = cfg;
  std::vector<double> dark_dphis;
  if (cfg.mode == Mode::dark_curve) {
    dark_dphis = detail::dark_dphi_grid(cfg);
    std::erase_if(local.grid, [](const GridAxis& a) { return a.name == "dphi"; });
  }
  const std::vector<SystemParams> points = grid_points(local);
  std::vector<detail::PointResult> results(points.size());

  switch (cfg.mode) {
    case Mode::steady:
    case Mode::sweep:
      out.table.columns = detail::steady_columns();
      break;
    case Mode::evolve: out.table.columns = detail::evolve_columns(); break;
    case Mode::mps: out.table.columns = detail::mps_columns(); break;
    case Mode::cavity: out.table.columns = detail::cavity_columns(); break;
    case Mode::dark_curve: out.table.columns = detail::dark_columns(); break;
  }

  parallel_for(points.size(), threads, [&](std::size_t i) {
    const SystemParams& p = points[i];
    switch (cfg.mode) {
      case Mode::steady:
        results[i] = detail::markov_point(p);
        break;
      case Mode::sweep:
        results[i] = cfg.solver.engine == Engine::markov ? detail::markov_point(p)
                                                         : detail::mps_steady_point(p, cfg.solver);
        break;
      case Mode::evolve: results[i] = detail::evolve_point(p, cfg.solver); break;
      case Mode::mps: results[i] = detail::mps_point(p, cfg.solver); break;
      case Mode::cavity: results[i] = detail::cavity_point(p, cfg.solver); break;
      case Mode::dark_curve: results[i] = detail::dark_point(p, dark_dphis); break;
    }
  });

  for (auto& r : results) {
    for (auto& row : r.rows) out.table.rows.push_back(std::move(row));
    for (auto& w : r.warnings) out.warnings.push_back(std::move(w));
  }
  return out;
}

}  // namespace chiral::sweep
