#pragma once

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <vector>

#include "chiral/core/errors.hpp"
#include "chiral/core/matrix.hpp"
#include "chiral/markov/liouvillian.hpp"
#include "chiral/markov/model.hpp"

namespace chiral::markov {

inline constexpr double kKernelTolerance = 1e-8;

struct SteadyState {
  ComplexMatrix rho;
  double residual = 0.0;        // || L vec(rho) ||
  double smallest_singular = 0.0;
  double second_singular = 0.0;  // spectral gap proxy
};

namespace detail {

inline ComplexMatrix normalized_density(const ComplexVector& v, Index dim) {
  ComplexMatrix rho = unvec(v, dim);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw NumericalError("steady state has zero trace");
  rho /= tr;
  rho = hermitize(rho);
  rho /= rho.trace().real();
  return rho;
}

}  // namespace detail

/// Unique steady state from the right singular vector of the smallest
/// singular value. Throws DegenerateSteadyStateError if more than one
/// singular value lies below kKernelTolerance.
inline SteadyState steady_state(const Liouvillian& l) {
  const Index n = l.superop.rows();
  Eigen::BDCSVD<ComplexMatrix> svd(l.superop, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  SteadyState out;
  out.smallest_singular = s(n - 1);
  out.second_singular = n > 1 ? s(n - 2) : INFINITY;
  std::size_t kernel = 0;
  for (Index i = 0; i < n; ++i) {
    if (s(i) <= kKernelTolerance) ++kernel;
  }
  if (kernel > 1) throw DegenerateSteadyStateError(kernel, out.second_singular);
  out.rho = detail::normalized_density(svd.matrixV().col(n - 1), l.dim);
  out.residual = (l.superop * vec(out.rho)).norm();
  return out;
}

inline SteadyState steady_state(const LindbladModel& model) {
  return steady_state(vectorize(model));
}

/// Long-time limit of exp(L t) rho0, also when the kernel is degenerate:
/// the oblique projection onto ker L along range L, built from the left and
/// right null singular vectors.
inline ComplexMatrix asymptotic_state(const Liouvillian& l, const ComplexMatrix& rho0) {
  const Index n = l.superop.rows();
  Eigen::BDCSVD<ComplexMatrix> svd(l.superop, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Index k = 0;
  while (k < n && s(n - 1 - k) <= kKernelTolerance) ++k;
  if (k == 0) throw NumericalError("asymptotic_state: Liouvillian has no kernel");
  const ComplexMatrix right = svd.matrixV().rightCols(k);
  const ComplexMatrix left = svd.matrixU().rightCols(k);
  const ComplexMatrix overlap = left.adjoint() * right;
  const ComplexVector coeff = overlap.partialPivLu().solve(left.adjoint() * vec(rho0));
  return detail::normalized_density(right * coeff, l.dim);
}

enum class Integrator { propagator, rk4 };

struct EvolveOptions {
  double dt = 0.005;
  double t_final = 50.0;
  Integrator integrator = Integrator::propagator;
  int sample_every = 1;  // keep every n-th step in the trajectory
};

struct TrajectoryPoint {
  double t = 0.0;
  ComplexMatrix rho;
};

/// Fixed-step integration. The propagator method applies exp(L dt) exactly;
/// rk4 works directly on rho and is preferred for large Hilbert spaces.
inline std::vector<TrajectoryPoint> evolve(const LindbladModel& model,
                                           const ComplexMatrix& rho0,
                                           const EvolveOptions& opt) {
  if (!(opt.dt > 0.0)) throw ParameterError("evolve: dt must be > 0");
  if (opt.t_final < 0.0) throw ParameterError("evolve: t_final must be >= 0");
  if (opt.sample_every < 1) throw ParameterError("evolve: sample_every must be >= 1");
  model.validate();
  if (rho0.rows() != model.dim()) throw DimensionError("evolve: rho0 has wrong dimension");
  require_density(rho0, 1e-10, "evolve: rho0");

  const auto steps = static_cast<long>(std::llround(opt.t_final / opt.dt));
  std::vector<TrajectoryPoint> traj;
  traj.reserve(static_cast<std::size_t>(steps / opt.sample_every + 2));
  traj.push_back({0.0, rho0});

  const Index d = model.dim();
  if (opt.integrator == Integrator::propagator) {
    const Liouvillian l = vectorize(model);
    const ComplexMatrix prop = expm(l.superop * opt.dt);
    ComplexVector v = vec(rho0);
    for (long k = 1; k <= steps; ++k) {
      v = prop * v;
      if (k % opt.sample_every == 0 || k == steps) {
        traj.push_back({static_cast<double>(k) * opt.dt, unvec(v, d)});
      }
    }
  } else {
    ComplexMatrix rho = rho0;
    const double h = opt.dt;
    for (long k = 1; k <= steps; ++k) {
      const ComplexMatrix k1 = apply_lindblad(model, rho);
      const ComplexMatrix k2 = apply_lindblad(model, rho + 0.5 * h * k1);
      const ComplexMatrix k3 = apply_lindblad(model, rho + 0.5 * h * k2);
      const ComplexMatrix k4 = apply_lindblad(model, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (k % opt.sample_every == 0 || k == steps) {
        traj.push_back({static_cast<double>(k) * h, rho});
      }
    }
  }
  return traj;
}

}  // namespace chiral::markov
