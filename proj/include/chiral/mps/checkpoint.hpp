#pragma once

// Binary checkpoint: magic, format version, parameters, configuration and the
// full tensor list. Doubles are written as raw IEEE bytes so a save/load
// cycle is bit-exact on the same platform.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "chiral/core/errors.hpp"
#include "chiral/core/params.hpp"
#include "chiral/mps/time_bin.hpp"

namespace chiral::mps {

struct Checkpoint {
  SystemParams params;
  TimeBinConfig config;
  TensorTrainState state;
};

inline constexpr std::array<char, 8> kCheckpointMagic{'C', 'H', 'I', 'R', 'M', 'P', 'S', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw NumericalError("checkpoint: truncated stream");
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (1u << 20)) throw NumericalError("checkpoint: corrupt string length");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw NumericalError("checkpoint: truncated stream");
  return s;
}

}  // namespace detail

inline void save_checkpoint(std::ostream& os, const Checkpoint& c) {
  using detail::put;
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put(os, kCheckpointVersion);
  const SystemParams& p = c.params;
  for (double v : {p.omega, p.gamma, p.gamma_prime, p.delta1, p.delta2, p.dphi, p.phi_prime,
                   p.tau, p.eta, p.g, p.kappa, p.kappa_prime}) {
    put(os, v);
  }
  const TimeBinConfig& k = c.config;
  put(os, k.dt);
  put<std::int64_t>(os, k.m);
  put<std::int64_t>(os, k.fock_cutoff);
  put<std::int64_t>(os, k.d_max);
  put(os, k.svd_tol);
  put(os, k.t_final);
  put<std::uint8_t>(os, k.enforce_step_bound ? 1 : 0);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(k.purification));

  const TensorTrainState& s = c.state;
  put<std::int64_t>(os, s.atom_position);
  put<std::int64_t>(os, s.center);
  put<std::int64_t>(os, s.step_index);
  put(os, s.emitted_photons);
  put(os, s.discarded_weight);
  put<std::uint64_t>(os, s.warnings.size());
  for (const auto& w : s.warnings) {
    put<std::int64_t>(os, w.step);
    put(os, w.discarded);
    detail::put_string(os, w.where);
  }
  put<std::uint64_t>(os, s.sites.size());
  for (const auto& t : s.sites) {
    put<std::int64_t>(os, t.l);
    put<std::int64_t>(os, t.p);
    put<std::int64_t>(os, t.r);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(sizeof(cplx) * static_cast<std::size_t>(t.data.size())));
  }
  if (!os) throw NumericalError("checkpoint: write failed");
}

inline Checkpoint load_checkpoint(std::istream& is) {
  using detail::get;
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kCheckpointMagic) throw NumericalError("checkpoint: bad magic");
  if (get<std::uint32_t>(is) != kCheckpointVersion) {
    throw NumericalError("checkpoint: unsupported version");
  }
  Checkpoint c;
  SystemParams& p = c.params;
  for (double* f : {&p.omega, &p.gamma, &p.gamma_prime, &p.delta1, &p.delta2, &p.dphi,
                    &p.phi_prime, &p.tau, &p.eta, &p.g, &p.kappa, &p.kappa_prime}) {
    *f = get<double>(is);
  }
  TimeBinConfig& k = c.config;
  k.dt = get<double>(is);
  k.m = get<std::int64_t>(is);
  k.fock_cutoff = get<std::int64_t>(is);
  k.d_max = get<std::int64_t>(is);
  k.svd_tol = get<double>(is);
  k.t_final = get<double>(is);
  k.enforce_step_bound = get<std::uint8_t>(is) != 0;
  const auto pur = get<std::uint8_t>(is);
  if (pur > static_cast<std::uint8_t>(Purification::local)) {
    throw NumericalError("checkpoint: corrupt purification mode");
  }
  k.purification = static_cast<Purification>(pur);

  TensorTrainState& s = c.state;
  s.atom_position = get<std::int64_t>(is);
  s.center = get<std::int64_t>(is);
  s.step_index = get<std::int64_t>(is);
  s.emitted_photons = get<double>(is);
  s.discarded_weight = get<double>(is);
  const auto nw = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < nw; ++i) {
    TruncationWarning w;
    w.step = get<std::int64_t>(is);
    w.discarded = get<double>(is);
    w.where = detail::get_string(is);
    s.warnings.push_back(std::move(w));
  }
  const auto ns = get<std::uint64_t>(is);
  if (ns == 0 || ns > (1u << 24)) throw NumericalError("checkpoint: corrupt site count");
  for (std::uint64_t i = 0; i < ns; ++i) {
    const auto l = get<std::int64_t>(is);
    const auto d = get<std::int64_t>(is);
    const auto r = get<std::int64_t>(is);
    if (l < 1 || d < 1 || r < 1 || l * d * r > (std::int64_t{1} << 28)) {
      throw NumericalError("checkpoint: corrupt tensor shape");
    }
    Tensor3 t(l, d, r);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(sizeof(cplx) * static_cast<std::size_t>(t.data.size())));
    if (!is) throw NumericalError("checkpoint: truncated tensor data");
    s.sites.push_back(std::move(t));
  }
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw NumericalError("checkpoint: cannot open " + path);
  save_checkpoint(os, c);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw NumericalError("checkpoint: cannot open " + path);
  return load_checkpoint(is);
}

}  // namespace chiral::mps
