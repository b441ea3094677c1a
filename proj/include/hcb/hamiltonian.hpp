#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcb/basis.hpp"
#include "hcb/common.hpp"
#include "hcb/lattice.hpp"
#include "hcb/sparse.hpp"

namespace hcb {

/// Per-site qubit frequency offsets Delta E_i, in units of J.
struct DisorderRealization {
  std::vector<double> offsets;
  std::uint64_t seed = 0;
  double target_rms = 0.0;     // configured Delta omega
  double empirical_rms = 0.0;  // sqrt(mean offset^2)

  static DisorderRealization clean(int sites) {
    return DisorderRealization{std::vector<double>(sites, 0.0), 0, 0.0, 0.0};
  }
};

inline double rms(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / double(v.size()));
}

/// I.i.d. Gaussian offsets with mean 0 and standard deviation `spread`,
/// drawn from Rng(seed). With `exact_rms` the vector is rescaled so its
/// empirical RMS equals `spread`.
inline DisorderRealization sample_disorder(int sites, double spread, std::uint64_t seed,
                                           bool exact_rms = false) {
  if (spread < 0.0) throw DomainError("frequency spread must be nonnegative");
  DisorderRealization d;
  d.seed = seed;
  d.target_rms = spread;
  d.offsets.assign(sites, 0.0);
  if (spread > 0.0) {
    Rng rng(seed);
    for (double& e : d.offsets) e = spread * rng.normal();
    if (exact_rms) {
      const double r = rms(d.offsets);
      if (r > 0.0)
        for (double& e : d.offsets) e *= spread / r;
    }
  }
  d.empirical_rms = rms(d.offsets);
  return d;
}

inline void check_disorder(const Lattice& lat, const DisorderRealization& dis) {
  if (static_cast<int>(dis.offsets.size()) != lat.size())
    throw DomainError("disorder realization has " + std::to_string(dis.offsets.size()) +
                      " sites, lattice has " + std::to_string(lat.size()));
}

/// Hard-core boson Hamiltonian restricted to n excitations, in the frame
/// rotating at omega_q: diagonal sum of occupied offsets, -J per single hop.
inline RealOperator build_sector_hamiltonian(const Lattice& lat, const DisorderRealization& dis, double hopping,
                                             const SectorBasis& basis) {
  check_disorder(lat, dis);
  if (!(hopping > 0.0)) throw DomainError("hopping J must be positive");
  if (basis.sites() != lat.size()) throw DomainError("basis and lattice disagree on the site count");
  using T = RealOperator::Triplet;
  std::vector<T> triplets;
  triplets.reserve(basis.size() * (1 + lat.bonds().size() / 2));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const std::uint32_t m = basis.state(k);
    double diag = 0.0;
    for (std::uint32_t r = m; r; r &= r - 1) diag += dis.offsets[std::countr_zero(r)];
    triplets.emplace_back(int(k), int(k), diag);
    for (const Bond& b : lat.bonds()) {
      if ((((m >> b.a) ^ (m >> b.b)) & 1u) == 0) continue;
      const std::uint32_t hopped = m ^ (1u << b.a) ^ (1u << b.b);
      triplets.emplace_back(int(k), int(basis.index_of(hopped)), -hopping);
    }
  }
  return RealOperator(Eigen::Index(basis.size()), triplets, true);
}

inline RealOperator build_sector_hamiltonian(const Lattice& lat, const DisorderRealization& dis, double hopping,
                                             int excitations) {
  return build_sector_hamiltonian(lat, dis, hopping, SectorBasis(lat.size(), excitations));
}

/// Full-space driven Hamiltonian in the frame rotating at the drive frequency:
///   sum_i (Delta E_i - delta) n_i  - J sum_<ij> (s+_i s-_j + h.c.)
///   + sum_i (c_i s-_i + c_i^* s+_i),
/// with c_i = g~ alpha~_i the per-site drive amplitudes.
inline ComplexOperator build_driven_hamiltonian(const Lattice& lat, const DisorderRealization& dis, double hopping,
                                                std::span<const cplx> drive, double detuning) {
  check_disorder(lat, dis);
  if (!(hopping > 0.0)) throw DomainError("hopping J must be positive");
  const int n_sites = lat.size();
  if (static_cast<int>(drive.size()) != n_sites)
    throw DomainError("drive amplitude vector has " + std::to_string(drive.size()) + " entries, expected " +
                      std::to_string(n_sites));
  if (n_sites > 24) throw CapacityError("full-space operator limited to 24 sites");
  const std::uint32_t dim = 1u << n_sites;
  using T = ComplexOperator::Triplet;
  std::vector<T> triplets;
  triplets.reserve(std::size_t(dim) * (1 + lat.bonds().size() / 2 + n_sites));
  for (std::uint32_t m = 0; m < dim; ++m) {
    double diag = 0.0;
    for (std::uint32_t r = m; r; r &= r - 1) diag += dis.offsets[std::countr_zero(r)] - detuning;
    triplets.emplace_back(int(m), int(m), cplx(diag));
    for (const Bond& b : lat.bonds()) {
      if ((((m >> b.a) ^ (m >> b.b)) & 1u) == 0) continue;
      triplets.emplace_back(int(m), int(m ^ (1u << b.a) ^ (1u << b.b)), cplx(-hopping));
    }
    for (int i = 0; i < n_sites; ++i) {
      if (drive[i] == cplx(0.0)) continue;
      const std::uint32_t flipped = m ^ (1u << i);
      // <m| c s-_i |m + e_i> = c when site i is empty in m; raising carries c^*.
      triplets.emplace_back(int(m), int(flipped), ((m >> i) & 1u) ? std::conj(drive[i]) : drive[i]);
    }
  }
  return ComplexOperator(Eigen::Index(dim), triplets, true);
}

}  // namespace hcb
