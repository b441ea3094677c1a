#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hcb/basis.hpp"
#include "hcb/common.hpp"
#include "hcb/hamiltonian.hpp"
#include "hcb/krylov.hpp"
#include "hcb/lattice.hpp"
#include "hcb/spectra.hpp"

namespace hcb {

/// Readout resonator feeding one qubit from the shared input line.
struct ResonatorLine {
  int site = 0;
  double detuning = 0.0;  // Delta_i, resonator minus qubit frequency
  double coupling = 0.0;  // g_i
  double linewidth = 0.0; // kappa_i
  double delay = 0.0;     // tau_i, position along the line
};

struct DriveSpec {
  std::vector<ResonatorLine> lines;
  double field = 0.0;             // Omega, square-root photon flux
  double detuning = 0.0;          // delta = omega_d - omega_q
  double qubit_frequency = 0.0;   // omega_q, sets omega_d for the standing-wave factor
};

/// Sigma = sum_i alpha_i s^-_i with sum |alpha_i|^2 = 1 and strength g~.
struct DriveOperator {
  double g_tilde = 0.0;
  std::vector<cplx> alpha;
  std::string source;
  std::vector<std::string> warnings;

  /// Per-site g~ alpha_i.
  std::vector<cplx> amplitudes(double g) const {
    std::vector<cplx> out(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = g * alpha[i];
    return out;
  }
  std::vector<cplx> amplitudes() const { return amplitudes(g_tilde); }
};

/// Adiabatically eliminated resonator drive:
///   a_i = -sqrt(kappa_i) g_i sin(omega_d tau_i) / Delta_i,  K = sum a_i^2,
///   alpha_i = a_i / sqrt(K),  g~ = Omega sqrt(2K).
inline DriveOperator derive_drive_operator(const DriveSpec& spec, int sites) {
  DriveOperator op;
  op.source = "derived";
  op.alpha.assign(sites, cplx(0.0));
  const double omega_d = spec.qubit_frequency + spec.detuning;
  std::vector<double> a(sites, 0.0);
  std::vector<bool> seen(sites, false);
  for (const ResonatorLine& r : spec.lines) {
    if (r.site < 0 || r.site >= sites) throw DomainError("resonator site index out of range");
    if (seen[r.site]) throw DomainError("site " + std::to_string(r.site) + " has two resonators");
    seen[r.site] = true;
    if (r.detuning == 0.0) throw DomainError("resonator detuning must be nonzero");
    if (r.linewidth < 0.0) throw DomainError("resonator linewidth must be nonnegative");
    if (std::abs(spec.detuning) * 10 > std::abs(r.detuning))
      op.warnings.push_back("site " + std::to_string(r.site) + ": |delta| not << |Delta_i|");
    if (r.linewidth * 10 > std::abs(r.detuning))
      op.warnings.push_back("site " + std::to_string(r.site) + ": kappa_i not << |Delta_i|");
    double standing = std::sin(omega_d * r.delay);
    if (std::abs(standing) < 1e-12) standing = 0.0;  // node of the standing wave
    a[r.site] = -std::sqrt(r.linewidth) * r.coupling * standing / r.detuning;
  }
  double k = 0.0;
  for (double x : a) k += x * x;
  if (!(k > 0.0)) throw DomainError("drive vanishes on every site (all standing-wave factors are zero)");
  for (int i = 0; i < sites; ++i) op.alpha[i] = a[i] / std::sqrt(k);
  op.g_tilde = spec.field * std::sqrt(2.0 * k);
  return op;
}

/// alpha_i = exp(i phi_i) / sqrt(N), phi_i uniform on [0, 2 pi).
inline DriveOperator random_phase_drive(const Lattice& lat, std::uint64_t seed, double g_tilde = 1.0) {
  DriveOperator op;
  op.source = "random-phase";
  op.g_tilde = g_tilde;
  Rng rng(seed);
  const double norm = 1.0 / std::sqrt(double(lat.size()));
  for (int i = 0; i < lat.size(); ++i) op.alpha.push_back(std::polar(norm, 2.0 * std::numbers::pi * rng.uniform()));
  return op;
}

struct PreparationOptions {
  std::optional<double> duration;  // default 8 J / g~^2
  KrylovOptions krylov;
};

inline double default_preparation_time(double hopping, double g_tilde) { return 8.0 * hopping / (g_tilde * g_tilde); }

/// Evolves the vacuum under the driven Hamiltonian (frame rotating at omega_d).
inline PureState prepare_coherent_like(const Lattice& lat, const DisorderRealization& dis, double hopping,
                                       const DriveOperator& drive, double detuning, double g_tilde,
                                       const PreparationOptions& opt = {}) {
  PureState psi = PureState::vacuum_full(lat.size());
  if (g_tilde == 0.0) return psi;
  const double t = opt.duration.value_or(default_preparation_time(hopping, g_tilde));
  const auto amps = drive.amplitudes(g_tilde);
  const ComplexOperator h = build_driven_hamiltonian(lat, dis, hopping, amps, detuning);
  KrylovPropagator(h, opt.krylov).advance(psi.amplitudes, t);
  return psi;
}

/// Weight of one eigen-cluster: energy in the omega_q frame, summed |<n,e|psi>|^2.
struct OverlapRecord {
  int n = 0;
  double epsilon = 0.0;
  double weight = 0.0;
};

/// Overlaps of a full-space state with one sector's eigenvectors; degenerate
/// clusters are merged into one record (mean energy, summed weight).
inline std::vector<OverlapRecord> sector_overlaps(const PureState& state, const SectorBasis& basis,
                                                  const EigenDecomposition& dec) {
  if (!dec.has_vectors()) throw DomainError("overlap spectrum needs eigenvectors");
  if (dec.sector != basis.excitations() || std::size_t(dec.vectors.rows()) != basis.size())
    throw DomainError("decomposition does not match the sector basis");
  Eigen::VectorXcd proj(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) proj(Eigen::Index(k)) = state.amplitudes(basis.state(k));
  const Eigen::VectorXd re = dec.vectors.transpose() * proj.real();
  const Eigen::VectorXd im = dec.vectors.transpose() * proj.imag();
  std::vector<OverlapRecord> out;
  for (std::size_t k = 0; k < dec.size();) {
    const auto members = dec.cluster_members(k);
    OverlapRecord r{dec.sector, 0.0, 0.0};
    for (std::size_t c : members) {
      r.epsilon += dec.energies[c];
      r.weight += re(Eigen::Index(c)) * re(Eigen::Index(c)) + im(Eigen::Index(c)) * im(Eigen::Index(c));
    }
    r.epsilon /= double(members.size());
    out.push_back(r);
    k = members.back() + 1;
  }
  return out;
}

/// Overlap spectrum across all sectors. Sectors whose projected weight
/// exceeds `required_weight` must have a decomposition.
inline std::vector<OverlapRecord> overlap_spectrum(const PureState& state,
                                                   const std::map<int, EigenDecomposition>& decs,
                                                   double required_weight = 1e-8) {
  if (!state.space.is_full()) throw DomainError("overlap_spectrum expects a full-space state");
  const int n_sites = state.space.sites;
  std::vector<OverlapRecord> out;
  for (int n = 0; n <= n_sites; ++n) {
    SectorBasis basis(n_sites, n, std::max(n_sites, kDefaultMaxSites));
    const auto it = decs.find(n);
    if (it == decs.end()) {
      double w = 0.0;
      for (std::uint32_t m : basis.states()) w += std::norm(state.amplitudes(m));
      if (w > required_weight)
        throw DomainError("missing decomposition for sector " + std::to_string(n) + " carrying weight " +
                          std::to_string(w));
      continue;
    }
    auto recs = sector_overlaps(state, basis, it->second);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

}  // namespace hcb
