#pragma once

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hcb/common.hpp"

namespace hcb {

/// Pascal table C(n, k) for n, k <= 32.
class Binomial {
 public:
  static const Binomial& table() {
    static const Binomial t;
    return t;
  }
  std::uint64_t operator()(int n, int k) const {
    if (k < 0 || n < 0 || k > n) return 0;
    return c_[n][k];
  }

 private:
  Binomial() {
    for (int n = 0; n <= kMax; ++n) {
      c_[n][0] = 1;
      for (int k = 1; k <= n; ++k) c_[n][k] = c_[n - 1][k - 1] + (k <= n - 1 ? c_[n - 1][k] : 0);
    }
  }
  static constexpr int kMax = 32;
  std::array<std::array<std::uint64_t, kMax + 1>, kMax + 1> c_{};
};

inline std::uint64_t binomial(int n, int k) { return Binomial::table()(n, k); }

/// Position of `mask` among all masks of equal popcount in ascending order
/// (combinatorial number system: sum over set bits p_1 < p_2 < ... of C(p_k, k)).
inline std::uint64_t combinadic_rank(std::uint32_t mask) {
  const Binomial& c = Binomial::table();
  std::uint64_t rank = 0;
  int k = 1;
  for (std::uint32_t m = mask; m; m &= m - 1, ++k) rank += c(std::countr_zero(m), k);
  return rank;
}

/// Ordered basis of N-site occupation masks with exactly n excitations.
class SectorBasis {
 public:
  SectorBasis(int sites, int excitations, int max_sites = kDefaultMaxSites)
      : sites_(sites), n_(excitations) {
    if (sites < 0 || sites > max_sites || sites > 31)
      throw CapacityError("site count " + std::to_string(sites) + " exceeds the cap");
    if (excitations < 0 || excitations > sites)
      throw DomainError("excitation number " + std::to_string(excitations) + " out of range [0, " +
                        std::to_string(sites) + "]");
    states_.reserve(binomial(sites, excitations));
    if (excitations == 0) {
      states_.push_back(0);
      return;
    }
    // Gosper's hack: next larger integer with the same popcount.
    std::uint32_t m = (excitations == 32) ? ~0u : ((1u << excitations) - 1u);
    const std::uint64_t limit = std::uint64_t{1} << sites;
    while (m < limit) {
      states_.push_back(m);
      const std::uint32_t c = m & (~m + 1u);
      const std::uint64_t r = std::uint64_t{m} + c;
      if (r >= limit) break;
      m = static_cast<std::uint32_t>((((r ^ m) >> 2) / c) | r);
    }
  }

  int sites() const { return sites_; }
  int excitations() const { return n_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<std::uint32_t>& states() const { return states_; }
  std::uint32_t state(std::size_t i) const { return states_[i]; }

  /// Index of `mask` in this basis; the mask must have popcount n.
  std::size_t index_of(std::uint32_t mask) const { return static_cast<std::size_t>(combinadic_rank(mask)); }

  bool contains(std::uint32_t mask) const {
    return std::popcount(mask) == n_ && (sites_ == 32 || (mask >> sites_) == 0);
  }

 private:
  int sites_;
  int n_;
  std::vector<std::uint32_t> states_;
};

/// Which Hilbert space a state vector lives in.
struct Space {
  int sites = 0;
  int sector = -1;  // -1 = full 2^N space

  bool is_full() const { return sector < 0; }
  static Space full(int sites) { return {sites, -1}; }
  static Space of_sector(int sites, int n) { return {sites, n}; }
  std::size_t dimension() const {
    return is_full() ? (std::size_t{1} << sites) : static_cast<std::size_t>(binomial(sites, sector));
  }
  bool operator==(const Space&) const = default;
};

/// Normalized complex state vector over a sector or the full space.
struct PureState {
  Space space;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }

  static PureState vacuum_full(int sites) {
    PureState s{Space::full(sites), Eigen::VectorXcd::Zero(Eigen::Index(1) << sites)};
    s.amplitudes(0) = 1.0;
    return s;
  }

  /// Wraps and normalizes; throws on a zero vector or a dimension mismatch.
  static PureState normalized(Space space, Eigen::VectorXcd amps) {
    if (static_cast<std::size_t>(amps.size()) != space.dimension())
      throw DomainError("amplitude vector length does not match the space dimension");
    const double nrm = amps.norm();
    if (!(nrm > 0.0)) throw DomainError("cannot normalize a zero state");
    amps /= nrm;
    return PureState{space, std::move(amps)};
  }
};

/// Places a sector state into the full 2^N space (amplitude at index = mask).
inline PureState embed_full(const PureState& state, const SectorBasis& basis) {
  if (state.space.is_full()) throw DomainError("embed_full expects a sector state");
  if (state.space.sites != basis.sites() || state.space.sector != basis.excitations() ||
      static_cast<std::size_t>(state.amplitudes.size()) != basis.size())
    throw DomainError("sector state does not match the basis");
  PureState out{Space::full(basis.sites()), Eigen::VectorXcd::Zero(Eigen::Index(1) << basis.sites())};
  for (std::size_t k = 0; k < basis.size(); ++k) out.amplitudes(basis.state(k)) = state.amplitudes(k);
  return out;
}

struct SectorProjection {
  std::optional<PureState> state;  // empty when the sector carries no weight
  double weight = 0.0;
};

/// Restriction of a full-space state to popcount n, renormalized.
inline SectorProjection project_sector(const PureState& state, const SectorBasis& basis) {
  if (!state.space.is_full()) throw DomainError("project_sector expects a full-space state");
  if (state.space.sites != basis.sites()) throw DomainError("site count mismatch");
  Eigen::VectorXcd amps(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) amps(k) = state.amplitudes(basis.state(k));
  SectorProjection out;
  out.weight = amps.squaredNorm();
  if (out.weight > 0.0) {
    // Leave an already normalized restriction untouched so embed/project round-trips exactly.
    if (std::abs(out.weight - 1.0) > 4 * std::numeric_limits<double>::epsilon()) amps /= std::sqrt(out.weight);
    out.state = PureState{Space::of_sector(basis.sites(), basis.excitations()), std::move(amps)};
  }
  return out;
}

}  // namespace hcb
