#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "hcb/basis.hpp"
#include "hcb/common.hpp"
#include "hcb/lattice.hpp"

namespace hcb {

/// Gathers the bits of `m` selected by `select` into the low bits (software pext).
inline std::uint32_t compress_bits(std::uint32_t m, std::uint32_t select) {
  std::uint32_t out = 0;
  int pos = 0;
  for (std::uint32_t s = select; s; s &= s - 1, ++pos)
    if (m & (s & (~s + 1u))) out |= 1u << pos;
  return out;
}

namespace detail {
template <class Vec>
using scalar_of = typename Vec::Scalar;

inline double re_conj_mul(double a, double b) { return a * b; }
inline double re_conj_mul(cplx a, cplx b) { return (std::conj(a) * b).real(); }
}  // namespace detail

// ---------------------------------------------------------------------------
// Correlations

/// Site pairs (i < j) at Manhattan distance 1..max_distance, plus their distance.
struct PairList {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> distance;

  static PairList up_to(const Lattice& lat, int max_distance) {
    PairList p;
    for (int d = 1; d <= max_distance; ++d)
      for (auto ij : lat.pairs_at_distance(d)) {
        p.pairs.push_back(ij);
        p.distance.push_back(d);
      }
    return p;
  }
};

/// Precomputed exchange table for one sector: for every listed pair (i, j), the
/// basis index pairs (k, k') with j occupied / i empty in k and k' = k with the
/// excitation moved from j to i.
class SectorCorrelator {
 public:
  SectorCorrelator(const Lattice& lat, const SectorBasis& basis, int max_distance = 2)
      : sites_(lat.size()), pairs_(PairList::up_to(lat, max_distance)) {
    if (basis.sites() != lat.size()) throw DomainError("basis and lattice disagree on the site count");
    hops_.resize(pairs_.pairs.size());
    for (std::size_t p = 0; p < pairs_.pairs.size(); ++p) {
      const auto [i, j] = pairs_.pairs[p];
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const std::uint32_t m = basis.state(k);
        if (((m >> j) & 1u) && !((m >> i) & 1u))
          hops_[p].emplace_back(int(k), int(basis.index_of(m ^ (1u << i) ^ (1u << j))));
      }
    }
  }

  const PairList& pairs() const { return pairs_; }

  /// C^x for every listed pair; for fixed-n states <s^x_i> = 0.
  template <class Vec>
  std::vector<double> pair_values(const Vec& psi) const {
    std::vector<double> out(hops_.size());
    for (std::size_t p = 0; p < hops_.size(); ++p) {
      double s = 0.0;
      for (const auto& [k, kp] : hops_[p]) s += detail::re_conj_mul(psi(kp), psi(k));
      out[p] = 2.0 * s;
    }
    return out;
  }

  template <class Vec>
  Eigen::MatrixXd matrix(const Vec& psi) const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(sites_, sites_);
    const auto v = pair_values(psi);
    for (std::size_t p = 0; p < v.size(); ++p) {
      const auto [i, j] = pairs_.pairs[p];
      c(i, j) = c(j, i) = v[p];
    }
    return c;
  }

 private:
  int sites_;
  PairList pairs_;
  std::vector<std::vector<std::pair<int, int>>> hops_;
};

/// C^x_ij = <s^x_i s^x_j> - <s^x_i><s^x_j> (Pauli s^x) for all pairs up to
/// `max_distance`; other entries and the diagonal are zero.
inline Eigen::MatrixXd correlation_matrix(const PureState& state, const Lattice& lat, int max_distance = 2) {
  const int n_sites = lat.size();
  if (state.space.sites != n_sites) throw DomainError("state and lattice disagree on the site count");
  if (!state.space.is_full()) {
    SectorBasis basis(n_sites, state.space.sector, std::max(n_sites, kDefaultMaxSites));
    return SectorCorrelator(lat, basis, max_distance).matrix(state.amplitudes);
  }
  const auto& psi = state.amplitudes;
  const std::uint32_t dim = std::uint32_t(psi.size());
  std::vector<double> single(n_sites, 0.0);
  for (int i = 0; i < n_sites; ++i) {
    double s = 0.0;
    for (std::uint32_t m = 0; m < dim; ++m) s += (std::conj(psi(m ^ (1u << i))) * psi(m)).real();
    single[i] = s;
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_sites, n_sites);
  const PairList pl = PairList::up_to(lat, max_distance);
  for (const auto& [i, j] : pl.pairs) {
    const std::uint32_t flip = (1u << i) | (1u << j);
    double s = 0.0;
    for (std::uint32_t m = 0; m < dim; ++m) s += (std::conj(psi(m ^ flip)) * psi(m)).real();
    c(i, j) = c(j, i) = s - single[i] * single[j];
  }
  return c;
}

struct CorrelationFit {
  double amplitude = 0.0;  // A = exp(intercept)
  double xi = 0.0;         // -1/slope, or the cap when saturated
  double slope = 0.0;
  double residual = 0.0;   // RMS of the log-linear residuals
  bool saturated = false;
  int pairs_used = 0;
  int pairs_excluded = 0;  // below the |C|^2 floor
};

struct CorrelationFitOptions {
  double floor = 1e-12;
  double cap = 100.0;
  double saturation_slope = -1e-6;
};

/// Log-linear least squares of log|C_ij|^2 against d over all NN and NNN pairs.
inline CorrelationFit fit_correlation_length(const std::vector<double>& values, const std::vector<int>& distance,
                                             const CorrelationFitOptions& opt = {}) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0, excluded = 0, at1 = 0, at2 = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (distance[p] < 1 || distance[p] > 2) continue;
    const double c2 = values[p] * values[p];
    if (!(c2 >= opt.floor)) {
      ++excluded;
      continue;
    }
    const double x = distance[p], y = std::log(c2);
    pts.emplace_back(x, y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
    (distance[p] == 1 ? at1 : at2)++;
  }
  if (n == 0) throw NoSignalError("every correlation is below the fit floor");
  if (at1 == 0 || at2 == 0)
    throw FitDegeneracyError("correlation fit needs pairs at both distance 1 and distance 2");
  CorrelationFit fit;
  const double var = sxx - sx * sx / n;
  fit.slope = (sxy - sx * sy / n) / var;
  const double intercept = (sy - fit.slope * sx) / n;
  fit.amplitude = std::exp(intercept);
  double rss = 0.0;
  for (const auto& [x, y] : pts) rss += std::pow(y - intercept - fit.slope * x, 2);
  fit.residual = std::sqrt(rss / n);
  fit.pairs_used = n;
  fit.pairs_excluded = excluded;
  fit.saturated = fit.slope >= opt.saturation_slope;
  fit.xi = fit.saturated ? opt.cap : -1.0 / fit.slope;
  return fit;
}

inline CorrelationFit fit_correlation_length(const Eigen::MatrixXd& c, const Lattice& lat,
                                             const CorrelationFitOptions& opt = {}) {
  if (c.rows() != lat.size() || c.cols() != lat.size()) throw DomainError("correlation matrix has the wrong size");
  const PairList pl = PairList::up_to(lat, 2);
  std::vector<double> v;
  for (const auto& [i, j] : pl.pairs) v.push_back(c(i, j));
  return fit_correlation_length(v, pl.distance, opt);
}

// ---------------------------------------------------------------------------
// Density matrices and entropies

/// Rows indexed by the subset's local configuration (bit b = b-th member in
/// ascending site order), columns by the complement's configuration.
inline Eigen::MatrixXcd schmidt_matrix(const PureState& state, std::uint32_t subset_mask) {
  const int n_sites = state.space.sites;
  const std::uint32_t full = n_sites == 32 ? ~0u : ((1u << n_sites) - 1u);
  const std::uint32_t rest = full & ~subset_mask;
  const int v = std::popcount(subset_mask);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(Eigen::Index(1) << v, Eigen::Index(1) << (n_sites - v));
  auto put = [&](std::uint32_t mask, cplx amp) {
    m(compress_bits(mask, subset_mask), compress_bits(mask, rest)) = amp;
  };
  if (state.space.is_full()) {
    for (Eigen::Index k = 0; k < state.amplitudes.size(); ++k) put(std::uint32_t(k), state.amplitudes(k));
  } else {
    SectorBasis basis(n_sites, state.space.sector, std::max(n_sites, kDefaultMaxSites));
    for (std::size_t k = 0; k < basis.size(); ++k) put(basis.state(k), state.amplitudes(Eigen::Index(k)));
  }
  return m;
}

/// Partial trace of |psi><psi| over every site outside the subset.
inline Eigen::MatrixXcd reduced_density_matrix(const PureState& state, const Subset& subset, int max_volume = 8) {
  if (subset.volume > max_volume)
    throw CapacityError("subset volume " + std::to_string(subset.volume) + " exceeds the limit " +
                        std::to_string(max_volume));
  const Eigen::MatrixXcd m = schmidt_matrix(state, subset.mask);
  Eigen::MatrixXcd rho = m * m.adjoint();
  return (rho + rho.adjoint()) * 0.5;
}

/// Second Renyi entropy -log Tr rho^2 (natural log).
inline double renyi2_entropy(const Eigen::MatrixXcd& rho) {
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-8) throw DomainError("density matrix trace deviates from 1 by " + std::to_string(tr - 1.0));
  const double purity = rho.cwiseAbs2().sum();
  return std::max(0.0, -std::log(purity));
}

/// Purity-based shortcut: Tr rho_X^2 from the smaller Gram matrix.
inline double purity_of(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd g = m.rows() <= m.cols() ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
  return g.cwiseAbs2().sum();
}

/// S_X = 2 S_2(rho_X) for a pure state. No volume cap: the purity is taken on
/// whichever side of the cut is smaller.
inline double entanglement_entropy(const PureState& state, const Subset& subset) {
  const double nrm2 = state.amplitudes.squaredNorm();
  if (std::abs(nrm2 - 1.0) > 1e-8) throw DomainError("entanglement_entropy expects a normalized state");
  return 2.0 * std::max(0.0, -std::log(purity_of(schmidt_matrix(state, subset.mask))));
}

/// Block-structured purity for fixed-n states across one cut.
///
/// A sector state splits into blocks by the number k of excitations inside
/// the subset; block k is a C(V,k) x C(N-V, n-k) matrix. The scatter map is
/// built once per (sector, subset) and reused for every eigenvector.
class SectorCut {
 public:
  SectorCut(const SectorBasis& basis, std::uint32_t subset_mask) {
    const int n_sites = basis.sites();
    const int n = basis.excitations();
    const std::uint32_t full = n_sites == 32 ? ~0u : ((1u << n_sites) - 1u);
    const std::uint32_t rest = full & ~subset_mask;
    const int v = std::popcount(subset_mask);
    rows_.resize(v + 1);
    cols_.resize(v + 1);
    for (int k = 0; k <= v; ++k) {
      rows_[k] = int(binomial(v, k));
      cols_[k] = int(binomial(n_sites - v, n - k));
    }
    block_.resize(basis.size());
    offset_.resize(basis.size());
    for (std::size_t s = 0; s < basis.size(); ++s) {
      const std::uint32_t m = basis.state(s);
      const std::uint32_t a = compress_bits(m, subset_mask);
      const std::uint32_t b = compress_bits(m, rest);
      const int k = std::popcount(a);
      block_[s] = std::uint8_t(k);
      // Column-major position inside block k.
      offset_[s] = int(combinadic_rank(a) + std::uint64_t(rows_[k]) * combinadic_rank(b));
    }
  }

  template <class Vec>
  double purity(const Vec& psi) const {
    using S = detail::scalar_of<Vec>;
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    const int nb = int(rows_.size());
    std::vector<Mat> blocks(nb);
    for (int k = 0; k < nb; ++k)
      if (rows_[k] > 0 && cols_[k] > 0) blocks[k] = Mat::Zero(rows_[k], cols_[k]);
    for (std::size_t s = 0; s < block_.size(); ++s) blocks[block_[s]].data()[offset_[s]] = psi(Eigen::Index(s));
    double total = 0.0;
    Mat g;
    for (int k = 0; k < nb; ++k) {
      const Mat& m = blocks[k];
      if (m.size() == 0) continue;
      if (m.rows() <= m.cols())
        g.noalias() = m * m.adjoint();
      else
        g.noalias() = m.adjoint() * m;
      total += g.cwiseAbs2().sum();
    }
    return total;
  }

  template <class Vec>
  double entropy(const Vec& psi) const {
    return 2.0 * std::max(0.0, -std::log(purity(psi)));
  }

 private:
  std::vector<int> rows_, cols_;
  std::vector<std::uint8_t> block_;
  std::vector<int> offset_;
};

struct EntropyFit {
  double s_volume = 0.0;
  double s_area = 0.0;
  double residual = 0.0;  // Euclidean norm of the fit residual
  std::string policy;

  double ratio() const { return s_volume / s_area; }
};

/// No-intercept least squares S_X ~ s_V V_X + s_A A_X.
inline EntropyFit fit_entropy_scaling(const std::vector<double>& entropies, const std::vector<Subset>& subsets,
                                      std::string policy_tag = {}) {
  if (entropies.size() != subsets.size()) throw DomainError("one entropy per subset is required");
  if (!has_rank_two(subsets)) throw FitDegeneracyError("(V, A) design matrix is rank deficient");
  Eigen::MatrixXd x(Eigen::Index(subsets.size()), 2);
  Eigen::VectorXd y(Eigen::Index(subsets.size()));
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    x(Eigen::Index(k), 0) = subsets[k].volume;
    x(Eigen::Index(k), 1) = subsets[k].area;
    y(Eigen::Index(k)) = entropies[k];
  }
  const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(y);
  EntropyFit fit;
  fit.s_volume = coef(0);
  fit.s_area = coef(1);
  fit.residual = (x * coef - y).norm();
  fit.policy = std::move(policy_tag);
  return fit;
}

inline EntropyFit fit_entropy_scaling(const PureState& state, const std::vector<Subset>& subsets,
                                      std::string policy_tag = {}) {
  std::vector<double> s;
  s.reserve(subsets.size());
  for (const Subset& x : subsets) s.push_back(entanglement_entropy(state, x));
  return fit_entropy_scaling(s, subsets, std::move(policy_tag));
}

/// Correlation and entropy tables for many states of one sector.
class SectorObservables {
 public:
  SectorObservables(const Lattice& lat, const SectorBasis& basis, std::vector<Subset> subsets, std::string policy_tag,
                    CorrelationFitOptions fit_opt = {})
      : correlator_(lat, basis, 2), subsets_(std::move(subsets)), policy_(std::move(policy_tag)), fit_opt_(fit_opt) {
    cuts_.reserve(subsets_.size());
    for (const Subset& s : subsets_) cuts_.emplace_back(basis, s.mask);
  }

  template <class Vec>
  CorrelationFit correlation(const Vec& psi) const {
    return fit_correlation_length(correlator_.pair_values(psi), correlator_.pairs().distance, fit_opt_);
  }

  template <class Vec>
  std::vector<double> entropies(const Vec& psi) const {
    std::vector<double> s;
    s.reserve(cuts_.size());
    for (const SectorCut& c : cuts_) s.push_back(c.entropy(psi));
    return s;
  }

  template <class Vec>
  EntropyFit entropy_fit(const Vec& psi) const {
    return fit_entropy_scaling(entropies(psi), subsets_, policy_);
  }

  const SectorCorrelator& correlator() const { return correlator_; }
  const std::vector<Subset>& subsets() const { return subsets_; }

 private:
  SectorCorrelator correlator_;
  std::vector<Subset> subsets_;
  std::vector<SectorCut> cuts_;
  std::string policy_;
  CorrelationFitOptions fit_opt_;
};

}  // namespace hcb
