#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hcb/common.hpp"
#include "hcb/lapack.hpp"
#include "hcb/sparse.hpp"

namespace hcb {

struct SpectrumMode {
  enum class Kind { Full, ValuesOnly, Window };
  Kind kind = Kind::Full;
  double target = 0.0;  // window centre, units of J
  int count = 0;        // pairs kept in window mode

  static SpectrumMode full() { return {Kind::Full, 0.0, 0}; }
  static SpectrumMode values_only() { return {Kind::ValuesOnly, 0.0, 0}; }
  static SpectrumMode window(double target, int count) { return {Kind::Window, target, count}; }
};

struct SolverOptions {
  Eigen::Index dense_limit = 16384;   // largest sector handled by the dense path
  Eigen::Index window_limit = 20000;  // shift-invert factorizes densely
  Eigen::Index small_window = 600;    // below this, window mode just runs the dense path
  int max_iterations = 400;
  double residual_tol = 1e-10;
  double degeneracy_gap = 1e-10;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

/// Eigenpairs of one sector, ascending in energy.
struct EigenDecomposition {
  int sector = 0;
  std::vector<double> energies;
  Eigen::MatrixXd vectors;           // columns in SectorBasis order; empty for values-only
  std::vector<int> cluster;          // degeneracy cluster id per eigenvalue
  std::vector<bool> degenerate;      // true when the cluster has more than one member
  double residual_bound = 0.0;       // max ||H v - e v|| over retained pairs
  double orthonormality_error = 0.0; // max |V^T V - I| (sampled above 2048 columns)

  std::size_t size() const { return energies.size(); }
  bool has_vectors() const { return vectors.cols() > 0; }

  /// Indices of the members of the cluster containing k.
  std::vector<std::size_t> cluster_members(std::size_t k) const {
    std::size_t lo = k, hi = k;
    while (lo > 0 && cluster[lo - 1] == cluster[k]) --lo;
    while (hi + 1 < cluster.size() && cluster[hi + 1] == cluster[k]) ++hi;
    std::vector<std::size_t> out(hi - lo + 1);
    std::iota(out.begin(), out.end(), lo);
    return out;
  }
};

namespace detail {

inline void assign_clusters(EigenDecomposition& dec, double gap) {
  const std::size_t m = dec.energies.size();
  dec.cluster.assign(m, 0);
  dec.degenerate.assign(m, false);
  int id = 0;
  for (std::size_t k = 1; k < m; ++k) {
    if (dec.energies[k] - dec.energies[k - 1] >= gap) ++id;
    dec.cluster[k] = id;
  }
  for (std::size_t k = 0; k < m; ++k) {
    const bool left = k > 0 && dec.cluster[k - 1] == dec.cluster[k];
    const bool right = k + 1 < m && dec.cluster[k + 1] == dec.cluster[k];
    dec.degenerate[k] = left || right;
  }
}

inline double max_residual(const RealOperator& h, const Eigen::MatrixXd& v, const std::vector<double>& e) {
  constexpr Eigen::Index kBlock = 256;
  double worst = 0.0;
  Eigen::MatrixXd hv;
  for (Eigen::Index c0 = 0; c0 < v.cols(); c0 += kBlock) {
    const Eigen::Index w = std::min(kBlock, v.cols() - c0);
    hv.noalias() = h.matrix() * v.middleCols(c0, w);
    for (Eigen::Index c = 0; c < w; ++c)
      worst = std::max(worst, (hv.col(c) - e[c0 + c] * v.col(c0 + c)).norm());
  }
  return worst;
}

inline double orthonormality_error(const Eigen::MatrixXd& v) {
  const Eigen::Index m = v.cols();
  if (m == 0) return 0.0;
  if (m <= 2048) {
    Eigen::MatrixXd g = v.transpose() * v;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
  }
  std::vector<Eigen::Index> sample;
  const Eigen::Index stride = std::max<Eigen::Index>(1, m / 64);
  for (Eigen::Index c = 0; c < m; c += stride) sample.push_back(c);
  sample.push_back(m - 1);
  Eigen::MatrixXd vs(v.rows(), Eigen::Index(sample.size()));
  for (std::size_t s = 0; s < sample.size(); ++s) vs.col(Eigen::Index(s)) = v.col(sample[s]);
  Eigen::MatrixXd g = vs.transpose() * v;
  for (std::size_t s = 0; s < sample.size(); ++s) g(Eigen::Index(s), sample[s]) -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

inline EigenDecomposition dense_decomposition(const RealOperator& h, int sector, bool vectors,
                                              const SolverOptions& opt) {
  EigenDecomposition dec;
  dec.sector = sector;
  Eigen::MatrixXd a = h.dense_real();
  if (vectors) {
    auto eig = lapack::eigh(a);
    a.resize(0, 0);
    dec.energies.assign(eig.values.data(), eig.values.data() + eig.values.size());
    dec.vectors = std::move(eig.vectors);
    dec.residual_bound = max_residual(h, dec.vectors, dec.energies);
    dec.orthonormality_error = orthonormality_error(dec.vectors);
  } else {
    const Eigen::VectorXd w = lapack::eigvalsh(a);
    dec.energies.assign(w.data(), w.data() + w.size());
    // Backward-stable dense reduction: residuals are O(n eps ||H||).
    dec.residual_bound = double(h.dimension()) * std::numeric_limits<double>::epsilon() * h.norm_bound();
  }
  assign_clusters(dec, opt.degeneracy_gap);
  return dec;
}

/// `count` eigenpairs nearest `target`, kept from a full dense decomposition.
inline EigenDecomposition select_window(EigenDecomposition full, double target, int count) {
  const std::size_t m = full.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(full.energies[a] - target) < std::abs(full.energies[b] - target);
  });
  order.resize(std::min<std::size_t>(m, std::size_t(count)));
  std::sort(order.begin(), order.end());
  EigenDecomposition out;
  out.sector = full.sector;
  out.vectors.resize(full.vectors.rows(), Eigen::Index(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.energies.push_back(full.energies[order[k]]);
    out.vectors.col(Eigen::Index(k)) = full.vectors.col(Eigen::Index(order[k]));
  }
  out.residual_bound = full.residual_bound;
  out.orthonormality_error = full.orthonormality_error;
  return out;
}

/// Shift-invert Lanczos with full reorthogonalization on (H - sigma)^-1.
inline EigenDecomposition shift_invert(const RealOperator& h, int sector, double target, int count,
                                       const SolverOptions& opt) {
  const Eigen::Index n = h.dimension();
  const double scale = std::max(1.0, h.norm_bound());
  double sigma = target;
  std::optional<lapack::LdltFactor> factor;
  for (int attempt = 0; attempt < 8 && !factor; ++attempt) {
    Eigen::MatrixXd a = h.dense_real();
    a.diagonal().array() -= sigma;
    try {
      factor.emplace(std::move(a));
    } catch (const SingularError&) {
      sigma += 1e-7 * scale * (attempt + 1);
    }
  }
  if (!factor) throw SingularError("could not find a nonsingular shift near " + std::to_string(target));

  const int max_it = int(std::min<Eigen::Index>(n, opt.max_iterations));
  Eigen::MatrixXd q(n, max_it + 1);
  std::vector<double> alpha, beta;
  Rng rng(opt.seed);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.normal();
  q.col(0) = w / w.norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  for (int j = 0; j < max_it; ++j) {
    w = q.col(j);
    factor->solve(w);
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = q.leftCols(j + 1).transpose() * w;
      w.noalias() -= q.leftCols(j + 1) * c;
    }
    double b = w.norm();
    const int m = j + 1;
    const bool exhausted = b < 1e-13 * std::abs(a) || m == max_it;
    const bool check = exhausted || (m >= count + 4 && (m % 8 == 0));
    if (check) {
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd e = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
      tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      // Largest |theta| <-> eigenvalues nearest sigma.
      std::vector<int> idx(m);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) {
        return std::abs(tri.eigenvalues()(x)) > std::abs(tri.eigenvalues()(y));
      });
      const int keep = std::min(count, m);
      bool estimate_ok = true;
      for (int k = 0; k < keep; ++k) {
        const double theta = tri.eigenvalues()(idx[k]);
        const double est = scale * std::abs(b * tri.eigenvectors()(m - 1, idx[k])) / std::abs(theta);
        if (est > opt.residual_tol) estimate_ok = false;
      }
      if (estimate_ok || exhausted) {
        EigenDecomposition dec;
        dec.sector = sector;
        Eigen::MatrixXd y = q.leftCols(m) * tri.eigenvectors()(Eigen::all, std::vector<int>(idx.begin(), idx.begin() + keep));
        std::vector<std::pair<double, int>> order;
        Eigen::VectorXd hy(n);
        std::vector<double> rq(keep);
        for (int k = 0; k < keep; ++k) {
          y.col(k).normalize();
          h.apply(y.col(k), hy);
          rq[k] = y.col(k).dot(hy);
          order.emplace_back(rq[k], k);
        }
        std::sort(order.begin(), order.end());
        dec.vectors.resize(n, keep);
        for (int k = 0; k < keep; ++k) {
          dec.energies.push_back(order[k].first);
          dec.vectors.col(k) = y.col(order[k].second);
        }
        dec.residual_bound = max_residual(h, dec.vectors, dec.energies);
        if (dec.residual_bound <= opt.residual_tol || (exhausted && dec.residual_bound <= 1e-8)) {
          dec.orthonormality_error = orthonormality_error(dec.vectors);
          assign_clusters(dec, opt.degeneracy_gap);
          return dec;
        }
        if (exhausted)
          throw ConvergenceError("shift-invert Lanczos stalled with residual " +
                                 std::to_string(dec.residual_bound));
      }
    }
    if (b < 1e-13 * std::abs(a)) break;
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  throw ConvergenceError("shift-invert Lanczos did not converge in " + std::to_string(max_it) + " iterations");
}

}  // namespace detail

/// Diagonalizes a real symmetric sector Hamiltonian.
///
/// Full and values-only modes use dense LAPACK and are limited to
/// `dense_limit`. Window mode returns the `count` pairs nearest the target
/// through shift-invert Lanczos (exactly degenerate copies beyond the first
/// vector of a cluster are not resolved by a single-vector Krylov space).
inline EigenDecomposition diagonalize_sector(const RealOperator& h, int sector, SpectrumMode mode = SpectrumMode::full(),
                                             const SolverOptions& opt = {}) {
  if (!h.hermitian()) throw DomainError("diagonalize_sector requires a hermitian operator");
  const Eigen::Index n = h.dimension();
  switch (mode.kind) {
    case SpectrumMode::Kind::Full:
    case SpectrumMode::Kind::ValuesOnly:
      if (n > opt.dense_limit)
        throw CapacityError("sector dimension " + std::to_string(n) + " exceeds the dense limit " +
                            std::to_string(opt.dense_limit));
      return detail::dense_decomposition(h, sector, mode.kind == SpectrumMode::Kind::Full, opt);
    case SpectrumMode::Kind::Window: {
      if (mode.count < 1) throw DomainError("window mode needs a positive count");
      if (n <= opt.small_window || mode.count * 4 >= n) {
        auto full = detail::dense_decomposition(h, sector, true, opt);
        auto out = detail::select_window(std::move(full), mode.target, mode.count);
        detail::assign_clusters(out, opt.degeneracy_gap);
        return out;
      }
      if (n > opt.window_limit)
        throw CapacityError("sector dimension " + std::to_string(n) + " exceeds the window-mode limit " +
                            std::to_string(opt.window_limit));
      return detail::shift_invert(h, sector, mode.target, mode.count, opt);
    }
  }
  throw DomainError("unknown spectrum mode");
}

inline double sector_bandwidth(const EigenDecomposition& dec) {
  if (dec.energies.empty()) throw DomainError("empty decomposition");
  const auto [lo, hi] = std::minmax_element(dec.energies.begin(), dec.energies.end());
  return *hi - *lo;
}

/// CSV header and rows: n,index,epsilon_over_J,degeneracy_flag
inline void write_spectrum_csv_header(std::ostream& os) { os << "n,index,epsilon_over_J,degeneracy_flag\n"; }

}  // namespace hcb
