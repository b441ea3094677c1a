#pragma once

// Thin RAII-free wrappers over the handful of LAPACK drivers used for dense
// symmetric work. All matrices are column-major Eigen::MatrixXd.

#include <Eigen/Dense>
#include <lapacke.h>
#include <string>
#include <vector>

#include "hcb/common.hpp"

namespace hcb::lapack {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // empty when values only
};

/// All eigenpairs of a symmetric matrix (MRRR). `a` is overwritten.
inline SymmetricEigen eigh(Eigen::MatrixXd& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  std::vector<lapack_int> support(2 * std::max<lapack_int>(n, 1));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                     out.values.data(), out.vectors.data(), n, support.data());
  if (info != 0 || found != n) throw ConvergenceError("dsyevr failed, info = " + std::to_string(info));
  return out;
}

/// Eigenvalues only (two-stage reduction). `a` is overwritten.
inline Eigen::VectorXd eigvalsh(Eigen::MatrixXd& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_dsyevd_2stage(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw ConvergenceError("dsyevd_2stage failed, info = " + std::to_string(info));
  return w;
}

/// Bunch-Kaufman LDL^T factorization of a symmetric (possibly indefinite) matrix.
class LdltFactor {
 public:
  /// Factorizes `a` in place (moved in). Throws SingularError on an exactly singular D.
  explicit LdltFactor(Eigen::MatrixXd a) : lu_(std::move(a)), pivots_(lu_.rows()) {
    const lapack_int n = static_cast<lapack_int>(lu_.rows());
    const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, lu_.data(), n, pivots_.data());
    if (info > 0) throw SingularError("matrix is singular (dsytrf info " + std::to_string(info) + ")");
    if (info < 0) throw DomainError("dsytrf argument error " + std::to_string(info));
  }

  /// Solves A x = b in place.
  void solve(Eigen::Ref<Eigen::VectorXd> b) const {
    const lapack_int n = static_cast<lapack_int>(lu_.rows());
    const lapack_int info =
        LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, lu_.data(), n, pivots_.data(), b.data(), n);
    if (info != 0) throw DomainError("dsytrs failed, info = " + std::to_string(info));
  }

  /// Number of negative eigenvalues of A (Sylvester inertia of D).
  Eigen::Index negative_count() const {
    const Eigen::Index n = lu_.rows();
    Eigen::Index neg = 0;
    for (Eigen::Index k = 0; k < n;) {
      if (pivots_[k] > 0) {
        if (lu_(k, k) < 0) ++neg;
        ++k;
      } else {
        // 2x2 block: one positive and one negative eigenvalue iff det < 0.
        const double a = lu_(k, k), b = lu_(k + 1, k), c = lu_(k + 1, k + 1);
        const double det = a * c - b * b;
        if (det < 0) {
          ++neg;
        } else if (a + c < 0) {
          neg += 2;
        }
        k += 2;
      }
    }
    return neg;
  }

  Eigen::Index dimension() const { return lu_.rows(); }

 private:
  Eigen::MatrixXd lu_;
  std::vector<lapack_int> pivots_;
};

}  // namespace hcb::lapack
