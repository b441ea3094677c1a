#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "hcb/common.hpp"
#include "hcb/sparse.hpp"

namespace hcb {

struct KrylovOptions {
  double tol = 1e-10;      // local error bound per accepted step
  int max_dimension = 30;  // Krylov subspace size
  int max_steps = 1000000;
  double min_step = 1e-12;
};

struct KrylovStats {
  int steps = 0;
  int rejected = 0;
  long matvecs = 0;
  double max_error = 0.0;
};

/// Short-iterative Lanczos propagator for psi -> exp(-i H t) psi, H hermitian
/// and time independent. Step size adapts to the a posteriori error
/// estimate beta_m |[exp(-i h T_m) e_1]_m|.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(const ComplexOperator& h, KrylovOptions opt = {}) : h_(h), opt_(opt) {
    if (!h.hermitian()) throw DomainError("Krylov propagation requires a hermitian operator");
    const double nb = std::max(h.norm_bound(), 1e-300);
    step_ = std::min(1.0, 4.0 / nb);
  }

  /// Advances psi in place by `duration` (>= 0).
  void advance(Eigen::VectorXcd& psi, double duration) {
    if (duration < 0) throw DomainError("negative evolution time");
    const Eigen::Index n = psi.size();
    if (n != h_.dimension()) throw DomainError("state and operator dimensions differ");
    const int mmax = int(std::min<Eigen::Index>(opt_.max_dimension, n));
    Eigen::MatrixXcd v(n, mmax + 1);
    Eigen::VectorXcd w(n);
    double done = 0.0;
    while (done < duration) {
      if (++stats_.steps > opt_.max_steps) throw ConvergenceError("Krylov propagation exceeded the step budget");
      const double nrm = psi.norm();
      if (nrm == 0.0) return;
      v.col(0) = psi / nrm;
      std::vector<double> alpha, beta;
      int m = 0;
      double tail = 0.0;  // beta_m, zero on exact breakdown
      for (int j = 0; j < mmax; ++j) {
        h_.apply(v.col(j), w);
        ++stats_.matvecs;
        for (int pass = 0; pass < 2; ++pass) {
          const Eigen::VectorXcd c = v.leftCols(j + 1).adjoint() * w;
          w.noalias() -= v.leftCols(j + 1) * c;
          if (pass == 0) alpha.push_back(c(j).real());
          else alpha.back() += c(j).real();
        }
        m = j + 1;
        const double b = w.norm();
        if (b < 1e-13 * std::max(1.0, std::abs(alpha.back()))) {
          tail = 0.0;
          break;
        }
        tail = b;
        if (j + 1 < mmax + 1) v.col(j + 1) = w / b;
        if (j + 1 < mmax) beta.push_back(b);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd e = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1)) : Eigen::VectorXd();
      tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      const Eigen::MatrixXd& s = tri.eigenvectors();
      const Eigen::VectorXd& theta = tri.eigenvalues();

      const double remaining = duration - done;
      double h = std::min(step_, remaining);
      const bool last = h == remaining;
      Eigen::VectorXcd y(m);
      double err = 0.0;
      bool rejected = false;
      for (;;) {
        Eigen::VectorXcd z(m);
        for (int k = 0; k < m; ++k) z(k) = std::exp(cplx(0.0, -h * theta(k))) * s(0, k);
        y = s * z;
        err = tail * std::abs(y(m - 1));
        if (err <= opt_.tol) break;
        ++stats_.rejected;
        rejected = true;
        h *= std::max(0.1, 0.8 * std::pow(opt_.tol / err, 1.0 / m));
        if (h < opt_.min_step) throw ConvergenceError("Krylov step size underflow");
      }
      psi.noalias() = v.leftCols(m) * y * nrm;
      done = (h == remaining) ? duration : done + h;
      stats_.max_error = std::max(stats_.max_error, err);
      if (rejected) {
        step_ = h;
      } else if (!last) {
        const double grow = err > 0 ? 0.8 * std::pow(opt_.tol / err, 1.0 / m) : 2.0;
        step_ = h * std::clamp(grow, 1.0, 2.0);
      }
    }
  }

  const KrylovStats& stats() const { return stats_; }

 private:
  const ComplexOperator& h_;
  KrylovOptions opt_;
  double step_;
  KrylovStats stats_;
};

/// exp(-i H t) applied to `psi`.
inline Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, const ComplexOperator& h, double duration,
                               KrylovOptions opt = {}) {
  Eigen::VectorXcd out = psi;
  KrylovPropagator(h, opt).advance(out, duration);
  return out;
}

}  // namespace hcb
