#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <type_traits>
#include <vector>

#include "hcb/common.hpp"

namespace hcb {

namespace detail {
inline double conj_if(double v) { return v; }
inline cplx conj_if(cplx v) { return std::conj(v); }
}  // namespace detail

/// Square operator in compressed-sparse-row storage.
template <class Scalar>
class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Triplet = Eigen::Triplet<Scalar, int>;

  SparseOperator() = default;

  /// Builds from triplets (duplicates summed). When `hermitian` is set the
  /// symmetry |H - H^dag| <= 1e-12 is verified: every row up to dimension
  /// 4096, every seventh row above that.
  SparseOperator(Eigen::Index dim, const std::vector<Triplet>& triplets, bool hermitian)
      : matrix_(dim, dim), hermitian_(hermitian) {
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
    matrix_.makeCompressed();
    if (hermitian_) {
      const double dev = hermitian_deviation(dim <= 4096 ? 1 : 7);
      if (dev > 1e-12) throw DomainError("operator flagged hermitian deviates by " + std::to_string(dev));
    }
  }

  Eigen::Index dimension() const { return matrix_.rows(); }
  bool hermitian() const { return hermitian_; }
  const Matrix& matrix() const { return matrix_; }
  Eigen::Index nonzeros() const { return matrix_.nonZeros(); }

  Scalar coeff(Eigen::Index i, Eigen::Index j) const { return matrix_.coeff(i, j); }

  /// y = H x
  template <class In, class Out>
  void apply(const In& x, Out& y) const {
    y.noalias() = matrix_ * x;
  }

  Eigen::MatrixXd dense_real() const
    requires std::is_same_v<Scalar, double>
  {
    return Eigen::MatrixXd(matrix_);
  }

  /// Largest absolute row sum; an upper bound on the spectral norm.
  double norm_bound() const {
    double best = 0.0;
    for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
      double s = 0.0;
      for (typename Matrix::InnerIterator it(matrix_, r); it; ++it) s += std::abs(it.value());
      best = std::max(best, s);
    }
    return best;
  }

  double hermitian_deviation(int row_stride = 1) const {
    double dev = 0.0;
    for (Eigen::Index r = 0; r < matrix_.outerSize(); r += row_stride)
      for (typename Matrix::InnerIterator it(matrix_, r); it; ++it)
        dev = std::max(dev, std::abs(it.value() - detail::conj_if(matrix_.coeff(it.col(), r))));
    return dev;
  }

  /// Coordinate-list dump (row col re im), one entry per line.
  void write_coo(std::ostream& os) const {
    for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r)
      for (typename Matrix::InnerIterator it(matrix_, r); it; ++it) {
        const cplx v(it.value());
        os << r << ' ' << it.col() << ' ' << v.real() << ' ' << v.imag() << '\n';
      }
  }

 private:
  Matrix matrix_;
  bool hermitian_ = false;
};

using RealOperator = SparseOperator<double>;
using ComplexOperator = SparseOperator<cplx>;

}  // namespace hcb
