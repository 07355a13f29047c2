#pragma once

#include <complex>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace lrti {

using Real = double;
using Complex = std::complex<double>;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
using RealVec = Vec<Real>;
using RealMat = Mat<Real>;

template <class S>
inline constexpr bool is_complex_v = !std::is_same_v<S, Real>;

/// Thrown when operands of a low-rank operation do not fit together.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Singular values at or below this fraction of the largest one are dropped
/// by every factorization.
inline constexpr Real kNoiseFloor = 1e-14;

/// A matrix held in truncated SVD form  left * diag(sigma) * right^H.
///
/// The columns of `left` and `right` are orthonormal, `sigma` is strictly
/// positive and nonincreasing. Rank zero represents the zero matrix. Every
/// operation returns a new value; inputs are never modified.
template <class S>
class LowRankMatrix {
 public:
  LowRankMatrix() = default;
  /// Zero matrix of the given shape.
  LowRankMatrix(Eigen::Index rows, Eigen::Index cols);

  /// Takes factors that already satisfy the class invariants.
  static LowRankMatrix from_svd(Mat<S> left, RealVec sigma, Mat<S> right);

  /// Builds the SVD form of  x * y^H  for arbitrary (non-orthogonal) factors
  /// with matching column counts, discarding singular values <= drop_tol.
  static LowRankMatrix from_factors(const Mat<S>& x, const Mat<S>& y, Real drop_tol = 0);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  Eigen::Index rank() const { return sigma_.size(); }

  const Mat<S>& left() const { return left_; }
  const RealVec& sigma() const { return sigma_; }
  const Mat<S>& right() const { return right_; }

  Real norm() const { return sigma_.norm(); }
  Real max_singular_value() const { return rank() ? sigma_(0) : Real(0); }

  Mat<S> to_dense() const;

 private:
  Eigen::Index rows_ = 0, cols_ = 0;
  Mat<S> left_, right_;
  RealVec sigma_;
};

template <class S>
LowRankMatrix<S> from_dense(const Mat<S>& a, Real drop_tol = 0);

/// Exact sum followed by re-orthogonalization; when `delta > 0` the result is
/// additionally recompressed to tolerance `delta`.
template <class S>
LowRankMatrix<S> add(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b, Real delta = 0);

/// a + c * b, recompressed to `delta`.
template <class S>
LowRankMatrix<S> add_scaled(const LowRankMatrix<S>& a, S c, const LowRankMatrix<S>& b,
                            Real delta = 0);

/// a + x * y^H for raw factors x, y, recompressed to `delta`.
template <class S>
LowRankMatrix<S> add_outer(const LowRankMatrix<S>& a, const Mat<S>& x, const Mat<S>& y,
                           Real delta = 0);

/// a - b, recompressed to `delta`.
template <class S>
LowRankMatrix<S> subtract(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b, Real delta = 0);

template <class S>
LowRankMatrix<S> scale(const LowRankMatrix<S>& a, S c);

/// P * A * Q^T.
template <class S>
LowRankMatrix<S> apply_kron(const Mat<S>& p, const Mat<S>& q, const LowRankMatrix<S>& a);

/// diag(exp(z*d_left)) * A * diag(exp(z*d_right)).
///
/// For real matrices any entry with z*d > 0 is rejected: the only real use
/// is the heat semigroup, which must never be run backwards.
template <class S>
LowRankMatrix<S> apply_diag_exp(const RealVec& d_left, const RealVec& d_right, S z,
                                const LowRankMatrix<S>& a);

template <class S>
LowRankMatrix<S> soft_threshold(const LowRankMatrix<S>& a, Real alpha);
template <class S>
LowRankMatrix<S> hard_threshold(const LowRankMatrix<S>& a, Real alpha);
/// Minimal-rank truncation with tail energy sum_{k>r} sigma_k^2 <= delta^2.
template <class S>
LowRankMatrix<S> recompress(const LowRankMatrix<S>& a, Real delta);
/// Rank that `recompress(sigma, delta)` would keep.
Eigen::Index recompression_rank(const RealVec& sigma, Real delta);

template <class S>
Real frobenius_dist(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b);

template <class S>
Real mirsky_gap(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b);

template <class S>
LowRankMatrix<S> operator+(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b) {
  return add(a, b);
}
template <class S>
LowRankMatrix<S> operator-(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b) {
  return subtract(a, b);
}

}  // namespace lrti
