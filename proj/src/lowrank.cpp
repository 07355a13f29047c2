#include "lrti/lowrank.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace lrti {

namespace {

template <class S>
struct ThinQR {
  Mat<S> q;  // m x k, orthonormal columns
  Mat<S> r;  // k x p, upper trapezoidal
};

template <class S>
ThinQR<S> thin_qr(const Mat<S>& x) {
  const auto m = x.rows(), p = x.cols();
  const auto k = std::min(m, p);
  Eigen::HouseholderQR<Mat<S>> qr(x);
  ThinQR<S> out;
  out.q = qr.householderQ() * Mat<S>::Identity(m, k);
  out.r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  return out;
}

// The floor is relative to the larger of the leading value and the operand
// scale, so that cancellation in sums does not leave rounding noise behind.
Eigen::Index noise_rank(const RealVec& sigma, Real scale = 0) {
  if (sigma.size() == 0) return 0;
  const Real floor = kNoiseFloor * std::max(sigma(0), scale);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > floor && sigma(r) > 0) ++r;
  return r;
}

// SVD-form of x * y^H with truncation: noise floor always, then tail energy
// <= delta^2 when delta > 0, then individual values <= drop_tol.
template <class S>
LowRankMatrix<S> compress(const Mat<S>& x, const Mat<S>& y, Real delta, Real drop_tol,
                          Real scale = 0) {
  if (x.cols() != y.cols()) throw ShapeError("factor column counts differ");
  if (x.cols() == 0) return LowRankMatrix<S>(x.rows(), y.rows());
  auto qx = thin_qr(x);
  auto qy = thin_qr(y);
  const Mat<S> core = qx.r * qy.r.adjoint();
  Eigen::BDCSVD<Mat<S>> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RealVec sigma = svd.singularValues();
  Eigen::Index r = noise_rank(sigma, scale);
  if (delta > 0) r = std::min(r, recompression_rank(sigma.head(r), delta));
  while (r > 0 && sigma(r - 1) <= drop_tol) --r;
  return LowRankMatrix<S>::from_svd(qx.q * svd.matrixU().leftCols(r), sigma.head(r),
                                    qy.q * svd.matrixV().leftCols(r));
}

template <class S>
void check_same_shape(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("shape mismatch");
}

template <class S>
Mat<S> scaled_left(const LowRankMatrix<S>& a) {
  return a.left() * a.sigma().template cast<S>().asDiagonal();
}

}  // namespace

template <class S>
LowRankMatrix<S>::LowRankMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), left_(rows, 0), right_(cols, 0), sigma_(0) {}

template <class S>
LowRankMatrix<S> LowRankMatrix<S>::from_svd(Mat<S> left, RealVec sigma, Mat<S> right) {
  if (left.cols() != sigma.size() || right.cols() != sigma.size())
    throw ShapeError("SVD factor sizes disagree");
  LowRankMatrix out;
  out.rows_ = left.rows();
  out.cols_ = right.rows();
  out.left_ = std::move(left);
  out.sigma_ = std::move(sigma);
  out.right_ = std::move(right);
  return out;
}

template <class S>
LowRankMatrix<S> LowRankMatrix<S>::from_factors(const Mat<S>& x, const Mat<S>& y, Real drop_tol) {
  return compress(x, y, 0, drop_tol);
}

template <class S>
Mat<S> LowRankMatrix<S>::to_dense() const {
  if (rank() == 0) return Mat<S>::Zero(rows_, cols_);
  return scaled_left(*this) * right_.adjoint();
}

template <class S>
LowRankMatrix<S> from_dense(const Mat<S>& a, Real drop_tol) {
  if (drop_tol < 0) throw std::invalid_argument("drop_tol must be nonnegative");
  if (!a.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
  if (a.size() == 0) return LowRankMatrix<S>(a.rows(), a.cols());
  Eigen::BDCSVD<Mat<S>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVec& sigma = svd.singularValues();
  Eigen::Index r = noise_rank(sigma);
  while (r > 0 && sigma(r - 1) <= drop_tol) --r;
  return LowRankMatrix<S>::from_svd(svd.matrixU().leftCols(r), sigma.head(r),
                                    svd.matrixV().leftCols(r));
}

Eigen::Index recompression_rank(const RealVec& sigma, Real delta) {
  const auto n = sigma.size();
  const Real budget = delta * delta;
  Real tail = 0;
  Eigen::Index r = n;
  // Walk down from full rank while dropping one more value keeps tail <= budget.
  while (r > 0 && tail + sigma(r - 1) * sigma(r - 1) <= budget) {
    tail += sigma(r - 1) * sigma(r - 1);
    --r;
  }
  return r;
}

template <class S>
LowRankMatrix<S> add(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b, Real delta) {
  return add_scaled(a, S(1), b, delta);
}

template <class S>
LowRankMatrix<S> add_scaled(const LowRankMatrix<S>& a, S c, const LowRankMatrix<S>& b,
                            Real delta) {
  check_same_shape(a, b);
  if (b.rank() == 0 || c == S(0)) return delta > 0 ? recompress(a, delta) : a;
  if (a.rank() == 0) {
    auto cb = scale(b, c);
    return delta > 0 ? recompress(cb, delta) : cb;
  }
  Mat<S> x(a.rows(), a.rank() + b.rank());
  Mat<S> y(a.cols(), a.rank() + b.rank());
  x << scaled_left(a), c * scaled_left(b);
  y << a.right(), b.right();
  return compress(x, y, delta, 0, std::max(a.sigma()(0), std::abs(c) * b.sigma()(0)));
}

template <class S>
LowRankMatrix<S> add_outer(const LowRankMatrix<S>& a, const Mat<S>& x, const Mat<S>& y,
                           Real delta) {
  if (x.rows() != a.rows() || y.rows() != a.cols()) throw ShapeError("factor shape mismatch");
  if (x.cols() != y.cols()) throw ShapeError("factor column counts differ");
  Mat<S> xx(a.rows(), a.rank() + x.cols());
  Mat<S> yy(a.cols(), a.rank() + y.cols());
  xx << scaled_left(a), x;
  yy << a.right(), y;
  const Real scale = a.rank() > 0 ? a.sigma()(0) : 0;
  return compress(xx, yy, delta, 0, std::max(scale, x.norm() * y.norm()));
}

template <class S>
LowRankMatrix<S> subtract(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b, Real delta) {
  return add_scaled(a, S(-1), b, delta);
}

template <class S>
LowRankMatrix<S> scale(const LowRankMatrix<S>& a, S c) {
  const Real mag = std::abs(c);
  if (mag == 0 || a.rank() == 0) return LowRankMatrix<S>(a.rows(), a.cols());
  const S phase = c / mag;
  return LowRankMatrix<S>::from_svd(a.left() * phase, a.sigma() * mag, a.right());
}

template <class S>
LowRankMatrix<S> apply_kron(const Mat<S>& p, const Mat<S>& q, const LowRankMatrix<S>& a) {
  if (p.cols() != a.rows() || q.cols() != a.cols()) throw ShapeError("operator shape mismatch");
  if (a.rank() == 0) return LowRankMatrix<S>(p.rows(), q.rows());
  return compress<S>(p * scaled_left(a), q.conjugate() * a.right(), 0, 0);
}

template <class S>
LowRankMatrix<S> apply_diag_exp(const RealVec& d_left, const RealVec& d_right, S z,
                                const LowRankMatrix<S>& a) {
  if (d_left.size() != a.rows() || d_right.size() != a.cols())
    throw ShapeError("diagonal length mismatch");
  if constexpr (!is_complex_v<S>) {
    if ((z * d_left.array() > 0).any() || (z * d_right.array() > 0).any())
      throw std::domain_error("growing real exponential (backward heat flow)");
  }
  if (a.rank() == 0 || z == S(0)) return a;
  const Vec<S> el = (z * d_left.template cast<S>().array()).exp().matrix();
  const Vec<S> er = (z * d_right.template cast<S>().array()).exp().matrix();
  if constexpr (is_complex_v<S>) {
    if (z.real() == 0) {
      // Unitary diagonal: factors stay orthonormal, no re-orthogonalization.
      return LowRankMatrix<S>::from_svd(el.asDiagonal() * a.left(), a.sigma(),
                                        er.conjugate().asDiagonal() * a.right());
    }
  }
  return compress<S>(el.asDiagonal() * scaled_left(a), er.conjugate().asDiagonal() * a.right(), 0,
                     0);
}

template <class S>
LowRankMatrix<S> soft_threshold(const LowRankMatrix<S>& a, Real alpha) {
  if (alpha < 0) throw std::invalid_argument("threshold must be nonnegative");
  if (alpha == 0) return a;
  Eigen::Index r = 0;
  while (r < a.rank() && a.sigma()(r) > alpha) ++r;
  return LowRankMatrix<S>::from_svd(a.left().leftCols(r),
                                    (a.sigma().head(r).array() - alpha).matrix(),
                                    a.right().leftCols(r));
}

template <class S>
LowRankMatrix<S> hard_threshold(const LowRankMatrix<S>& a, Real alpha) {
  if (alpha < 0) throw std::invalid_argument("threshold must be nonnegative");
  Eigen::Index r = 0;
  while (r < a.rank() && a.sigma()(r) > alpha) ++r;
  return LowRankMatrix<S>::from_svd(a.left().leftCols(r), a.sigma().head(r),
                                    a.right().leftCols(r));
}

template <class S>
LowRankMatrix<S> recompress(const LowRankMatrix<S>& a, Real delta) {
  if (delta < 0) throw std::invalid_argument("tolerance must be nonnegative");
  const auto r = recompression_rank(a.sigma(), delta);
  if (r == a.rank()) return a;
  return LowRankMatrix<S>::from_svd(a.left().leftCols(r), a.sigma().head(r),
                                    a.right().leftCols(r));
}

template <class S>
Real frobenius_dist(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b) {
  check_same_shape(a, b);
  if (a.rank() == 0) return b.norm();
  if (b.rank() == 0) return a.norm();
  // ||[La Lb] diag(sa, -sb) [Ra Rb]^H||_F evaluated on the QR cores.
  Mat<S> x(a.rows(), a.rank() + b.rank());
  Mat<S> y(a.cols(), a.rank() + b.rank());
  x << scaled_left(a), -scaled_left(b);
  y << a.right(), b.right();
  auto qx = thin_qr(x);
  auto qy = thin_qr(y);
  return (qx.r * qy.r.adjoint()).norm();
}

template <class S>
Real mirsky_gap(const LowRankMatrix<S>& a, const LowRankMatrix<S>& b) {
  check_same_shape(a, b);
  const auto n = std::max(a.rank(), b.rank());
  RealVec sa = RealVec::Zero(n), sb = RealVec::Zero(n);
  sa.head(a.rank()) = a.sigma();
  sb.head(b.rank()) = b.sigma();
  return (sa - sb).norm();
}

#define LRTI_INSTANTIATE(S)                                                                     \
  template class LowRankMatrix<S>;                                                              \
  template LowRankMatrix<S> from_dense(const Mat<S>&, Real);                                    \
  template LowRankMatrix<S> add(const LowRankMatrix<S>&, const LowRankMatrix<S>&, Real);        \
  template LowRankMatrix<S> add_scaled(const LowRankMatrix<S>&, S, const LowRankMatrix<S>&,     \
                                       Real);                                                   \
  template LowRankMatrix<S> subtract(const LowRankMatrix<S>&, const LowRankMatrix<S>&, Real);   \
  template LowRankMatrix<S> add_outer(const LowRankMatrix<S>&, const Mat<S>&, const Mat<S>&,    \
                                      Real);                                                    \
  template LowRankMatrix<S> scale(const LowRankMatrix<S>&, S);                                  \
  template LowRankMatrix<S> apply_kron(const Mat<S>&, const Mat<S>&, const LowRankMatrix<S>&);  \
  template LowRankMatrix<S> apply_diag_exp(const RealVec&, const RealVec&, S,                   \
                                           const LowRankMatrix<S>&);                            \
  template LowRankMatrix<S> soft_threshold(const LowRankMatrix<S>&, Real);                      \
  template LowRankMatrix<S> hard_threshold(const LowRankMatrix<S>&, Real);                      \
  template LowRankMatrix<S> recompress(const LowRankMatrix<S>&, Real);                          \
  template Real frobenius_dist(const LowRankMatrix<S>&, const LowRankMatrix<S>&);               \
  template Real mirsky_gap(const LowRankMatrix<S>&, const LowRankMatrix<S>&);

LRTI_INSTANTIATE(Real)
LRTI_INSTANTIATE(Complex)

#undef LRTI_INSTANTIATE

}  // namespace lrti
