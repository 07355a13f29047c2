#pragma once
// Dense reference implementations used as test oracles. They work on
// vectorized K^2 states (column-major vec, so vec(P U Q^T) = kron(Q, P) vec(U))
// and build every operator from numerically integrated matrix entries rather
// than from the library's closed forms.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lrti/lowrank.hpp"
#include "lrti/quadrature.hpp"

namespace oracle {

using lrti::Complex;
using lrti::Real;
using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using CVec = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
inline constexpr Real pi = std::numbers::pi;

// (P_n(x), P_n'(x)) by the three-term recurrence.
inline std::pair<Real, Real> legendre(int n, Real x) {
  Real p0 = 1, p1 = x;
  if (n == 0) return {1, 0};
  for (int k = 2; k <= n; ++k) {
    const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1)};  // interior points only
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration from
// Chebyshev-like initial guesses.
struct Rule1D {
  RVec x, w;
};
inline Rule1D gauss(int n) {
  Rule1D r{RVec(n), RVec(n)};
  for (int i = 0; i < n; ++i) {
    Real x = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const Real dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const Real dp = legendre(n, x).second;
    r.x(n - 1 - i) = x;
    r.w(n - 1 - i) = 2 / ((1 - x * x) * dp * dp);
  }
  return r;
}

// Composite Gauss quadrature of f over [a, b].
inline Real integrate(const std::function<Real(Real)>& f, Real a, Real b, int panels = 64, int n = 20) {
  static const Rule1D g = gauss(20);
  const Rule1D& r = n == 20 ? g : gauss(n);
  Real sum = 0;
  const Real w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const Real lo = a + p * w;
    for (int i = 0; i < r.x.size(); ++i) sum += w / 2 * r.w(i) * f(lo + w / 2 * (r.x(i) + 1));
  }
  return sum;
}

// Lagrange basis polynomial m on the given nodes.
inline Real lagrange(const RVec& nodes, int m, Real t) {
  Real v = 1;
  for (int k = 0; k < nodes.size(); ++k)
    if (k != m) v *= (t - nodes(k)) / (nodes(m) - nodes(k));
  return v;
}

// omega(j, m) = int_{t0}^{t_j} l_m, by numerical integration.
inline RMat integration_matrix(const RVec& nodes, Real t0) {
  const auto J = nodes.size();
  RMat om(J, J);
  for (int j = 0; j < J; ++j)
    for (int m = 0; m < J; ++m) om(j, m) = integrate([&](Real t) { return lagrange(nodes, m, t); }, t0, nodes(j), 4);
  return om;
}

// int_0^1 2 w(x) sin(k1 pi x) sin(k2 pi x) dx.
inline RMat sine_matrix(int K, const std::function<Real(Real)>& w) {
  RMat m(K, K);
  for (int a = 1; a <= K; ++a)
    for (int b = 1; b <= K; ++b)
      m(a - 1, b - 1) = integrate([&](Real x) { return 2 * w(x) * std::sin(a * pi * x) * std::sin(b * pi * x); }, 0, 1);
  return m;
}

// int_0^1 2 (d/dx sin(k1 pi x)) sin(k2 pi x) dx.
inline RMat derivative_matrix(int K) {
  RMat m(K, K);
  for (int a = 1; a <= K; ++a)
    for (int b = 1; b <= K; ++b)
      m(a - 1, b - 1) =
          integrate([&](Real x) { return 2 * a * pi * std::cos(a * pi * x) * std::sin(b * pi * x); }, 0, 1);
  return m;
}

// (pi k1)^2 + (pi k2)^2 in vec order.
inline RVec laplace_symbol(int K) {
  RVec mu(K * K);
  for (int k2 = 1; k2 <= K; ++k2)
    for (int k1 = 1; k1 <= K; ++k1) mu((k2 - 1) * K + (k1 - 1)) = pi * pi * (k1 * k1 + k2 * k2);
  return mu;
}

template <class M>
M kron(const M& a, const M& b) {
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <class S>
Eigen::Matrix<S, Eigen::Dynamic, 1> vec(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& u) {
  return Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(u.data(), u.size());
}
template <class S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> unvec(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, int K) {
  return Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>(v.data(), K, K);
}

// i u_t = -Delta u + scale cos(n pi x1) cos(m pi x2) u in twisted variables.
struct Schrodinger {
  int K;
  RVec mu;
  CMat V;  // potential on vec states

  Schrodinger(int K_, int n, int m, Real scale) : K(K_), mu(laplace_symbol(K_)) {
    const RMat vx = sine_matrix(K, [n](Real x) { return std::cos(n * pi * x); });
    const RMat vy = sine_matrix(K, [m](Real x) { return std::cos(m * pi * x); });
    V = (scale * kron<RMat>(vy, vx)).cast<Complex>();
  }
  CVec phase(Real s) const {
    CVec d(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) d(i) = std::exp(Complex(0, s * mu(i)));
    return d;
  }
  // F_s = -i e^{-i s Delta} V e^{i s Delta} with e^{-i s Delta} = diag(e^{i s mu}).
  CMat F(Real s) const {
    return Complex(0, -1) * phase(s).asDiagonal() * V * phase(-s).asDiagonal();
  }
  CMat hamiltonian() const { return CMat(mu.cast<Complex>().asDiagonal()) + V; }
  // exp(-i t H) u by Hermitian eigendecomposition.
  CVec exact(const CVec& u0, Real t) const {
    Eigen::SelfAdjointEigenSolver<CMat> es(hamiltonian());
    CVec ph(u0.size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(Complex(0, -t * es.eigenvalues()(i)));
    return es.eigenvectors() * (ph.asDiagonal() * (es.eigenvectors().adjoint() * u0));
  }
};

// Picard map on stacked stages, times measured from t0.
inline std::vector<CVec> picard(const Schrodinger& p, const RVec& nodes, Real t0, const CVec& u0,
                                const std::vector<CVec>& v) {
  const RMat om = integration_matrix(nodes, t0);
  std::vector<CVec> out;
  for (int j = 0; j < nodes.size(); ++j) {
    CVec acc = u0;
    for (int m = 0; m < nodes.size(); ++m) acc += om(j, m) * (p.F(nodes(m) - t0) * v[m]);
    out.push_back(acc);
  }
  return out;
}

// Direct solve of the collocation system v_j = u0 + sum_m omega(j,m) F v_m.
inline std::vector<CVec> collocation_solve(const Schrodinger& p, const RVec& nodes, Real t0, const CVec& u0) {
  const int J = static_cast<int>(nodes.size());
  const int n = static_cast<int>(u0.size());
  const RMat om = integration_matrix(nodes, t0);
  CMat sys = CMat::Identity(J * n, J * n);
  CVec rhs(J * n);
  for (int j = 0; j < J; ++j) {
    rhs.segment(j * n, n) = u0;
    for (int m = 0; m < J; ++m) sys.block(j * n, m * n, n, n) -= om(j, m) * p.F(nodes(m) - t0);
  }
  const CVec x = sys.partialPivLu().solve(rhs);
  std::vector<CVec> out;
  for (int j = 0; j < J; ++j) out.push_back(x.segment(j * n, n));
  return out;
}

// u_t = -a (S U + U S) + 2b B U B^T + f f^T on vec states.
struct Parabolic {
  int K;
  Real a, b;
  RVec mu;
  RMat G;
  RVec source;

  Parabolic(int K_, Real a_, Real b_, const RVec& f) : K(K_), a(a_), b(b_), mu(laplace_symbol(K_)) {
    const RMat B = derivative_matrix(K);
    G = 2 * b * kron<RMat>(B, B);
    const RMat ff = f * f.transpose();
    source = vec<Real>(ff);
  }
  RVec decay(Real tau) const { return (-a * tau * mu.array()).exp().matrix(); }
};

// int_{t_{j-1}}^{t_j} E(t_j - s) (sum_m l_m(s) G v_m + f f^T) ds, integrated
// entrywise with composite Gauss quadrature.
inline RVec duhamel(const Parabolic& p, const RVec& nodes, Real t0, const std::vector<RVec>& v, int j) {
  static const Rule1D r = gauss(20);
  const int J = static_cast<int>(nodes.size());
  std::vector<RVec> g;
  for (const auto& x : v) g.push_back(p.G * x);
  const Real lo = j == 0 ? t0 : nodes(j - 1), hi = nodes(j);
  RVec acc = RVec::Zero(p.mu.size());
  const int panels = 32;
  const Real w = (hi - lo) / panels;
  for (int q = 0; q < panels; ++q)
    for (int i = 0; i < r.x.size(); ++i) {
      const Real s = lo + q * w + w / 2 * (r.x(i) + 1);
      RVec integrand = p.source;
      for (int m = 0; m < J; ++m) integrand += lagrange(nodes, m, s) * g[m];
      acc += (w / 2 * r.w(i)) * (p.decay(hi - s).asDiagonal() * integrand);
    }
  return acc;
}

inline Real step(const RVec& nodes, Real t0, int j) { return nodes(j) - (j == 0 ? t0 : nodes(j - 1)); }

// Phi_j = E(tau_j) Phi_{j-1} + duhamel_j(v).
inline std::vector<RVec> parabolic_phi(const Parabolic& p, const RVec& nodes, Real t0, const RVec& u0,
                                       const std::vector<RVec>& v) {
  std::vector<RVec> out;
  RVec row = u0;
  for (int j = 0; j < nodes.size(); ++j) {
    row = p.decay(step(nodes, t0, j)).asDiagonal() * row + duhamel(p, nodes, t0, v, j);
    out.push_back(row);
  }
  return out;
}

// Fixed point of the affine map parabolic_phi, by assembling its matrix.
inline std::vector<RVec> parabolic_solve(const Parabolic& p, const RVec& nodes, Real t0, const RVec& u0) {
  const int J = static_cast<int>(nodes.size());
  const int n = static_cast<int>(u0.size());
  const std::vector<RVec> zeros(J, RVec::Zero(n));
  const auto offset = parabolic_phi(p, nodes, t0, u0, zeros);
  const auto source_only = parabolic_phi(p, nodes, t0, RVec::Zero(n), zeros);
  const auto homogeneous = [&](const std::vector<RVec>& v) {
    auto y = parabolic_phi(p, nodes, t0, RVec::Zero(n), v);
    for (int j = 0; j < J; ++j) y[j] -= source_only[j];
    return y;
  };
  RMat sys = RMat::Identity(J * n, J * n);
  for (int c = 0; c < J * n; ++c) {
    std::vector<RVec> e = zeros;
    e[c / n](c % n) = 1;
    const auto col = homogeneous(e);
    for (int j = 0; j < J; ++j) sys.block(j * n, c, n, 1) -= col[j];
  }
  RVec rhs(J * n);
  for (int j = 0; j < J; ++j) rhs.segment(j * n, n) = offset[j];
  const RVec x = sys.partialPivLu().solve(rhs);
  std::vector<RVec> out;
  for (int j = 0; j < J; ++j) out.push_back(x.segment(j * n, n));
  return out;
}

// Random K x K matrix of the given rank.
template <class S>
lrti::LowRankMatrix<S> random_low_rank(std::mt19937_64& rng, int rows, int cols, int rank) {
  std::normal_distribution<Real> nd;
  lrti::Mat<S> x(rows, rank), y(cols, rank);
  auto fill = [&](lrti::Mat<S>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if constexpr (std::is_same_v<S, Complex>) m.data()[i] = Complex(nd(rng), nd(rng));
      else m.data()[i] = nd(rng);
    }
  };
  fill(x);
  fill(y);
  return lrti::LowRankMatrix<S>::from_factors(x, y);
}

inline Real rel(Real err, Real scale) { return err / std::max(scale, Real(1e-300)); }

}  // namespace oracle
