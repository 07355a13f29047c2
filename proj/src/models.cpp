#include "lrti/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrti {

RealVec laplacian_eigenvalues(int K) {
  RealVec out(K);
  for (int k = 1; k <= K; ++k) out(k - 1) = std::pow(std::numbers::pi * k, 2);
  return out;
}

RealMat cosine_potential_matrix(int K, int n) {
  RealMat v = RealMat::Zero(K, K);
  for (int k1 = 1; k1 <= K; ++k1) {
    for (int k2 = 1; k2 <= K; ++k2) {
      Real e = 0;
      if (std::abs(k1 - k2) == n) e += 0.5;
      if (k1 + k2 == n) e -= 0.5;
      if (n == 0 && k1 == k2) e = 1;  // cos(0) = 1: identity
      v(k1 - 1, k2 - 1) = e;
    }
  }
  return v;
}

RealMat derivative_coupling_matrix(int K) {
  RealMat b = RealMat::Zero(K, K);
  for (int k1 = 1; k1 <= K; ++k1)
    for (int k2 = 1; k2 <= K; ++k2)
      if (k1 != k2 && (k1 + k2) % 2 == 1)
        b(k1 - 1, k2 - 1) = 4.0 * k1 * k2 / (static_cast<Real>(k2) * k2 - static_cast<Real>(k1) * k1);
  return b;
}

SchrodingerModel build_schrodinger(int K, int n, int m, Real potential_scale) {
  if (n < 0 || m < 0) throw std::invalid_argument("potential frequencies must be nonnegative");
  if (K < std::max(n, m) + 1) throw std::invalid_argument("K must exceed the potential frequencies");
  SchrodingerModel model;
  model.K = K;
  model.n = n;
  model.m = m;
  model.potential_scale = potential_scale;
  model.lap_eigs = laplacian_eigenvalues(K);
  if (potential_scale != 0)
    model.potential_terms.emplace_back(potential_scale * cosine_potential_matrix(K, n),
                                       cosine_potential_matrix(K, m));
  model.C_V = std::abs(potential_scale);
  return model;
}

RealVec default_source_profile(int K) {
  RealVec f = RealVec::Zero(K);
  for (int k = 1; k <= std::min(K, 10); ++k) f(k - 1) = k;
  return f;
}

ParabolicModel build_parabolic(int K, Real a, Real b, const RealVec& f) {
  if (K < 1) throw std::invalid_argument("K must be positive");
  if (f.size() != K) throw std::invalid_argument("source profile length must equal K");
  // The diffusion tensor [[a, b], [b, a]] must be positive definite.
  if (!(a > 0) || !(a > std::abs(b)))
    throw std::invalid_argument("ellipticity violated: need a > |b| and a > 0");
  ParabolicModel model;
  model.K = K;
  model.a = a;
  model.b = b;
  model.lap_eigs = laplacian_eigenvalues(K);
  model.B = derivative_coupling_matrix(K);
  model.f = f;
  model.source = LowRankMatrix<Real>::from_factors(f, f);
  return model;
}

LowRankMatrix<Complex> schrodinger_initial(int K) {
  Vec<Complex> v(K);
  for (int k = 1; k <= K; ++k) v(k - 1) = 1.0 / k;
  v /= v.norm();
  return LowRankMatrix<Complex>::from_factors(v, v);
}

LowRankMatrix<Real> parabolic_initial(int K) {
  if (K < 30) throw std::invalid_argument("parabolic initial data needs K >= 30");
  RealMat x = RealMat::Zero(K, 10);
  for (int i = 0; i < 10; ++i) x(20 + i, i) = 1;
  return LowRankMatrix<Real>::from_factors(x, x);
}

LowRankMatrix<Complex> twist(const SchrodingerModel& model, Real s, const LowRankMatrix<Complex>& u) {
  return apply_diag_exp(model.lap_eigs, model.lap_eigs, Complex(0, s), u);
}

LowRankMatrix<Complex> untwist(const SchrodingerModel& model, Real t,
                               const LowRankMatrix<Complex>& v) {
  return apply_diag_exp(model.lap_eigs, model.lap_eigs, Complex(0, -t), v);
}

LowRankMatrix<Complex> schrodinger_F(const SchrodingerModel& model, Real s,
                                     const LowRankMatrix<Complex>& v) {
  if (v.rows() != model.K || v.cols() != model.K) throw ShapeError("state shape does not match model");
  if (v.rank() == 0 || model.potential_terms.empty()) return LowRankMatrix<Complex>(model.K, model.K);
  const auto u = untwist(model, s, v);
  LowRankMatrix<Complex> vu(model.K, model.K);
  for (const auto& [p, q] : model.potential_terms)
    vu = add(vu, apply_kron<Complex>(p.cast<Complex>(), q.cast<Complex>(), u));
  return scale(twist(model, s, vu), Complex(0, -1));
}

LowRankMatrix<Real> parabolic_propagate(const ParabolicModel& model, Real tau,
                                        const LowRankMatrix<Real>& u) {
  if (tau < 0) throw std::domain_error("negative propagation time");
  return apply_diag_exp(model.lap_eigs, model.lap_eigs, -model.a * tau, u);
}

LowRankMatrix<Real> parabolic_G(const ParabolicModel& model, const LowRankMatrix<Real>& u) {
  if (model.b == 0 || u.rank() == 0) return LowRankMatrix<Real>(u.rows(), u.cols());
  return scale(apply_kron(model.B, model.B, u), 2 * model.b);
}

}  // namespace lrti
