#pragma once

#include <utility>
#include <vector>

#include "lrti/lowrank.hpp"

namespace lrti {

/// Galerkin discretization on [0,1]^2 with the orthonormal Dirichlet sine basis
/// sqrt(2) sin(k pi x), k = 1..K, of
///   i u_t = -Delta u + V u,   V(x1, x2) = scale * cos(n pi x1) cos(m pi x2).
///
/// Coefficient matrices are K x K with row index along x1.
struct SchrodingerModel {
  int K = 0;
  int n = 1, m = 1;
  Real potential_scale = 1;
  RealVec lap_eigs;  ///< (pi k)^2, the stiffness matrix diagonal
  /// Kronecker terms of the potential operator: sum_l  P_l (x) Q_l.
  std::vector<std::pair<RealMat, RealMat>> potential_terms;
  Real C_V = 1;  ///< bound on the potential operator norm

  int potential_rank() const { return static_cast<int>(potential_terms.size()); }
};

/// Anisotropic heat equation
///   u_t = div([[a, b], [b, a]] grad u) + f (x) f
/// in the same basis:  u' = -a (S U + U S) + 2b B U B^T + f f^T.
struct ParabolicModel {
  int K = 0;
  Real a = 1;
  Real b = 0;
  RealVec lap_eigs;
  RealMat B;  ///< first-derivative coupling, antisymmetric
  RealVec f;
  LowRankMatrix<Real> source;  ///< f (x) f
};

/// 1D potential matrix: int_0^1 2 cos(n pi x) sin(k1 pi x) sin(k2 pi x) dx.
RealMat cosine_potential_matrix(int K, int n);
/// int_0^1 2 (d/dx sin(k1 pi x)) sin(k2 pi x) dx.
RealMat derivative_coupling_matrix(int K);
RealVec laplacian_eigenvalues(int K);

SchrodingerModel build_schrodinger(int K, int n, int m, Real potential_scale = 1);
ParabolicModel build_parabolic(int K, Real a, Real b, const RealVec& f);
/// Source profile f[k] = k for k <= 10, zero beyond.
RealVec default_source_profile(int K);

/// u0 = v (x) v with v[k] = 1/k, normalized to unit Frobenius norm.
LowRankMatrix<Complex> schrodinger_initial(int K);
/// u0[k1, k2] = delta_{k1 k2} for 21 <= k1, k2 <= 30.
LowRankMatrix<Real> parabolic_initial(int K);

/// e^{-i s Delta} applied factor-wise: coefficients times exp(i s ((pi k1)^2 + (pi k2)^2)).
LowRankMatrix<Complex> twist(const SchrodingerModel& model, Real s, const LowRankMatrix<Complex>& u);
/// Inverse of `twist`: recovers u(t) = e^{i t Delta} v(t).
LowRankMatrix<Complex> untwist(const SchrodingerModel& model, Real t,
                               const LowRankMatrix<Complex>& v);

/// Twisted right-hand side  F_s v = -i e^{-i s Delta} V e^{i s Delta} v.
LowRankMatrix<Complex> schrodinger_F(const SchrodingerModel& model, Real s,
                                     const LowRankMatrix<Complex>& v);

/// Heat semigroup e^{a tau Delta}; tau must be nonnegative.
LowRankMatrix<Real> parabolic_propagate(const ParabolicModel& model, Real tau,
                                        const LowRankMatrix<Real>& u);
/// Mixed-derivative part 2b B U B^T.
LowRankMatrix<Real> parabolic_G(const ParabolicModel& model, const LowRankMatrix<Real>& u);

}  // namespace lrti
