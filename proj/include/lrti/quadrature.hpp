#pragma once

#include <vector>

#include "lrti/lowrank.hpp"

namespace lrti {

enum class NodeKind { gauss, radau_right };

/// Collocation nodes on one subinterval [t0, t0+h] with the associated
/// quadrature weights and spectral integration matrices.
struct CollocationRule {
  NodeKind kind = NodeKind::gauss;
  Real t0 = 0;
  Real h = 1;
  RealVec nodes;    ///< t_1 < ... < t_J
  RealVec weights;  ///< full-interval weights, sum = h
  RealMat omega;    ///< omega(j, m) = int_{t0}^{t_j} l_m
  RealMat omega_tilde;  ///< omega(j, m) - omega(j-1, m), with omega(-1, .) = 0
  RealVec bary;     ///< barycentric weights of the nodes
  Real lambda = 1;  ///< averaged Lebesgue constant (1/h) int sum_m |l_m|

  int size() const { return static_cast<int>(nodes.size()); }
  Real t_end() const { return t0 + h; }

  /// Butcher tableau of the equivalent collocation Runge-Kutta method.
  RealMat butcher_a() const { return omega / h; }
  RealVec butcher_b() const { return weights / h; }
  RealVec butcher_c() const { return (nodes.array() - t0).matrix() / h; }
};

CollocationRule gauss_legendre(int j, Real t0, Real h);
CollocationRule radau_legendre(int j, Real t0, Real h);
CollocationRule make_rule(NodeKind kind, int j, Real t0, Real h);

/// The same rule moved to the interval starting at t0.
CollocationRule shifted(const CollocationRule& rule, Real t0);

/// Lagrange basis polynomial l_m of the rule's nodes evaluated at t (m is 0-based).
Real lagrange_eval(const CollocationRule& rule, int m, Real t);
/// All J basis polynomials at t.
RealVec lagrange_all(const CollocationRule& rule, Real t);

Real lambda_J(const CollocationRule& rule);

struct Interval {
  Real a;
  Real b;
  Real width() const { return b - a; }
};

/// [t_prev, t_j] split by n_bisect bisections concentrating toward t_j:
/// n_bisect + 1 panels with widths tau/2, tau/4, ..., tau/2^n, tau/2^n.
std::vector<Interval> dyadic_partition(Real t_prev, Real t_j, int n_bisect);

}  // namespace lrti
