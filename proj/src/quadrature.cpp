#include "lrti/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace lrti {

namespace {

struct NodesWeights {
  RealVec nodes;
  RealVec weights;
};

// Golub-Welsch on the Jacobi matrix of the shifted Legendre weight on [t0, t0+h].
NodesWeights solve_jacobi(const RealVec& diag, const RealVec& offdiag, Real h) {
  Eigen::SelfAdjointEigenSolver<RealMat> eig;
  eig.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolve failed");
  NodesWeights out;
  out.nodes = eig.eigenvalues();
  const RealVec first = eig.eigenvectors().row(0).transpose();
  out.weights = h * first.array().square().matrix();
  // Normalize to sum h (eigenvectors are unit length up to rounding).
  out.weights *= h / out.weights.sum();
  return out;
}

RealVec legendre_offdiag(int j, Real h) {
  RealVec beta(std::max(j - 1, 0));
  for (int m = 1; m < j; ++m) beta(m - 1) = m * h / (2.0 * std::sqrt(4.0 * m * m - 1.0));
  return beta;
}

NodesWeights gauss_nodes(int j, Real t0, Real h) {
  RealVec diag = RealVec::Constant(j, t0 + h / 2);
  return solve_jacobi(diag, legendre_offdiag(j, h), h);
}

NodesWeights radau_nodes(int j, Real t0, Real h) {
  const Real b = t0 + h;
  if (j == 1) return {RealVec::Constant(1, b), RealVec::Constant(1, h)};
  RealVec diag = RealVec::Constant(j, t0 + h / 2);
  const RealVec beta = legendre_offdiag(j, h);
  // Replace the last diagonal entry so that b becomes an eigenvalue:
  // solve (T_{j-1} - b I) x = beta_{j-1}^2 e_{j-1}, then alpha = b + x_{j-1}.
  const int n = j - 1;
  RealMat t = RealMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, i) = diag(i) - b;
    if (i + 1 < n) t(i, i + 1) = t(i + 1, i) = beta(i);
  }
  RealVec rhs = RealVec::Zero(n);
  rhs(n - 1) = beta(n - 1) * beta(n - 1);
  const RealVec x = t.partialPivLu().solve(rhs);
  diag(n) = b + x(n - 1);
  auto out = solve_jacobi(diag, beta, h);
  out.nodes(j - 1) = b;  // exact by construction; remove eigensolver rounding
  return out;
}

RealVec barycentric_weights(const RealVec& nodes) {
  const auto n = nodes.size();
  RealVec w = RealVec::Ones(n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != m) w(m) /= (nodes(m) - nodes(k));
  return w;
}

void fill_integration_matrices(CollocationRule& rule) {
  const int j = rule.size();
  // A j-node Gauss rule is exact for the degree j-1 Lagrange polynomials.
  const auto ref = gauss_nodes(j, 0.0, 1.0);
  rule.omega = RealMat::Zero(j, j);
  for (int row = 0; row < j; ++row) {
    const Real len = rule.nodes(row) - rule.t0;
    for (int q = 0; q < j; ++q) {
      const Real s = rule.t0 + len * ref.nodes(q);
      rule.omega.row(row) += len * ref.weights(q) * lagrange_all(rule, s).transpose();
    }
  }
  rule.omega_tilde = rule.omega;
  for (int row = 1; row < j; ++row) rule.omega_tilde.row(row) -= rule.omega.row(row - 1);
}

CollocationRule build(NodeKind kind, int j, Real t0, Real h) {
  if (j < 1) throw std::invalid_argument("number of nodes must be positive");
  if (!(h > 0)) throw std::invalid_argument("interval length must be positive");
  auto nw = kind == NodeKind::gauss ? gauss_nodes(j, t0, h) : radau_nodes(j, t0, h);
  CollocationRule rule;
  rule.kind = kind;
  rule.t0 = t0;
  rule.h = h;
  rule.nodes = std::move(nw.nodes);
  rule.weights = std::move(nw.weights);
  rule.bary = barycentric_weights(rule.nodes);
  fill_integration_matrices(rule);
  rule.lambda = lambda_J(rule);
  return rule;
}

}  // namespace

CollocationRule gauss_legendre(int j, Real t0, Real h) { return build(NodeKind::gauss, j, t0, h); }

CollocationRule radau_legendre(int j, Real t0, Real h) {
  return build(NodeKind::radau_right, j, t0, h);
}

CollocationRule make_rule(NodeKind kind, int j, Real t0, Real h) { return build(kind, j, t0, h); }

CollocationRule shifted(const CollocationRule& rule, Real t0) {
  CollocationRule out = rule;
  out.nodes.array() += t0 - rule.t0;
  out.t0 = t0;
  if (out.kind == NodeKind::radau_right) out.nodes(out.size() - 1) = t0 + rule.h;
  return out;
}

RealVec lagrange_all(const CollocationRule& rule, Real t) {
  const auto n = rule.nodes.size();
  RealVec out = RealVec::Zero(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    if (t == rule.nodes(m)) {
      out(m) = 1;
      return out;
    }
  }
  Real denom = 0;
  for (Eigen::Index m = 0; m < n; ++m) {
    out(m) = rule.bary(m) / (t - rule.nodes(m));
    denom += out(m);
  }
  return out / denom;
}

Real lagrange_eval(const CollocationRule& rule, int m, Real t) {
  if (m < 0 || m >= rule.size()) throw std::out_of_range("Lagrange index out of range");
  return lagrange_all(rule, t)(m);
}

Real lambda_J(const CollocationRule& rule) {
  const int j = rule.size();
  // Between consecutive nodes every l_m keeps its sign, so sum |l_m| is a
  // polynomial of degree j-1 there and j-point Gauss panels integrate it exactly.
  std::vector<Real> breaks{rule.t0};
  for (int m = 0; m < j; ++m)
    if (rule.nodes(m) > breaks.back()) breaks.push_back(rule.nodes(m));
  if (rule.t_end() > breaks.back()) breaks.push_back(rule.t_end());
  const auto ref = gauss_nodes(j, 0.0, 1.0);
  const int panels_per_piece =
      std::max(1, (64 * j + static_cast<int>(breaks.size()) - 2) / static_cast<int>(breaks.size() - 1));
  Real total = 0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const Real w = (breaks[p + 1] - breaks[p]) / panels_per_piece;
    for (int k = 0; k < panels_per_piece; ++k) {
      const Real a = breaks[p] + k * w;
      for (int q = 0; q < j; ++q)
        total += w * ref.weights(q) * lagrange_all(rule, a + w * ref.nodes(q)).cwiseAbs().sum();
    }
  }
  return total / rule.h;
}

std::vector<Interval> dyadic_partition(Real t_prev, Real t_j, int n_bisect) {
  if (!(t_prev < t_j)) throw std::invalid_argument("degenerate interval");
  if (n_bisect < 1) throw std::invalid_argument("at least one bisection required");
  const Real tau = t_j - t_prev;
  std::vector<Interval> out;
  out.reserve(n_bisect + 1);
  Real left = t_prev;
  for (int n = 1; n <= n_bisect; ++n) {
    const Real right = t_j - std::ldexp(tau, -n);
    out.push_back({left, right});
    left = right;
  }
  out.push_back({left, t_j});
  return out;
}

}  // namespace lrti
