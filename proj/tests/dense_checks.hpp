#pragma once
// Comparisons of the low-rank iteration building blocks with the dense
// oracles, all truncation disabled. Each function returns the largest
// relative deviation it saw.

#include <algorithm>
#include <random>

#include "lrti/integrator.hpp"
#include "lrti/models.hpp"
#include "oracles.hpp"

namespace dense_checks {

using namespace lrti;
using oracle::CVec;
using oracle::RVec;

struct SchrodingerErrors {
  Real picard = 0, sweep = 0, boundary = 0, solve = 0;
  Real worst() const { return std::max({picard, sweep, boundary}); }
};

struct ParabolicErrors {
  Real phi = 0, sweep = 0, solve = 0;
  Real worst() const { return std::max(phi, sweep); }
};

template <class S>
Eigen::Matrix<S, Eigen::Dynamic, 1> vec_of(const LowRankMatrix<S>& x) {
  const Mat<S> d = x.to_dense();
  return oracle::vec<S>(d);
}

template <class S, class V>
Real stage_error(const StageVector<S>& got, const std::vector<V>& expect) {
  Real err = 0, scale = 0;
  for (std::size_t j = 0; j < expect.size(); ++j) {
    err = std::max(err, (vec_of(got[static_cast<int>(j)]) - expect[j]).norm());
    scale = std::max(scale, expect[j].norm());
  }
  return oracle::rel(err, scale);
}

template <class S>
StageVector<S> random_stages(std::mt19937_64& rng, int J, int K) {
  StageVector<S> v;
  for (int j = 0; j < J; ++j) {
    auto x = oracle::random_low_rank<S>(rng, K, K, 2);
    v.entries.push_back(scale(x, S(1 / x.norm())));
  }
  return v;
}

template <class S, class V>
std::vector<V> as_vectors(const StageVector<S>& v) {
  std::vector<V> out;
  for (const auto& x : v.entries) out.push_back(vec_of(x));
  return out;
}

// K = 8, potential cos(pi x1) cos(2 pi x2), h = 0.1 on [0.3, 0.4].
inline SchrodingerErrors schrodinger(int J, NodeKind kind, std::uint64_t seed = 5) {
  const int K = 8;
  const Real t0 = 0.3, h = 0.1;
  const auto model = build_schrodinger(K, 1, 2, 1.0);
  const oracle::Schrodinger dense(K, 1, 2, 1.0);
  const auto rule = make_rule(kind, J, t0, h);
  std::mt19937_64 rng(seed);
  const auto u0 = scale(oracle::random_low_rank<Complex>(rng, K, K, 2), Complex(0.5));
  const auto stages = random_stages<Complex>(rng, J, K);
  const CVec du0 = vec_of(u0);
  const auto dv = as_vectors<Complex, CVec>(stages);
  const RVec local = (rule.nodes.array() - t0).matrix();
  const RVec zero_based = rule.nodes;

  SchrodingerErrors e;
  e.picard = stage_error(picard_apply(model, rule, u0, stages, 0), oracle::picard(dense, zero_based, t0, du0, dv));

  // Sweep: phi_j = w_{j-1} + sum_m (omega_j - omega_{j-1})_m F v_m + tau_j F_mid (w_{j-1} - v_{j-1}).
  const oracle::RMat om = oracle::integration_matrix(zero_based, t0);
  std::vector<CVec> expect;
  CVec prev_new = du0, prev_old = du0;
  for (int j = 0; j < J; ++j) {
    CVec phi = prev_new;
    for (int m = 0; m < J; ++m) {
      const Real wt = om(j, m) - (j ? om(j - 1, m) : 0.0);
      phi += wt * (dense.F(local(m)) * dv[m]);
    }
    const Real lo = j ? local(j - 1) : 0.0;
    phi += (local(j) - lo) * (dense.F((lo + local(j)) / 2) * (prev_new - prev_old));
    expect.push_back(phi);
    prev_old = dv[j];
    prev_new = phi;
  }
  const auto sweep = sdc_sweep(model, rule, u0, stages, 0.0, 0.0, 0.0);
  e.sweep = std::max(stage_error(sweep.next, expect), stage_error(sweep.phi, expect));

  CVec bnd = du0;
  const auto g = oracle::gauss(J);
  for (int m = 0; m < J; ++m) bnd += (h / 2 * g.w(m)) * (dense.F(local(m)) * dv[m]);
  if (kind == NodeKind::gauss) {
    const CVec got = vec_of(boundary_value(model, rule, u0, stages));
    e.boundary = oracle::rel((got - bnd).norm(), bnd.norm());
  }

  IntegratorConfig cfg;
  cfg.h = h;
  cfg.J = J;
  cfg.nodes = kind;
  cfg.thresholding = false;
  cfg.eps = 1e-13;
  cfg.delta_rel = 0;
  cfg.delta_rel_residual = 0;
  cfg.delta_boundary = 0;
  const auto solved = oracle::collocation_solve(dense, zero_based, t0, du0);
  for (Method method : {Method::picard, Method::sdc}) {
    cfg.method = method;
    const auto res = run_interval(model, rule, u0, cfg);
    e.solve = std::max(e.solve, stage_error(res.stages, solved));
  }
  return e;
}

// K = 8, a = 1, b = -1/2, h = 1e-3 on [0, 1e-3], Radau nodes.
inline ParabolicErrors parabolic(int J, std::uint64_t seed = 6) {
  const int K = 8;
  const Real t0 = 0, h = 1e-3;
  const RealVec f = default_source_profile(K);
  const auto model = build_parabolic(K, 1.0, -0.5, f);
  const oracle::Parabolic dense(K, 1.0, -0.5, f);
  const auto rule = radau_legendre(J, t0, h);
  const SecondaryQuadrature quad{12, 8};
  std::mt19937_64 rng(seed);
  const auto u0 = oracle::random_low_rank<Real>(rng, K, K, 2);
  const auto stages = random_stages<Real>(rng, J, K);
  const RVec du0 = vec_of(u0);
  const auto dv = as_vectors<Real, RVec>(stages);

  ParabolicErrors e;
  e.phi = stage_error(parabolic_phi_apply(model, rule, u0, stages, quad, 0),
                      oracle::parabolic_phi(dense, rule.nodes, t0, du0, dv));

  // Sweep: phi_j = E(tau_j) w_{j-1} + duhamel_j(v) + tau_j E(tau_j) G (w_{j-1} - v_{j-1}).
  std::vector<RVec> expect;
  RVec prev_new = du0, prev_old = du0;
  for (int j = 0; j < J; ++j) {
    const Real tau = oracle::step(rule.nodes, t0, j);
    const RVec phi = dense.decay(tau).asDiagonal() * (prev_new + tau * (dense.G * (prev_new - prev_old))) +
                     oracle::duhamel(dense, rule.nodes, t0, dv, j);
    expect.push_back(phi);
    prev_old = dv[j];
    prev_new = phi;
  }
  const auto sweep = sdc_sweep(model, rule, u0, stages, 0.0, quad, 0.0, 0.0);
  e.sweep = std::max(stage_error(sweep.next, expect), stage_error(sweep.phi, expect));

  IntegratorConfig cfg;
  cfg.h = h;
  cfg.J = J;
  cfg.nodes = NodeKind::radau_right;
  cfg.thresholding = false;
  cfg.eps = 1e-13;
  cfg.delta_rel = 0;
  cfg.delta_rel_residual = 0;
  cfg.delta_boundary = 0;
  cfg.secondary = quad;
  const auto solved = oracle::parabolic_solve(dense, rule.nodes, t0, du0);
  for (Method method : {Method::picard, Method::sdc}) {
    cfg.method = method;
    const auto res = run_interval(model, rule, u0, cfg);
    e.solve = std::max(e.solve, stage_error(res.stages, solved));
  }
  return e;
}

}  // namespace dense_checks
