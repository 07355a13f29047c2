#include "lrti/reference.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>
#include <Eigen/SparseCore>

namespace lrti {

namespace {

using SparseReal = Eigen::SparseMatrix<Real>;

template <class S>
Real stage_gap(const std::vector<Mat<S>>& a, const std::vector<Mat<S>>& b) {
  Real out = 0;
  for (std::size_t j = 0; j < a.size(); ++j) out = std::max(out, (a[j] - b[j]).norm());
  return out;
}

// exp(i s (lambda_k1 + lambda_k2)) entrywise.
Mat<Complex> phase_matrix(const RealVec& lam, Real s) {
  const Vec<Complex> e = (Complex(0, s) * lam.cast<Complex>()).array().exp().matrix();
  return e * e.transpose();
}

struct DenseSchrodinger {
  std::vector<std::pair<SparseReal, SparseReal>> terms;

  explicit DenseSchrodinger(const SchrodingerModel& model) {
    for (const auto& [p, q] : model.potential_terms) terms.emplace_back(p.sparseView(), q.sparseView());
  }

  // -i E(s) o (V (conj E(s) o v))
  Mat<Complex> rhs(const Mat<Complex>& phase, const Mat<Complex>& v) const {
    const Mat<Complex> u = phase.conjugate().cwiseProduct(v);
    Mat<Complex> vu = Mat<Complex>::Zero(v.rows(), v.cols());
    for (const auto& [p, q] : terms) {
      const Mat<Complex> pu = p * u;
      vu += (q * pu.transpose()).transpose();
    }
    return Complex(0, -1) * phase.cwiseProduct(vu);
  }
};

}  // namespace

DenseTrajectory<Complex> dense_reference(const SchrodingerModel& model, const Mat<Complex>& u0,
                                         const ReferenceConfig& config) {
  if (u0.rows() != model.K || u0.cols() != model.K) throw ShapeError("initial state shape mismatch");
  const auto rule = make_rule(config.nodes, config.J, 0.0, config.h);
  const int J = rule.size();
  const DenseSchrodinger op(model);
  std::vector<Mat<Complex>> phases;
  for (int m = 0; m < J; ++m) phases.push_back(phase_matrix(model.lap_eigs, rule.nodes(m)));
  const Mat<Complex> end_phase = phase_matrix(model.lap_eigs, config.h);

  DenseTrajectory<Complex> out;
  out.initial = u0;
  Mat<Complex> state = u0;
  for (int n = 0; n < config.N; ++n) {
    const Real t0 = n * config.h;
    std::vector<Mat<Complex>> v(J, state), f(J);
    int k = 0;
    bool converged = false;
    while (k < config.max_iters) {
      ++k;
      for (int m = 0; m < J; ++m) f[m] = op.rhs(phases[m], v[m]);
      std::vector<Mat<Complex>> next(J, state);
      for (int j = 0; j < J; ++j)
        for (int m = 0; m < J; ++m) next[j] += rule.omega(j, m) * f[m];
      const Real gap = stage_gap(next, v);
      v = std::move(next);
      if (gap <= config.tol) {
        converged = true;
        break;
      }
    }
    out.converged = out.converged && converged;
    out.iterations.push_back(k);
    Mat<Complex> boundary = state;
    for (int m = 0; m < J; ++m) boundary += rule.weights(m) * op.rhs(phases[m], v[m]);
    for (int j = 0; j < J; ++j) {
      out.node_times.push_back(t0 + rule.nodes(j));
      out.node_states.push_back(phases[j].conjugate().cwiseProduct(v[j]));
    }
    if (rule.kind == NodeKind::radau_right) boundary = v[J - 1];
    state = end_phase.conjugate().cwiseProduct(boundary);
    out.boundary_times.push_back(t0 + config.h);
    out.boundary_states.push_back(state);
  }
  return out;
}

DenseTrajectory<Real> dense_reference(const ParabolicModel& model, const RealMat& u0,
                                      const ReferenceConfig& config) {
  if (u0.rows() != model.K || u0.cols() != model.K) throw ShapeError("initial state shape mismatch");
  if (config.nodes != NodeKind::radau_right)
    throw std::invalid_argument("the parabolic reference requires right Radau nodes");
  const auto rule = make_rule(config.nodes, config.J, 0.0, config.h);
  const int J = rule.size();
  const int K = model.K;
  const RealVec& lam = model.lap_eigs;
  auto decay = [&](Real d) -> RealMat {
    const RealVec e = (-model.a * d * lam.array()).exp().matrix();
    return e * e.transpose();
  };

  // Everything in the secondary quadrature except G u_m is iterate independent:
  // row j adds sum_m weight[j][m] o (G u_m) + weight[j][J] o (f f^T).
  const auto inner = radau_legendre(config.secondary.inner_nodes, 0.0, 1.0);
  std::vector<std::vector<RealMat>> weight(J, std::vector<RealMat>(J + 1, RealMat::Zero(K, K)));
  std::vector<RealMat> step_decay;
  for (int j = 0; j < J; ++j) {
    const Real t_prev = j == 0 ? Real(0) : rule.nodes(j - 1);
    const Real t_j = rule.nodes(j);
    step_decay.push_back(decay(t_j - t_prev));
    for (const auto& panel : dyadic_partition(t_prev, t_j, config.secondary.n_bisect)) {
      for (int q = 0; q < inner.size(); ++q) {
        const Real s = q + 1 == inner.size() ? panel.b : panel.a + panel.width() * inner.nodes(q);
        const Real w = panel.width() * inner.weights(q);
        const RealMat e = decay(t_j - s);
        const RealVec l = lagrange_all(rule, s);
        for (int m = 0; m < J; ++m) weight[j][m] += (w * l(m)) * e;
        weight[j][J] += w * e;
      }
    }
  }
  const RealMat source = model.f * model.f.transpose();
  const RealMat bt = model.B.transpose();

  DenseTrajectory<Real> out;
  out.initial = u0;
  RealMat state = u0;
  for (int n = 0; n < config.N; ++n) {
    const Real t0 = n * config.h;
    std::vector<RealMat> v(J, state), g(J);
    int k = 0;
    bool converged = false;
    while (k < config.max_iters) {
      ++k;
      for (int m = 0; m < J; ++m) g[m].noalias() = (2 * model.b) * (model.B * v[m]) * bt;
      std::vector<RealMat> next(J);
      RealMat row = state;
      for (int j = 0; j < J; ++j) {
        RealMat acc = step_decay[j].cwiseProduct(row) + weight[j][J].cwiseProduct(source);
        for (int m = 0; m < J; ++m) acc += weight[j][m].cwiseProduct(g[m]);
        row = acc;
        next[j] = std::move(acc);
      }
      const Real gap = stage_gap(next, v);
      v = std::move(next);
      if (gap <= config.tol) {
        converged = true;
        break;
      }
    }
    out.converged = out.converged && converged;
    out.iterations.push_back(k);
    for (int j = 0; j < J; ++j) {
      out.node_times.push_back(t0 + rule.nodes(j));
      out.node_states.push_back(v[j]);
    }
    state = v[J - 1];
    out.boundary_times.push_back(t0 + config.h);
    out.boundary_states.push_back(state);
  }
  return out;
}

template <class S>
int optimal_rank(const Mat<S>& state, Real tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  Eigen::BDCSVD<Mat<S>> svd(state);
  return static_cast<int>(recompression_rank(svd.singularValues(), tol));
}

template <class S>
std::vector<int> optimal_ranks(const std::vector<Mat<S>>& states, Real tol) {
  std::vector<int> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(optimal_rank(s, tol));
  return out;
}

namespace {

void check_grid(const std::vector<Real>& a, const std::vector<Real>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("time grids differ in length");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max<Real>(1, std::abs(a[i])))
      throw std::invalid_argument("time grids differ");
}

}  // namespace

template <class S>
std::vector<BoundaryMetrics> boundary_metrics(const DenseTrajectory<S>& ref,
                                              const Trajectory<S>& run, Real rank_tol) {
  check_grid(ref.boundary_times, run.boundary_times);
  const Real n0 = ref.initial.norm();
  std::vector<BoundaryMetrics> out;
  for (std::size_t i = 0; i < ref.boundary_times.size(); ++i) {
    const auto& x = run.boundary_states[i];
    BoundaryMetrics m;
    m.time = ref.boundary_times[i];
    m.error = (x.to_dense() - ref.boundary_states[i]).norm();
    m.rank = static_cast<int>(x.rank());
    m.optimal_rank = optimal_rank(ref.boundary_states[i], rank_tol);
    m.norm_dev = std::abs(x.norm() - n0);
    out.push_back(m);
  }
  return out;
}

template <class S>
std::vector<NodeMetrics> node_metrics(const DenseTrajectory<S>& ref, const Trajectory<S>& run,
                                      Real rank_tol) {
  check_grid(ref.node_times, run.node_times);
  std::vector<NodeMetrics> out;
  std::size_t i = 0;
  for (const auto& interval : run.intervals) {
    for (std::size_t j = 0; j < interval.node_rank_min.size(); ++j, ++i) {
      NodeMetrics m;
      m.time = ref.node_times[i];
      m.interval = interval.index;
      m.node = static_cast<int>(j);
      m.error = (run.node_states[i].to_dense() - ref.node_states[i]).norm();
      m.rank = static_cast<int>(run.node_states[i].rank());
      m.optimal_rank = optimal_rank(ref.node_states[i], rank_tol);
      m.rank_min = interval.node_rank_min[j];
      m.rank_max = interval.node_rank_max[j];
      out.push_back(m);
    }
  }
  return out;
}

#define LRTI_INSTANTIATE(S)                                                                      \
  template int optimal_rank(const Mat<S>&, Real);                                                \
  template std::vector<int> optimal_ranks(const std::vector<Mat<S>>&, Real);                     \
  template std::vector<BoundaryMetrics> boundary_metrics(const DenseTrajectory<S>&,              \
                                                         const Trajectory<S>&, Real);            \
  template std::vector<NodeMetrics> node_metrics(const DenseTrajectory<S>&, const Trajectory<S>&, \
                                                 Real);

LRTI_INSTANTIATE(Real)
LRTI_INSTANTIATE(Complex)

#undef LRTI_INSTANTIATE

}  // namespace lrti
