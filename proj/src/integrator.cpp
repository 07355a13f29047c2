#include "lrti/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

#include <Eigen/SVD>

namespace lrti {

ThresholdSchedule schedule_update(const ThresholdSchedule& sched, Real res, Real err) {
  ThresholdSchedule out = sched;
  if (sched.mode == ScheduleMode::constant_decrease || err <= sched.c * res)
    out.alpha = sched.theta * sched.alpha;
  return out;
}

Real TheoremTolerances::xi(int n, Real rho, Real h, int J) const {
  if (!(rho >= 0 && rho < 1)) throw std::invalid_argument("theorem tolerances need rho in [0, 1)");
  const Real growth = std::exp(8 * rho * n * (1 + rho) / std::pow(1 - rho, 3));
  return (eta + kappa_J * std::pow(h, J + 1) + n * kappa_2J * std::pow(h, 2 * J + 1)) * growth;
}

std::pair<Real, Real> TheoremTolerances::at(int n, Real rho, Real h, int J) const {
  if (n < 1) throw std::invalid_argument("interval numbers start at 1");
  const Real eps = 4 * xi(n - 1, rho, h, J) * (1 + rho) / ((1 - rho) * (1 - rho));
  return {eps, rho * eps / (1 - rho)};
}

Real contraction_factor(const SchrodingerModel& model, const CollocationRule& rule) {
  return rule.h * rule.lambda * model.C_V;
}

void IntegratorConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& what) {
    throw std::invalid_argument(field + ": " + what);
  };
  if (!(h > 0)) fail("h", "must be positive");
  if (N < 1) fail("N", "must be at least 1");
  if (J < 1) fail("J", "must be at least 1");
  if (!(eps > 0)) fail("eps", "must be positive");
  if (!(delta_boundary >= 0)) fail("delta_boundary", "must be nonnegative");
  if (!(delta_rel >= 0 && delta_rel < 1)) fail("delta_rel", "must lie in [0, 1)");
  if (!(delta_rel_residual >= 0 && delta_rel_residual < 1))
    fail("delta_rel_residual", "must lie in [0, 1)");
  if (!(schedule.theta > 0 && schedule.theta < 1)) fail("theta", "must lie in (0, 1)");
  if (!(schedule.c > 0 && schedule.c < 1)) fail("c", "must lie in (0, 1)");
  if (max_iters < 1) fail("max_iters", "must be at least 1");
  if (secondary.n_bisect < 1) fail("n_bisect", "must be at least 1");
  if (secondary.inner_nodes < 1) fail("inner_nodes", "must be at least 1");
  if (theorem) {
    if (!(theorem->eta >= 0)) fail("eta", "must be nonnegative");
    if (!(theorem->kappa_J >= 0)) fail("kappa_J", "must be nonnegative");
    if (!(theorem->kappa_2J >= 0)) fail("kappa_2J", "must be nonnegative");
    if (theorem->eta + theorem->kappa_J + theorem->kappa_2J == 0)
      fail("theorem", "at least one constant must be positive");
  }
}

template <class S>
Real stage_norm(const StageVector<S>& v) {
  Real out = 0;
  for (const auto& e : v.entries) out = std::max(out, e.norm());
  return out;
}

template <class S>
Real stage_dist(const StageVector<S>& v, const StageVector<S>& w) {
  if (v.size() != w.size()) throw ShapeError("stage vectors differ in length");
  Real out = 0;
  for (int j = 0; j < v.size(); ++j) out = std::max(out, frobenius_dist(v[j], w[j]));
  return out;
}

template <class S>
StageVector<S> soft_threshold(const StageVector<S>& v, Real alpha) {
  StageVector<S> out = v;
  for (auto& e : out.entries) e = soft_threshold(e, alpha);
  return out;
}

template Real stage_norm(const StageVector<Real>&);
template Real stage_norm(const StageVector<Complex>&);
template Real stage_dist(const StageVector<Real>&, const StageVector<Real>&);
template Real stage_dist(const StageVector<Complex>&, const StageVector<Complex>&);
template StageVector<Real> soft_threshold(const StageVector<Real>&, Real);
template StageVector<Complex> soft_threshold(const StageVector<Complex>&, Real);

namespace {

template <class S>
void check_stages(const CollocationRule& rule, const StageVector<S>& stages,
                  const LowRankMatrix<S>& u0) {
  if (stages.size() != rule.size()) throw ShapeError("stage count does not match the rule");
  for (const auto& e : stages.entries)
    if (e.rows() != u0.rows() || e.cols() != u0.cols()) throw ShapeError("stage shape mismatch");
}

// Node time relative to the interval start; index -1 is the start itself.
Real local_time(const CollocationRule& rule, int j) {
  return j < 0 ? Real(0) : rule.nodes(j) - rule.t0;
}

template <class S>
void observe(RankProbe* probe, const LowRankMatrix<S>& x) {
  if (probe) probe->observe(x);
}

std::vector<LowRankMatrix<Complex>> evaluate_rhs(const SchrodingerModel& model,
                                                 const CollocationRule& rule,
                                                 const StageVector<Complex>& stages) {
  std::vector<LowRankMatrix<Complex>> out;
  out.reserve(stages.size());
  for (int m = 0; m < stages.size(); ++m)
    out.push_back(schrodinger_F(model, local_time(rule, m), stages[m]));
  return out;
}

// sum_m coeffs(m) terms[m] added to `start`, recompressed after every addition.
template <class S>
LowRankMatrix<S> accumulate(LowRankMatrix<S> acc, const RealVec& coeffs,
                            const std::vector<LowRankMatrix<S>>& terms, Real delta,
                            RankProbe* probe) {
  for (std::size_t m = 0; m < terms.size(); ++m) {
    acc = add_scaled(acc, S(coeffs(m)), terms[m], delta);
    observe(probe, acc);
  }
  return acc;
}

}  // namespace

// --- Schrödinger ------------------------------------------------------------------

StageVector<Complex> picard_apply(const SchrodingerModel& model, const CollocationRule& rule,
                                  const LowRankMatrix<Complex>& u0,
                                  const StageVector<Complex>& stages, Real delta,
                                  RankProbe* probe) {
  check_stages(rule, stages, u0);
  const auto rhs = evaluate_rhs(model, rule, stages);
  StageVector<Complex> out;
  out.entries.reserve(rule.size());
  for (int j = 0; j < rule.size(); ++j)
    out.entries.push_back(accumulate(u0, rule.omega.row(j).transpose(), rhs, delta, probe));
  return out;
}

LowRankMatrix<Complex> low_order_psi(const SchrodingerModel& model, Real t_prev, Real t_j,
                                     const LowRankMatrix<Complex>& w) {
  if (!(t_prev < t_j)) throw std::invalid_argument("low-order step needs t_prev < t_j");
  if (w.rank() == 0) return w;
  return scale(schrodinger_F(model, (t_prev + t_j) / 2, w), Complex(t_j - t_prev));
}

SweepResult<Complex> sdc_sweep(const SchrodingerModel& model, const CollocationRule& rule,
                               const LowRankMatrix<Complex>& u0,
                               const StageVector<Complex>& stages, Real alpha, Real delta,
                               Real delta_residual, RankProbe* probe) {
  check_stages(rule, stages, u0);
  if (alpha < 0) throw std::invalid_argument("threshold must be nonnegative");
  const auto rhs = evaluate_rhs(model, rule, stages);
  SweepResult<Complex> out;
  LowRankMatrix<Complex> prev_new = u0, prev_old = u0;
  for (int j = 0; j < rule.size(); ++j) {
    const auto quad = accumulate(LowRankMatrix<Complex>(u0.rows(), u0.cols()),
                                 rule.omega_tilde.row(j).transpose(), rhs, delta_residual, probe);
    const auto diff = subtract(prev_new, prev_old, delta_residual);
    auto phi = add(prev_new, quad, delta);
    observe(probe, phi);
    if (diff.rank() > 0) {
      phi = add(phi, low_order_psi(model, local_time(rule, j - 1), local_time(rule, j), diff), delta);
      observe(probe, phi);
    }
    auto next = soft_threshold(phi, alpha);
    out.phi.entries.push_back(std::move(phi));
    prev_old = stages[j];
    prev_new = next;
    out.next.entries.push_back(std::move(next));
  }
  return out;
}

LowRankMatrix<Complex> boundary_value(const SchrodingerModel& model, const CollocationRule& rule,
                                      const LowRankMatrix<Complex>& u0,
                                      const StageVector<Complex>& stages, Real delta) {
  check_stages(rule, stages, u0);
  return accumulate(u0, rule.weights, evaluate_rhs(model, rule, stages), delta, nullptr);
}

// --- Parabolic --------------------------------------------------------------------

namespace {

// Common row and column bases of the interpolation data G v_m and the source,
// so that the interpolant at any time is U * core(s) * V^T with a small core.
struct InterpolantBasis {
  RealMat U, V;
  std::vector<RealMat> cores;  // one per node
  RealMat source_core;

  RealMat core_at(const CollocationRule& rule, Real s) const {
    RealMat c = source_core;
    const RealVec l = lagrange_all(rule, s);
    for (std::size_t m = 0; m < cores.size(); ++m) c += l(m) * cores[m];
    return c;
  }
};

RealMat dominant_columns(const RealMat& x, Real delta) {
  if (x.cols() == 0) return RealMat(x.rows(), 0);
  Eigen::BDCSVD<RealMat> svd(x, Eigen::ComputeThinU);
  const RealVec& sigma = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > kNoiseFloor * sigma(0) && sigma(r) > 0) ++r;
  if (delta > 0) r = std::min(r, recompression_rank(sigma.head(r), delta));
  return svd.matrixU().leftCols(r);
}

InterpolantBasis interpolant_basis(const ParabolicModel& model,
                                   const std::vector<LowRankMatrix<Real>>& g, Real delta) {
  Eigen::Index width = 1;
  for (const auto& x : g) width += x.rank();
  RealMat lx(model.K, width), ly(model.K, width);
  const Real fn = model.f.norm();
  Eigen::Index col = 0;
  for (const auto& x : g) {
    lx.middleCols(col, x.rank()) = x.left() * x.sigma().asDiagonal();
    ly.middleCols(col, x.rank()) = x.right() * x.sigma().asDiagonal();
    col += x.rank();
  }
  // f f^T = (f/|f|) |f|^2 (f/|f|)^T
  lx.col(col) = model.f * fn;
  ly.col(col) = model.f * fn;
  InterpolantBasis out;
  out.U = dominant_columns(lx, delta);
  out.V = dominant_columns(ly, delta);
  for (const auto& x : g)
    out.cores.push_back((out.U.transpose() * x.left()) * x.sigma().asDiagonal() *
                        (out.V.transpose() * x.right()).transpose());
  const RealVec uf = out.U.transpose() * model.f, vf = out.V.transpose() * model.f;
  out.source_core = uf * vf.transpose();
  return out;
}

LowRankMatrix<Real> duhamel_from_basis(const ParabolicModel& model, const CollocationRule& rule,
                                       const InterpolantBasis& basis, int j,
                                       const SecondaryQuadrature& quad, Real delta,
                                       RankProbe* probe) {
  const Real t_prev = j == 0 ? rule.t0 : rule.nodes(j - 1);
  const Real t_j = rule.nodes(j);
  LowRankMatrix<Real> acc(model.K, model.K);
  if (basis.U.cols() == 0 || basis.V.cols() == 0) return acc;
  const auto inner = radau_legendre(quad.inner_nodes, 0.0, 1.0);
  for (const auto& panel : dyadic_partition(t_prev, t_j, quad.n_bisect)) {
    for (int q = 0; q < inner.size(); ++q) {
      const bool last = q + 1 == inner.size();
      const Real s = last ? panel.b : panel.a + panel.width() * inner.nodes(q);
      const Real weight = panel.width() * inner.weights(q);
      const Real lag = t_j - s;
      if (lag < 0) throw std::domain_error("negative propagation time");
      Eigen::BDCSVD<RealMat> svd(basis.core_at(rule, s), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const RealVec& sigma = svd.singularValues();
      Eigen::Index r = 0;
      while (r < sigma.size() && sigma(r) > kNoiseFloor * sigma(0) && sigma(r) > 0) ++r;
      if (delta > 0) r = std::min(r, recompression_rank(sigma.head(r), delta));
      if (r == 0) continue;
      const RealVec decay = (-model.a * lag * model.lap_eigs.array()).exp().matrix();
      const RealMat x = decay.asDiagonal() * (basis.U * svd.matrixU().leftCols(r)) *
                        (weight * sigma.head(r)).asDiagonal();
      const RealMat y = decay.asDiagonal() * (basis.V * svd.matrixV().leftCols(r));
      acc = add_outer(acc, x, y, delta);
      observe(probe, acc);
    }
  }
  return acc;
}

std::vector<LowRankMatrix<Real>> mixed_terms(const ParabolicModel& model,
                                             const StageVector<Real>& stages) {
  std::vector<LowRankMatrix<Real>> g;
  g.reserve(stages.size());
  for (const auto& v : stages.entries) g.push_back(parabolic_G(model, v));
  return g;
}

Real step_length(const CollocationRule& rule, int j) {
  return j == 0 ? rule.nodes(0) - rule.t0 : rule.nodes(j) - rule.nodes(j - 1);
}

}  // namespace

LowRankMatrix<Real> duhamel_increment(const ParabolicModel& model, const CollocationRule& rule,
                                      const StageVector<Real>& g_stages, int j,
                                      const SecondaryQuadrature& quad, Real delta,
                                      RankProbe* probe) {
  if (j < 0 || j >= rule.size()) throw std::out_of_range("node index out of range");
  if (g_stages.size() != rule.size()) throw ShapeError("stage count does not match the rule");
  const auto basis = interpolant_basis(model, g_stages.entries, delta);
  return duhamel_from_basis(model, rule, basis, j, quad, delta, probe);
}

StageVector<Real> parabolic_phi_apply(const ParabolicModel& model, const CollocationRule& rule,
                                      const LowRankMatrix<Real>& u0,
                                      const StageVector<Real>& stages,
                                      const SecondaryQuadrature& quad, Real delta,
                                      RankProbe* probe) {
  check_stages(rule, stages, u0);
  const auto basis = interpolant_basis(model, mixed_terms(model, stages), delta);
  StageVector<Real> out;
  LowRankMatrix<Real> row = u0;
  for (int j = 0; j < rule.size(); ++j) {
    row = add(parabolic_propagate(model, step_length(rule, j), row),
              duhamel_from_basis(model, rule, basis, j, quad, delta, probe), delta);
    observe(probe, row);
    out.entries.push_back(row);
  }
  return out;
}

LowRankMatrix<Real> low_order_psi(const ParabolicModel& model, Real t_prev, Real t_j,
                                  const LowRankMatrix<Real>& w) {
  if (!(t_prev < t_j)) throw std::invalid_argument("low-order step needs t_prev < t_j");
  const Real tau = t_j - t_prev;
  return scale(parabolic_propagate(model, tau, parabolic_G(model, w)), tau);
}

SweepResult<Real> sdc_sweep(const ParabolicModel& model, const CollocationRule& rule,
                            const LowRankMatrix<Real>& u0, const StageVector<Real>& stages,
                            Real alpha, const SecondaryQuadrature& quad, Real delta,
                            Real delta_residual, RankProbe* probe) {
  check_stages(rule, stages, u0);
  if (alpha < 0) throw std::invalid_argument("threshold must be nonnegative");
  const auto basis = interpolant_basis(model, mixed_terms(model, stages), delta_residual);
  SweepResult<Real> out;
  LowRankMatrix<Real> prev_new = u0, prev_old = u0;
  for (int j = 0; j < rule.size(); ++j) {
    const Real tau = step_length(rule, j);
    const auto quad_j = duhamel_from_basis(model, rule, basis, j, quad, delta_residual, probe);
    const auto diff = subtract(prev_new, prev_old, delta_residual);
    auto phi = add(parabolic_propagate(model, tau, prev_new), quad_j, delta);
    observe(probe, phi);
    if (diff.rank() > 0) {
      const Real t_prev = j == 0 ? rule.t0 : rule.nodes(j - 1);
      phi = add(phi, low_order_psi(model, t_prev, rule.nodes(j), diff), delta);
      observe(probe, phi);
    }
    auto next = soft_threshold(phi, alpha);
    out.phi.entries.push_back(std::move(phi));
    prev_old = stages[j];
    prev_new = next;
    out.next.entries.push_back(std::move(next));
  }
  return out;
}

// --- Drivers ----------------------------------------------------------------------

namespace {

template <class S>
std::vector<int> ranks_of(const StageVector<S>& v) {
  std::vector<int> out;
  for (const auto& e : v.entries) out.push_back(static_cast<int>(e.rank()));
  return out;
}

template <class S, class PicardFn, class SweepFn>
IntervalResult<S> iterate(const CollocationRule& rule, const LowRankMatrix<S>& u0,
                          const IntegratorConfig& config, PicardFn picard, SweepFn sweep) {
  const auto started = std::chrono::steady_clock::now();
  const int J = rule.size();
  IntervalResult<S> result;
  auto& trace = result.trace;
  trace.t0 = rule.t0;
  trace.t1 = rule.t_end();
  trace.node_rank_min.assign(J, std::numeric_limits<int>::max());
  trace.node_rank_max.assign(J, 0);

  ThresholdSchedule sched = config.schedule;
  sched.alpha = config.thresholding ? u0.max_singular_value() : Real(0);
  auto v = StageVector<S>::zeros(J, u0.rows(), u0.cols());
  Real res = u0.norm();
  StageVector<S> next;

  for (int k = 0; k < config.max_iters; ++k) {
    RankProbe probe;
    const Real delta = config.delta_rel * res;
    const Real delta_res = config.delta_rel_residual * res;
    StageVector<S> phi;
    if (config.method == Method::picard) {
      phi = picard(v, delta, &probe);
      next = soft_threshold(phi, sched.alpha);
    } else {
      auto swept = sweep(v, sched.alpha, delta, delta_res, &probe);
      phi = std::move(swept.phi);
      next = std::move(swept.next);
    }
    res = stage_dist(phi, v);
    const Real err = stage_dist(next, v);

    IterationRecord rec;
    rec.iteration = k;
    rec.residual = res;
    rec.err = err;
    rec.alpha = sched.alpha;
    rec.phi_ranks = ranks_of(phi);
    rec.node_ranks = ranks_of(next);
    rec.max_intermediate_rank = static_cast<int>(probe.max_rank);
    for (int j = 0; j < J; ++j) {
      for (int r : {rec.phi_ranks[j], rec.node_ranks[j]}) {
        trace.node_rank_min[j] = std::min(trace.node_rank_min[j], r);
        trace.node_rank_max[j] = std::max(trace.node_rank_max[j], r);
        trace.max_intermediate_rank = std::max(trace.max_intermediate_rank, r);
      }
    }
    trace.max_intermediate_rank = std::max(trace.max_intermediate_rank, rec.max_intermediate_rank);
    trace.iterations.push_back(std::move(rec));

    if (res <= config.eps) {
      trace.converged = true;
      break;
    }
    v = next;
    sched = schedule_update(sched, res, err);
  }
  // Reported stages are the thresholded image of the last iterate.
  result.stages = std::move(next);
  result.boundary = LowRankMatrix<S>(u0.rows(), u0.cols());
  trace.wall_seconds =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

IntervalResult<Complex> run_interval(const SchrodingerModel& model, const CollocationRule& rule,
                                     const LowRankMatrix<Complex>& u0,
                                     const IntegratorConfig& config) {
  config.validate();
  StageVector<Complex> last_iterate;
  auto picard = [&](const StageVector<Complex>& v, Real delta, RankProbe* probe) {
    last_iterate = v;
    return picard_apply(model, rule, u0, v, delta, probe);
  };
  auto sweep = [&](const StageVector<Complex>& v, Real alpha, Real delta, Real delta_res,
                   RankProbe* probe) {
    last_iterate = v;
    return sdc_sweep(model, rule, u0, v, alpha, delta, delta_res, probe);
  };
  auto result = iterate<Complex>(rule, u0, config, picard, sweep);
  const Real res = result.trace.iterations.back().residual;
  if (rule.kind == NodeKind::gauss) {
    auto b = boundary_value(model, rule, u0, last_iterate, config.delta_rel * res);
    result.boundary = config.delta_boundary > 0 ? recompress(b, config.delta_boundary) : b;
  } else {
    result.boundary = result.stages[rule.size() - 1];
  }
  result.trace.boundary_rank = static_cast<int>(result.boundary.rank());
  return result;
}

IntervalResult<Real> run_interval(const ParabolicModel& model, const CollocationRule& rule,
                                  const LowRankMatrix<Real>& u0, const IntegratorConfig& config) {
  config.validate();
  if (rule.kind != NodeKind::radau_right)
    throw std::invalid_argument("nodes: the parabolic problem requires right Radau nodes");
  auto picard = [&](const StageVector<Real>& v, Real delta, RankProbe* probe) {
    return parabolic_phi_apply(model, rule, u0, v, config.secondary, delta, probe);
  };
  auto sweep = [&](const StageVector<Real>& v, Real alpha, Real delta, Real delta_res,
                   RankProbe* probe) {
    return sdc_sweep(model, rule, u0, v, alpha, config.secondary, delta, delta_res, probe);
  };
  auto result = iterate<Real>(rule, u0, config, picard, sweep);
  result.boundary = result.stages[rule.size() - 1];
  result.trace.boundary_rank = static_cast<int>(result.boundary.rank());
  return result;
}

namespace {

template <class Model, class S, class NodeOut, class Tolerances>
Trajectory<S> evolve(const Model& model, const LowRankMatrix<S>& u0, const IntegratorConfig& config,
                     NodeOut to_output, Tolerances tolerances) {
  config.validate();
  Trajectory<S> traj;
  traj.initial = u0;
  const auto base = make_rule(config.nodes, config.J, 0.0, config.h);
  LowRankMatrix<S> state = u0;
  for (int n = 0; n < config.N; ++n) {
    const Real t0 = n * config.h;
    const auto rule = shifted(base, t0);
    IntegratorConfig local = config;
    tolerances(n + 1, rule, local);
    auto step = run_interval(model, rule, state, local);
    step.trace.index = n;
    traj.converged = traj.converged && step.trace.converged;
    for (int j = 0; j < rule.size(); ++j) {
      traj.node_times.push_back(rule.nodes(j));
      traj.node_states.push_back(to_output(rule.nodes(j) - t0, step.stages[j]));
    }
    state = to_output(config.h, step.boundary);
    traj.boundary_times.push_back(t0 + config.h);
    traj.boundary_states.push_back(state);
    traj.intervals.push_back(std::move(step.trace));
  }
  return traj;
}

}  // namespace

Trajectory<Complex> run_evolution(const SchrodingerModel& model, const LowRankMatrix<Complex>& u0,
                                  const IntegratorConfig& config) {
  auto to_output = [&](Real local, const LowRankMatrix<Complex>& v) {
    return untwist(model, local, v);
  };
  auto tolerances = [&](int n, const CollocationRule& rule, IntegratorConfig& local) {
    if (!config.theorem) return;
    std::tie(local.eps, local.delta_boundary) =
        config.theorem->at(n, contraction_factor(model, rule), config.h, config.J);
  };
  return evolve(model, u0, config, to_output, tolerances);
}

Trajectory<Real> run_evolution(const ParabolicModel& model, const LowRankMatrix<Real>& u0,
                               const IntegratorConfig& config) {
  if (config.theorem) throw std::invalid_argument("theorem: only available for the Schrödinger problem");
  return evolve(
      model, u0, config, [](Real, const LowRankMatrix<Real>& v) { return v; },
      [](int, const CollocationRule&, IntegratorConfig&) {});
}

}  // namespace lrti
