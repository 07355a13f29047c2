#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lrti/lowrank.hpp"
#include "lrti/models.hpp"
#include "lrti/quadrature.hpp"

namespace lrti {

enum class Method { picard, sdc };
enum class ScheduleMode { constant_decrease, adaptive };

/// Soft-threshold parameter and its decrease rule.
struct ThresholdSchedule {
  ScheduleMode mode = ScheduleMode::constant_decrease;
  Real theta = 0.5;  ///< decrease factor in (0,1)
  Real c = 0.4;      ///< adaptive acceptance factor in (0,1)
  Real alpha = 0;
};

/// Constant mode always multiplies alpha by theta; adaptive mode only when
/// err <= c * res.
ThresholdSchedule schedule_update(const ThresholdSchedule& sched, Real res, Real err);

/// Dyadic secondary quadrature of the heat-kernel integrals.
struct SecondaryQuadrature {
  int n_bisect = 5;
  int inner_nodes = 5;
};

/// Per-interval tolerances from the global error analysis, driven by
/// user-supplied constants (the local error constants are not computable
/// from problem data). Only meaningful for contraction factors rho < 1.
struct TheoremTolerances {
  Real eta = 0;       ///< error of the initial data
  Real kappa_J = 0;   ///< stage error constant
  Real kappa_2J = 0;  ///< boundary error constant

  /// xi_n for interval count n >= 0.
  Real xi(int n, Real rho, Real h, int J) const;
  /// (eps_n, delta_n) for the n-th interval, n >= 1.
  std::pair<Real, Real> at(int n, Real rho, Real h, int J) const;
};

struct IntegratorConfig {
  Real h = 0.1;
  int N = 5;
  int J = 11;
  NodeKind nodes = NodeKind::gauss;
  Method method = Method::picard;
  Real eps = 1e-3;             ///< iteration tolerance on the stage residual
  Real delta_boundary = 1e-4;  ///< recompression at Gauss interval boundaries
  Real delta_rel = 1e-3;       ///< recompression after additions, relative to the residual
  Real delta_rel_residual = 1e-6;
  ThresholdSchedule schedule;  ///< mode/theta/c; alpha is reseeded every interval
  bool thresholding = true;    ///< false: alpha stays 0 (plain fixed-point iteration)
  int max_iters = 200;
  SecondaryQuadrature secondary;
  /// When set, replaces eps and delta_boundary per interval (Schrödinger only).
  std::optional<TheoremTolerances> theorem;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Approximations at the J collocation nodes of one subinterval.
template <class S>
struct StageVector {
  std::vector<LowRankMatrix<S>> entries;

  int size() const { return static_cast<int>(entries.size()); }
  const LowRankMatrix<S>& operator[](int j) const { return entries[j]; }
  LowRankMatrix<S>& operator[](int j) { return entries[j]; }

  static StageVector zeros(int J, Eigen::Index rows, Eigen::Index cols) {
    return StageVector{std::vector<LowRankMatrix<S>>(J, LowRankMatrix<S>(rows, cols))};
  }
  static StageVector constant(int J, const LowRankMatrix<S>& value) {
    return StageVector{std::vector<LowRankMatrix<S>>(J, value)};
  }
};

/// max_j ||v_j||_F
template <class S>
Real stage_norm(const StageVector<S>& v);
/// max_j ||v_j - w_j||_F
template <class S>
Real stage_dist(const StageVector<S>& v, const StageVector<S>& w);
template <class S>
StageVector<S> soft_threshold(const StageVector<S>& v, Real alpha);

/// Tracks the largest rank among all low-rank intermediates it is shown.
struct RankProbe {
  Eigen::Index max_rank = 0;
  template <class S>
  void observe(const LowRankMatrix<S>& x) {
    max_rank = std::max(max_rank, x.rank());
  }
};

/// rho = h * Lambda_J * C_V, the contraction factor of the Picard map.
Real contraction_factor(const SchrodingerModel& model, const CollocationRule& rule);

// --- Schrödinger (twisted variables, times measured from rule.t0) ----------

/// Phi(v)_j = u0 + sum_m omega(j,m) F_{t_m} v_m, recompressed to `delta`
/// after every addition.
StageVector<Complex> picard_apply(const SchrodingerModel& model, const CollocationRule& rule,
                                  const LowRankMatrix<Complex>& u0,
                                  const StageVector<Complex>& stages, Real delta,
                                  RankProbe* probe = nullptr);

/// Symmetric low-order step (t_j - t_prev) F_{(t_prev + t_j)/2} w.
LowRankMatrix<Complex> low_order_psi(const SchrodingerModel& model, Real t_prev, Real t_j,
                                     const LowRankMatrix<Complex>& w);

template <class S>
struct SweepResult {
  StageVector<S> next;  ///< thresholded node values v^{k+1}
  StageVector<S> phi;   ///< pre-threshold values phi^k
};

/// One SDC sweep with soft thresholding after every node update.
SweepResult<Complex> sdc_sweep(const SchrodingerModel& model, const CollocationRule& rule,
                               const LowRankMatrix<Complex>& u0,
                               const StageVector<Complex>& stages, Real alpha, Real delta,
                               Real delta_residual, RankProbe* probe = nullptr);

/// u0 + sum_m w_m F_{t_m} v_m (Gauss rules).
LowRankMatrix<Complex> boundary_value(const SchrodingerModel& model, const CollocationRule& rule,
                                      const LowRankMatrix<Complex>& u0,
                                      const StageVector<Complex>& stages, Real delta = 0);

// --- Parabolic (direct variables, Radau rules) ------------------------------

/// Heat-kernel integral over [t_prev, t_j] of the Lagrange interpolant of
/// G v_m + f, evaluated by the dyadic secondary quadrature.
LowRankMatrix<Real> duhamel_increment(const ParabolicModel& model, const CollocationRule& rule,
                                      const StageVector<Real>& g_stages, int j,
                                      const SecondaryQuadrature& quad, Real delta,
                                      RankProbe* probe = nullptr);

/// Phi(u)_j = e^{a tau_j Delta} Phi(u)_{j-1} + secondary quadrature over [t_{j-1}, t_j].
StageVector<Real> parabolic_phi_apply(const ParabolicModel& model, const CollocationRule& rule,
                                      const LowRankMatrix<Real>& u0,
                                      const StageVector<Real>& stages,
                                      const SecondaryQuadrature& quad, Real delta,
                                      RankProbe* probe = nullptr);

/// Explicit Euler step tau e^{a tau Delta} G w.
LowRankMatrix<Real> low_order_psi(const ParabolicModel& model, Real t_prev, Real t_j,
                                  const LowRankMatrix<Real>& w);

SweepResult<Real> sdc_sweep(const ParabolicModel& model, const CollocationRule& rule,
                            const LowRankMatrix<Real>& u0, const StageVector<Real>& stages,
                            Real alpha, const SecondaryQuadrature& quad, Real delta,
                            Real delta_residual, RankProbe* probe = nullptr);

// --- Drivers ------------------------------------------------------------------

struct IterationRecord {
  int iteration = 0;
  Real residual = 0;  ///< ||phi^k - v^k||_J
  Real err = 0;       ///< ||v^{k+1} - v^k||_J
  Real alpha = 0;     ///< threshold used in this iteration
  std::vector<int> phi_ranks;   ///< per node, before thresholding
  std::vector<int> node_ranks;  ///< per node, after thresholding
  int max_intermediate_rank = 0;
};

struct IntervalTrace {
  int index = 0;
  Real t0 = 0;
  Real t1 = 0;
  bool converged = false;
  std::vector<IterationRecord> iterations;
  std::vector<int> node_rank_min;  ///< over all iterates v^k, phi^k with k >= 1
  std::vector<int> node_rank_max;
  int max_intermediate_rank = 0;
  int boundary_rank = 0;
  Real wall_seconds = 0;
};

template <class S>
struct IntervalResult {
  LowRankMatrix<S> boundary;
  StageVector<S> stages;  ///< final thresholded iterate
  IntervalTrace trace;
};

/// Fixed-point iteration on one subinterval. For the Schrödinger model all
/// states are twisted relative to rule.t0.
IntervalResult<Complex> run_interval(const SchrodingerModel& model, const CollocationRule& rule,
                                     const LowRankMatrix<Complex>& u0,
                                     const IntegratorConfig& config);
IntervalResult<Real> run_interval(const ParabolicModel& model, const CollocationRule& rule,
                                  const LowRankMatrix<Real>& u0, const IntegratorConfig& config);

template <class S>
struct Trajectory {
  LowRankMatrix<S> initial;
  std::vector<Real> node_times;
  std::vector<LowRankMatrix<S>> node_states;
  std::vector<Real> boundary_times;
  std::vector<LowRankMatrix<S>> boundary_states;
  std::vector<IntervalTrace> intervals;
  bool converged = true;  ///< false if any interval hit max_iters
};

/// Runs N consecutive subintervals of length h from t = 0. Schrödinger
/// outputs are untwisted. On non-convergence the trajectory continues and
/// is flagged.
Trajectory<Complex> run_evolution(const SchrodingerModel& model, const LowRankMatrix<Complex>& u0,
                                  const IntegratorConfig& config);
Trajectory<Real> run_evolution(const ParabolicModel& model, const LowRankMatrix<Real>& u0,
                               const IntegratorConfig& config);

}  // namespace lrti
