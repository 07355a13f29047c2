#pragma once

#include <vector>

#include "lrti/integrator.hpp"

namespace lrti {

/// Full-matrix states at the node and boundary times of a run.
template <class S>
struct DenseTrajectory {
  Mat<S> initial;
  std::vector<Real> node_times;
  std::vector<Mat<S>> node_states;
  std::vector<Real> boundary_times;
  std::vector<Mat<S>> boundary_states;
  std::vector<int> iterations;  ///< per interval
  bool converged = true;
};

struct ReferenceConfig {
  Real h = 0.1;
  int N = 5;
  int J = 11;
  NodeKind nodes = NodeKind::gauss;
  Real tol = 1e-12;
  int max_iters = 500;
  SecondaryQuadrature secondary{10, 5};
};

/// Dense Picard iteration with the same collocation rule, no truncation.
/// Iterates on each interval until max_j ||v^{k+1}_j - v^k_j||_F <= tol.
DenseTrajectory<Complex> dense_reference(const SchrodingerModel& model, const Mat<Complex>& u0,
                                         const ReferenceConfig& config);
DenseTrajectory<Real> dense_reference(const ParabolicModel& model, const RealMat& u0,
                                      const ReferenceConfig& config);

/// Minimal rank r with singular-value tail energy <= tol^2.
template <class S>
int optimal_rank(const Mat<S>& state, Real tol);
template <class S>
std::vector<int> optimal_ranks(const std::vector<Mat<S>>& states, Real tol);

struct BoundaryMetrics {
  Real time = 0;
  Real error = 0;  ///< ||u_run - u_ref||_F
  int rank = 0;
  int optimal_rank = 0;
  Real norm_dev = 0;  ///< | ||u_run|| - ||u0|| |
};

struct NodeMetrics {
  Real time = 0;
  int interval = 0;
  int node = 0;
  Real error = 0;
  int rank = 0;
  int optimal_rank = 0;
  int rank_min = 0;  ///< over all iterates of the interval
  int rank_max = 0;
};

/// Throws std::invalid_argument when the time grids differ.
template <class S>
std::vector<BoundaryMetrics> boundary_metrics(const DenseTrajectory<S>& ref,
                                              const Trajectory<S>& run, Real rank_tol);
template <class S>
std::vector<NodeMetrics> node_metrics(const DenseTrajectory<S>& ref, const Trajectory<S>& run,
                                      Real rank_tol);

}  // namespace lrti
