#include "lrti/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace lrti {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

IntegratorConfig integrator_for(const ExperimentConfig& c) { return c.integrator; }

ReferenceConfig reference_for(const ExperimentConfig& c) {
  ReferenceConfig r;
  r.h = c.integrator.h;
  r.N = c.integrator.N;
  r.J = c.integrator.J;
  r.nodes = c.integrator.nodes;
  r.tol = c.reference.tol;
  r.max_iters = c.reference.max_iters;
  r.secondary = {c.reference.n_bisect, c.reference.inner_nodes};
  return r;
}

// Metrics available without a reference: ranks and norms only.
template <class S>
void fill_unreferenced(const Trajectory<S>& run, RunOutcome& out) {
  const Real n0 = run.initial.norm();
  for (std::size_t i = 0; i < run.boundary_times.size(); ++i) {
    BoundaryMetrics m;
    m.time = run.boundary_times[i];
    m.error = kNaN;
    m.rank = static_cast<int>(run.boundary_states[i].rank());
    m.optimal_rank = -1;
    m.norm_dev = std::abs(run.boundary_states[i].norm() - n0);
    out.boundary.push_back(m);
  }
  std::size_t i = 0;
  for (const auto& interval : run.intervals) {
    for (std::size_t j = 0; j < interval.node_rank_min.size(); ++j, ++i) {
      NodeMetrics m;
      m.time = run.node_times[i];
      m.interval = interval.index;
      m.node = static_cast<int>(j);
      m.error = kNaN;
      m.rank = static_cast<int>(run.node_states[i].rank());
      m.optimal_rank = -1;
      m.rank_min = interval.node_rank_min[j];
      m.rank_max = interval.node_rank_max[j];
      out.nodes.push_back(m);
    }
  }
}

template <class S>
void summarize(const Trajectory<S>& run, RunOutcome& out) {
  out.converged = run.converged;
  out.intervals = run.intervals;
  for (const auto& iv : run.intervals) {
    out.total_iterations += static_cast<int>(iv.iterations.size());
    out.max_intermediate_rank = std::max(out.max_intermediate_rank, iv.max_intermediate_rank);
  }
  out.max_error = out.has_reference ? 0 : kNaN;
  for (const auto& m : out.boundary) {
    if (out.has_reference) out.max_error = std::max(out.max_error, m.error);
    out.max_norm_dev = std::max(out.max_norm_dev, m.norm_dev);
    out.max_rank = std::max(out.max_rank, m.rank);
    out.max_optimal_rank = std::max(out.max_optimal_rank, m.optimal_rank);
  }
}

template <class S>
void collect(const ExperimentConfig& c, const Trajectory<S>& run, const DenseTrajectory<S>* ref,
             RunOutcome& out) {
  if (ref) {
    out.has_reference = true;
    out.boundary = boundary_metrics(*ref, run, c.rank_tol());
    out.nodes = node_metrics(*ref, run, c.rank_tol());
    if (!ref->converged) out.warnings.push_back("dense reference did not reach its tolerance");
  } else {
    fill_unreferenced(run, out);
  }
  summarize(run, out);
}

std::string na(Real x) { return std::isnan(x) ? std::string("nan") : fmt::format("{:.12e}", x); }
std::string na(int r) { return r < 0 ? std::string("nan") : fmt::format("{}", r); }

std::string csv_header(const ExperimentConfig& c, std::string_view kind) {
  const auto& in = c.integrator;
  return fmt::format("# lrti-csv v1 {} preset={} problem={} method={} schedule={} theta={} c={} eps={}\n",
                     kind, c.preset, c.problem == Problem::schrodinger ? "schrodinger" : "parabolic",
                     in.method == Method::picard ? "picard" : "sdc",
                     in.schedule.mode == ScheduleMode::constant_decrease ? "constant" : "adaptive",
                     in.schedule.theta, in.schedule.c, in.eps);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return f;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunOutcome out;
  if (config.problem == Problem::schrodinger) {
    const auto model = build_schrodinger(config.K, config.n, config.m, config.potential_scale);
    const auto u0 = schrodinger_initial(config.K);
    const auto rule = make_rule(config.integrator.nodes, config.integrator.J, 0, config.integrator.h);
    const Real rho = contraction_factor(model, rule);
    if (rho >= 1)
      out.warnings.push_back(fmt::format("contraction factor {:.3g} >= 1: the iteration may diverge", rho));
    else if (config.integrator.thresholding && config.integrator.schedule.theta < rho)
      out.warnings.push_back(fmt::format("theta = {} is below the contraction factor {:.3g}",
                                         config.integrator.schedule.theta, rho));
    const auto run = run_evolution(model, u0, integrator_for(config));
    if (config.reference.enabled) {
      const auto ref = dense_reference(model, u0.to_dense(), reference_for(config));
      collect(config, run, &ref, out);
    } else {
      collect<Complex>(config, run, nullptr, out);
    }
  } else {
    const auto model = build_parabolic(config.K, config.a, config.b, default_source_profile(config.K));
    const auto u0 = parabolic_initial(config.K);
    const auto run = run_evolution(model, u0, integrator_for(config));
    if (config.reference.enabled) {
      const auto ref = dense_reference(model, u0.to_dense(), reference_for(config));
      collect(config, run, &ref, out);
    } else {
      collect<Real>(config, run, nullptr, out);
    }
  }
  return out;
}

std::filesystem::path resolve_output_dir(const std::string& configured) {
  if (const char* env = std::getenv("LRTI_OUTPUT_DIR"); env && *env) return env;
  return configured;
}

void write_run_csv(const ExperimentConfig& config, const RunOutcome& outcome,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto f = open_out(dir / "trace.csv");
    f << csv_header(config, "trace");
    f << "time,interval,iteration,residual,err,alpha,min_rank,max_rank,max_intermediate_rank,converged\n";
    for (const auto& iv : outcome.intervals) {
      for (const auto& it : iv.iterations) {
        const auto [lo, hi] = std::minmax_element(it.node_ranks.begin(), it.node_ranks.end());
        f << fmt::format("{:.12g},{},{},{:.12e},{:.12e},{:.12e},{},{},{},{}\n", iv.t1, iv.index,
                         it.iteration, it.residual, it.err, it.alpha, *lo, *hi,
                         it.max_intermediate_rank, iv.converged ? 1 : 0);
      }
    }
  }
  {
    auto f = open_out(dir / "boundary.csv");
    f << csv_header(config, "boundary");
    f << "time,error,rank,optimal_rank,norm_dev\n";
    for (const auto& m : outcome.boundary)
      f << fmt::format("{:.12g},{},{},{},{:.12e}\n", m.time, na(m.error), m.rank, na(m.optimal_rank),
                       m.norm_dev);
  }
  {
    auto f = open_out(dir / "ranks.csv");
    f << csv_header(config, "ranks");
    f << "time,interval,node,rank,optimal_rank,rank_min,rank_max,error\n";
    for (const auto& m : outcome.nodes)
      f << fmt::format("{:.12g},{},{},{},{},{},{},{}\n", m.time, m.interval, m.node, m.rank,
                       na(m.optimal_rank), m.rank_min, m.rank_max, na(m.error));
  }
  {
    auto f = open_out(dir / "config.txt");
    f << dump_config(config);
  }
}

LowRankMatrix<Complex> convergence_initial(int K) {
  Vec<Complex> v = Vec<Complex>::Zero(K);
  v(0) = 1;
  return LowRankMatrix<Complex>::from_factors(v, v);
}

Mat<Complex> exact_schrodinger(const SchrodingerModel& model, const Mat<Complex>& u0, Real t) {
  const int K = model.K;
  const int n = K * K;
  // Column-major vec: index k1 + K k2, and vec(P U Q^T) = (Q kron P) vec(U).
  RealMat H = RealMat::Zero(n, n);
  for (int k2 = 0; k2 < K; ++k2)
    for (int k1 = 0; k1 < K; ++k1) H(k1 + K * k2, k1 + K * k2) = model.lap_eigs(k1) + model.lap_eigs(k2);
  for (const auto& [p, q] : model.potential_terms)
    for (int c2 = 0; c2 < K; ++c2)
      for (int r2 = 0; r2 < K; ++r2) {
        if (q(r2, c2) == 0) continue;
        H.block(K * r2, K * c2, K, K) += q(r2, c2) * p;
      }
  Eigen::SelfAdjointEigenSolver<RealMat> eig(H);
  const Vec<Complex> phases = (Complex(0, -t) * eig.eigenvalues().cast<Complex>()).array().exp().matrix();
  const Mat<Complex> W = eig.eigenvectors().cast<Complex>();
  const Vec<Complex> x = Eigen::Map<const Vec<Complex>>(u0.data(), n);
  const Vec<Complex> y = W * phases.cwiseProduct(W.transpose() * x);
  return Eigen::Map<const Mat<Complex>>(y.data(), K, K);
}

Real fitted_slope(const std::vector<Real>& h, const std::vector<Real>& err) {
  if (h.size() != err.size() || h.size() < 2) throw std::invalid_argument("need at least two points");
  Real mx = 0, my = 0;
  const auto n = static_cast<Real>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]) / n;
    my += std::log(err[i]) / n;
  }
  Real sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Real dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceSettings& s) {
  if (s.J.empty() || s.h.size() < 2) throw std::invalid_argument("need at least one J and two step sizes");
  if (!(s.T > 0)) throw std::invalid_argument("final time must be positive");
  const auto model = build_schrodinger(s.K, s.n, s.m, s.potential_scale);
  const auto u0 = convergence_initial(s.K);
  const Mat<Complex> exact = exact_schrodinger(model, u0.to_dense(), s.T);
  std::vector<ConvergenceRow> rows;
  for (int J : s.J) {
    std::vector<Real> errs;
    for (Real h : s.h) {
      const Real steps = s.T / h;
      const int N = static_cast<int>(std::lround(steps));
      if (N < 1 || std::abs(steps - N) > 1e-9 * steps)
        throw std::invalid_argument(fmt::format("step size {} does not divide T = {}", h, s.T));
      IntegratorConfig c;
      c.h = s.T / N;
      c.N = N;
      c.J = J;
      c.nodes = s.nodes;
      c.thresholding = false;
      c.delta_rel = 0;
      c.delta_rel_residual = 0;
      c.delta_boundary = 0;
      c.eps = s.eps;
      c.max_iters = s.max_iters;
      const auto run = run_evolution(model, u0, c);
      const Real err = (run.boundary_states.back().to_dense() - exact).norm();
      errs.push_back(err);
      rows.push_back({s.T, J, h, err, 0});
    }
    const Real slope = fitted_slope(s.h, errs);
    for (auto& r : rows)
      if (r.J == J) r.fitted_order = slope;
  }
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto f = open_out(path);
  f << "# lrti-csv v1 convergence\n";
  f << "time,J,h,error,fitted_order\n";
  for (const auto& r : rows)
    f << fmt::format("{:.12g},{},{:.12g},{:.12e},{:.6f}\n", r.time, r.J, r.h, r.error, r.fitted_order);
}

}  // namespace lrti
