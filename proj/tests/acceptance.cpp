// Acceptance checks. Prints one PASS/FAIL line per criterion; the exit code
// is the number of failed criteria. Pass criterion numbers as arguments to
// run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "dense_checks.hpp"
#include "lrti/experiment.hpp"
#include "lrti/properties.hpp"
#include "lrti/quadrature.hpp"

using namespace lrti;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

Real monomial_relative_error(const CollocationRule& rule, int d) {
  // Centered monomial on [0, 1]; reference values from the closed form.
  const Real exact = d % 2 == 0 ? 2 * std::pow(0.5, d + 1) / (d + 1) : 0.0;
  const Real scale = 2 * std::pow(0.5, d + 1) / (d + 1);
  Real q = 0;
  for (int m = 0; m < rule.size(); ++m) q += rule.weights(m) * std::pow(rule.nodes(m) - 0.5, d);
  return std::abs(q - exact) / scale;
}

Verdict quadrature_exactness() {
  Real worst_exact = 0, least_inexact = INFINITY;
  for (NodeKind kind : {NodeKind::gauss, NodeKind::radau_right}) {
    for (int J = 1; J <= 11; ++J) {
      const auto rule = make_rule(kind, J, 0, 1);
      const int deg = kind == NodeKind::gauss ? 2 * J - 1 : 2 * J - 2;
      for (int d = 0; d <= deg; ++d) worst_exact = std::max(worst_exact, monomial_relative_error(rule, d));
      least_inexact = std::min(least_inexact, monomial_relative_error(rule, deg + 1));
    }
  }
  return {worst_exact <= 1e-12 && least_inexact > 1e-8,
          fmt::format("max error up to exact degree {:.2e}, min error one degree above {:.2e}", worst_exact,
                      least_inexact)};
}

Verdict lebesgue_bound() {
  Real lo = INFINITY, hi = 0;
  for (NodeKind kind : {NodeKind::gauss, NodeKind::radau_right})
    for (int J = 1; J <= 10; ++J) {
      const Real lam = make_rule(kind, J, 0, 1).lambda;
      lo = std::min(lo, lam);
      hi = std::max(hi, lam);
    }
  return {lo >= 1 - 1e-12 && hi <= 2, fmt::format("Lambda_J range [{:.6f}, {:.6f}]", lo, hi)};
}

Verdict thresholding_properties() {
  const auto report = run_property_suite(20240601, 1000);
  int failed = 0, cases = 0;
  std::string names;
  for (const auto& r : report.results) {
    cases += r.cases;
    if (!r.passed()) {
      ++failed;
      names += " [" + r.name + ": " + r.first_failure + "]";
    }
  }
  return {failed == 0, fmt::format("{} properties, {} cases, {} failed{}", report.results.size(), cases, failed, names)};
}

Verdict dense_equivalence() {
  Real blocks = 0, solve = 0;
  for (int J : {2, 3}) {
    const auto g = dense_checks::schrodinger(J, NodeKind::gauss);
    const auto r = dense_checks::schrodinger(J, NodeKind::radau_right);
    const auto p = dense_checks::parabolic(J);
    blocks = std::max({blocks, g.worst(), r.worst(), p.worst()});
    solve = std::max({solve, g.solve, r.solve, p.solve});
  }
  return {blocks <= 1e-10 && solve <= 1e-9,
          fmt::format("max relative deviation: building blocks {:.2e}, converged stages {:.2e}", blocks, solve)};
}

Verdict contraction() {
  const int K = 32;
  const auto model = build_schrodinger(K, 1, 1);
  const auto rule = gauss_legendre(5, 0, 0.1);
  const Real rho = contraction_factor(model, rule);
  IntegratorConfig cfg;
  cfg.h = 0.1;
  cfg.J = 5;
  cfg.thresholding = false;
  cfg.eps = 1e-13;
  cfg.delta_rel = 0;
  cfg.delta_rel_residual = 0;
  cfg.delta_boundary = 0;
  const auto res = run_interval(model, rule, schrodinger_initial(K), cfg);
  Real worst = 0;
  const auto& its = res.trace.iterations;
  for (std::size_t k = 1; k < its.size(); ++k)
    if (its[k - 1].residual > 1e-11) worst = std::max(worst, its[k].residual / its[k - 1].residual);
  return {res.trace.converged && worst <= rho + 0.05,
          fmt::format("max residual ratio {:.4f}, bound rho + 0.05 = {:.4f}, {} iterations", worst, rho + 0.05,
                      its.size())};
}

Verdict isometry() {
  const int K = 32;
  const auto model = build_schrodinger(K, 1, 1);
  const auto u0 = schrodinger_initial(K);
  IntegratorConfig cfg;
  cfg.h = 0.1;
  cfg.N = 5;
  cfg.J = 5;
  cfg.thresholding = false;
  cfg.eps = 1e-12;
  cfg.delta_rel = 0;
  cfg.delta_rel_residual = 0;
  cfg.delta_boundary = 0;
  const auto run = run_evolution(model, u0, cfg);
  Real worst = 0;
  for (const auto& b : run.boundary_states) worst = std::max(worst, std::abs(b.norm() - u0.norm()));
  return {run.converged && worst <= 1e-10, fmt::format("max boundary norm deviation {:.2e}", worst)};
}

Verdict convergence_order() {
  const ConvergenceSettings s;
  const auto rows = run_convergence(s);
  bool ok = true;
  std::string detail;
  for (int J : s.J) {
    Real slope = NAN;
    std::string errs;
    for (const auto& r : rows)
      if (r.J == J) {
        slope = r.fitted_order;
        errs += fmt::format(" {:.2e}", r.error);
      }
    ok = ok && std::abs(slope - 2 * J) <= 0.5;
    detail += fmt::format("J={}: slope {:.2f} (target {}), errors{}; ", J, slope, 2 * J, errs);
  }
  // Diagnostic only: the same fit on finer steps.
  ConvergenceSettings fine = s;
  fine.h = {0.05, 0.025, 0.0125, 0.00625};
  const auto fine_rows = run_convergence(fine);
  detail += "finer steps 0.05..0.00625:";
  for (int J : s.J)
    for (const auto& r : fine_rows)
      if (r.J == J && r.h == fine.h.back()) detail += fmt::format(" J={} slope {:.2f}", J, r.fitted_order);
  return {ok, detail};
}

struct RunSummary {
  std::string label;
  RunOutcome outcome;
  Real seconds = 0;
};

RunSummary timed_run(const ExperimentConfig& c, std::string label) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary s{std::move(label), run_experiment(c), 0};
  s.seconds = std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

ExperimentConfig with_solver(ExperimentConfig c, Method method, bool adaptive) {
  c.integrator.method = method;
  set_config_value(c, "integrator.schedule", adaptive ? "adaptive" : "constant");
  c.reference.enabled = true;
  return c;
}

Verdict schrodinger_reproduction() {
  bool ok = true;
  std::string detail;
  for (const char* preset : {"schrodinger-1e3", "schrodinger-1e6"}) {
    for (Method method : {Method::picard, Method::sdc}) {
      for (bool adaptive : {false, true}) {
        const auto cfg = with_solver(make_preset(preset), method, adaptive);
        const auto label = fmt::format("{} {} {}", preset, method == Method::picard ? "picard" : "sdc",
                                       adaptive ? "adaptive" : "constant");
        const auto r = timed_run(cfg, label);
        const auto& o = r.outcome;
        const bool a = o.max_error <= cfg.integrator.eps;
        const bool b = o.max_norm_dev <= 100 * cfg.integrator.delta_boundary;
        const bool c = o.max_rank <= 4 * o.max_optimal_rank;
        const bool pass = o.converged && a && b && c;
        ok = ok && pass;
        const auto line = fmt::format(
            "{}: {} err {:.2e} (<= {:.0e}: {}), norm dev {:.2e} (<= {:.0e}: {}), rank {} vs optimal {} ({}), "
            "{} iterations, {:.0f} s",
            label, pass ? "ok" : "FAIL", o.max_error, cfg.integrator.eps, a ? "yes" : "no", o.max_norm_dev,
            100 * cfg.integrator.delta_boundary, b ? "yes" : "no", o.max_rank, o.max_optimal_rank, c ? "ok" : "no",
            o.total_iterations, r.seconds);
        std::printf("    %s\n", line.c_str());
        std::fflush(stdout);
        detail += (pass ? "" : line + "; ");
      }
    }
  }
  return {ok, ok ? "all 8 solver/schedule/tolerance combinations within bounds" : detail};
}

Verdict parabolic_reproduction() {
  bool ok = true;
  std::string detail;
  for (bool adaptive : {false, true}) {
    const auto cfg = with_solver(make_preset("parabolic"), Method::picard, adaptive);
    const auto r = timed_run(cfg, adaptive ? "parabolic adaptive" : "parabolic constant");
    const auto& o = r.outcome;
    // (a) bounded errors with an increasing trend: positive least-squares
    // slope in time and the final error within a factor 2 of the maximum.
    Real st = 0, se = 0, stt = 0, ste = 0;
    const auto n = static_cast<Real>(o.boundary.size());
    for (const auto& m : o.boundary) {
      st += m.time;
      se += m.error;
      stt += m.time * m.time;
      ste += m.time * m.error;
    }
    const Real slope = (n * ste - st * se) / (n * stt - st * st);
    const bool a = o.max_error <= 5e-4 && slope > 0 && o.boundary.back().error >= 0.5 * o.max_error;
    // (b) boundary ranks within a factor 3 of the optimal ranks
    Real rank_ratio = 0;
    for (const auto& m : o.boundary)
      rank_ratio = std::max(rank_ratio, static_cast<Real>(m.rank) / std::max(1, m.optimal_rank));
    const bool b = rank_ratio <= 3;
    // (c) intermediate ranks against the largest node rank of each interval
    Real inter_ratio = 0;
    for (const auto& iv : o.intervals) {
      int scheme = 1;
      for (const auto& m : o.nodes)
        if (m.interval == iv.index) scheme = std::max(scheme, m.rank);
      inter_ratio = std::max(inter_ratio, static_cast<Real>(iv.max_intermediate_rank) / scheme);
    }
    const bool c = inter_ratio <= 2.5;
    const bool pass = o.converged && a && b && c;
    ok = ok && pass;
    const auto line = fmt::format(
        "{}: {} max err {:.2e}, trend slope {:.2e}, final/max {:.2f} ({}), rank/optimal <= {:.2f} ({}), "
        "intermediate/scheme <= {:.2f} ({}), {} iterations, {:.0f} s",
        r.label, pass ? "ok" : "FAIL", o.max_error, slope, o.boundary.back().error / o.max_error, a ? "ok" : "no",
        rank_ratio, b ? "ok" : "no", inter_ratio, c ? "ok" : "no", o.total_iterations, r.seconds);
    std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    detail += line + "; ";
  }
  return {ok, ok ? "both schedules within bounds" : detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const auto cfg = make_preset("schrodinger-1e3");
  const auto base = std::filesystem::temp_directory_path() / "lrti-acceptance-determinism";
  std::filesystem::remove_all(base);
  write_run_csv(cfg, run_experiment(cfg), base / "first");
  write_run_csv(cfg, run_experiment(cfg), base / "second");
  std::string differing;
  for (const char* f : {"trace.csv", "boundary.csv", "ranks.csv", "config.txt"})
    if (slurp(base / "first" / f) != slurp(base / "second" / f) || slurp(base / "first" / f).empty())
      differing += std::string(" ") + f;
  return {differing.empty(), differing.empty() ? "two schrodinger-1e3 runs wrote byte-identical files"
                                               : "files differ:" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"quadrature exactness", quadrature_exactness},
      {"averaged Lebesgue constant in [1, 2]", lebesgue_bound},
      {"thresholding properties over 1000 pairs", thresholding_properties},
      {"dense-oracle equivalence at K = 8", dense_equivalence},
      {"Picard contraction factor", contraction},
      {"isometry preservation", isometry},
      {"convergence order 2J", convergence_order},
      {"Schrodinger experiment reproduction", schrodinger_reproduction},
      {"parabolic experiment reproduction", parabolic_reproduction},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const Real secs = std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("criterion %2d: %s  %s (%.1f s): %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
