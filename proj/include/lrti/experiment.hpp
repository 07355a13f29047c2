#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrti/integrator.hpp"
#include "lrti/reference.hpp"

namespace lrti {

enum class Problem { schrodinger, parabolic };

struct ReferenceSettings {
  bool enabled = true;
  Real tol = 1e-12;
  int n_bisect = 10;
  int inner_nodes = 5;
  int max_iters = 500;
  Real rank_tol = 0;  ///< tolerance of the optimal-rank benchmark; 0 means "use eps"
};

/// Everything needed to reproduce one run. Defaults are the Schrödinger
/// preset at tolerance 1e-3.
struct ExperimentConfig {
  std::string preset = "schrodinger-1e3";
  Problem problem = Problem::schrodinger;
  int K = 300;
  int n = 1, m = 1;
  Real potential_scale = 1;
  Real a = 1, b = -0.5;
  IntegratorConfig integrator;
  ReferenceSettings reference;
  std::string output_dir = "lrti-out";

  Real rank_tol() const { return reference.rank_tol > 0 ? reference.rank_tol : integrator.eps; }
  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Parse failure with the 1-based line number of the offending input.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

std::vector<std::string> preset_names();
/// Throws std::invalid_argument for unknown names.
ExperimentConfig make_preset(std::string_view name);

/// Sets one key, given either as "section.key" or as a bare key. Setting
/// `schedule` also resets theta and c to that schedule's defaults for the
/// current problem; later theta/c assignments override them.
/// Throws std::invalid_argument on unknown keys or malformed values.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines grouped by `[section]` headers; `#` starts a
/// comment. A `preset = NAME` line must come before any other key and selects
/// the base configuration.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Round-trips through parse_config.
std::string dump_config(const ExperimentConfig& config);

struct RunOutcome {
  bool converged = true;
  bool has_reference = false;
  int total_iterations = 0;
  Real max_error = 0;
  Real max_norm_dev = 0;
  int max_rank = 0;
  int max_optimal_rank = 0;
  int max_intermediate_rank = 0;
  std::vector<BoundaryMetrics> boundary;
  std::vector<NodeMetrics> nodes;
  std::vector<IntervalTrace> intervals;
  std::vector<std::string> warnings;
};

RunOutcome run_experiment(const ExperimentConfig& config);

/// Writes trace.csv, boundary.csv, ranks.csv and config.txt into `dir`.
void write_run_csv(const ExperimentConfig& config, const RunOutcome& outcome,
                   const std::filesystem::path& dir);

/// The output directory, with the LRTI_OUTPUT_DIR environment variable taking
/// precedence over the configured one.
std::filesystem::path resolve_output_dir(const std::string& configured);

struct ConvergenceSettings {
  std::vector<int> J{2, 3};
  std::vector<Real> h{0.2, 0.1, 0.05, 0.025};
  int K = 32;
  Real T = 0.2;
  int n = 1, m = 1;
  Real potential_scale = 1;
  NodeKind nodes = NodeKind::gauss;
  Real eps = 1e-13;
  int max_iters = 400;
};

struct ConvergenceRow {
  Real time = 0;
  int J = 0;
  Real h = 0;
  Real error = 0;
  Real fitted_order = 0;  ///< least-squares log-log slope for this J
};

/// Initial data of the convergence study: the product of the lowest sine
/// modes, e_1 (x) e_1.
LowRankMatrix<Complex> convergence_initial(int K);

/// u(t) = exp(-i t H) u0 with H = stiffness + potential, by Hermitian
/// eigendecomposition of the K^2 x K^2 Galerkin matrix.
Mat<Complex> exact_schrodinger(const SchrodingerModel& model, const Mat<Complex>& u0, Real t);

/// Least-squares slope of log(err) against log(h).
Real fitted_slope(const std::vector<Real>& h, const std::vector<Real>& err);

/// Thresholds and recompression are disabled; errors are measured at T.
std::vector<ConvergenceRow> run_convergence(const ConvergenceSettings& settings);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           const std::filesystem::path& path);

}  // namespace lrti
