#include "lrti/lrti.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>
#include <variant>

#include "lrti/experiment.hpp"
#include "lrti/lowrank.hpp"
#include "lrti/properties.hpp"
#include "lrti/quadrature.hpp"

using namespace lrti;

struct lrti_matrix {
  std::variant<LowRankMatrix<Real>, LowRankMatrix<Complex>> value;
};

struct lrti_rule {
  CollocationRule rule;
};

struct lrti_config {
  ExperimentConfig config;
  std::string dump;
  std::string output_dir;
};

namespace {

thread_local std::string last_error;

lrti_status fail(lrti_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, mapping exceptions to status codes.
template <class F>
lrti_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const ConfigError& e) {
    return fail(LRTI_ERR_CONFIG, e.what());
  } catch (const ShapeError& e) {
    return fail(LRTI_ERR_SHAPE, e.what());
  } catch (const std::domain_error& e) {
    return fail(LRTI_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(LRTI_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(LRTI_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LRTI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LRTI_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LRTI_ERR_INTERNAL, "unknown error");
  }
}

#define LRTI_REQUIRE(cond, msg) \
  if (!(cond)) return fail(LRTI_ERR_INVALID_ARGUMENT, msg)

template <class F>
lrti_status unary(const lrti_matrix* m, lrti_matrix** out, F&& op) {
  LRTI_REQUIRE(m && out, "null argument");
  return guarded([&] {
    auto* r = new lrti_matrix{std::visit([&](const auto& a) -> decltype(lrti_matrix::value) { return op(a); },
                                         m->value)};
    *out = r;
    return LRTI_OK;
  });
}

// Promotes a real operand when the other one is complex.
LowRankMatrix<Complex> as_complex(const lrti_matrix* m) {
  if (const auto* c = std::get_if<LowRankMatrix<Complex>>(&m->value)) return *c;
  const auto& r = std::get<LowRankMatrix<Real>>(m->value);
  return LowRankMatrix<Complex>::from_svd(r.left().cast<Complex>(), r.sigma(), r.right().cast<Complex>());
}

bool both_real(const lrti_matrix* a, const lrti_matrix* b) {
  return std::holds_alternative<LowRankMatrix<Real>>(a->value) &&
         std::holds_alternative<LowRankMatrix<Real>>(b->value);
}

}  // namespace

extern "C" {

const char* lrti_version(void) { return "1.0.0"; }

const char* lrti_last_error(void) { return last_error.c_str(); }

const char* lrti_status_string(lrti_status status) {
  switch (status) {
    case LRTI_OK: return "ok";
    case LRTI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LRTI_ERR_SHAPE: return "shape mismatch";
    case LRTI_ERR_CONFIG: return "configuration error";
    case LRTI_ERR_NOT_CONVERGED: return "not converged";
    case LRTI_ERR_IO: return "i/o error";
    case LRTI_ERR_DOMAIN: return "domain error";
    case LRTI_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

lrti_status lrti_matrix_from_dense(size_t rows, size_t cols, const double* real, const double* imag,
                                   double drop_tol, lrti_matrix** out) {
  LRTI_REQUIRE(out && (real || rows * cols == 0), "null argument");
  LRTI_REQUIRE(drop_tol >= 0, "drop_tol must be non-negative");
  return guarded([&] {
    const auto r = static_cast<Eigen::Index>(rows), c = static_cast<Eigen::Index>(cols);
    if (imag) {
      Mat<Complex> a(r, c);
      for (Eigen::Index k = 0; k < r * c; ++k) a.data()[k] = Complex(real[k], imag[k]);
      *out = new lrti_matrix{from_dense(a, drop_tol)};
    } else {
      const Mat<Real> a = Eigen::Map<const Mat<Real>>(real, r, c);
      *out = new lrti_matrix{from_dense(a, drop_tol)};
    }
    return LRTI_OK;
  });
}

void lrti_matrix_free(lrti_matrix* m) { delete m; }

lrti_status lrti_matrix_shape(const lrti_matrix* m, size_t* rows, size_t* cols, size_t* rank,
                              int* is_complex) {
  LRTI_REQUIRE(m, "null matrix");
  std::visit(
      [&](const auto& a) {
        if (rows) *rows = static_cast<size_t>(a.rows());
        if (cols) *cols = static_cast<size_t>(a.cols());
        if (rank) *rank = static_cast<size_t>(a.rank());
      },
      m->value);
  if (is_complex) *is_complex = std::holds_alternative<LowRankMatrix<Complex>>(m->value);
  return LRTI_OK;
}

lrti_status lrti_matrix_singular_values(const lrti_matrix* m, double* sigma) {
  LRTI_REQUIRE(m && sigma, "null argument");
  std::visit(
      [&](const auto& a) {
        for (Eigen::Index k = 0; k < a.rank(); ++k) sigma[k] = a.sigma()(k);
      },
      m->value);
  return LRTI_OK;
}

lrti_status lrti_matrix_to_dense(const lrti_matrix* m, double* real, double* imag) {
  LRTI_REQUIRE(m && real, "null argument");
  return guarded([&] {
    std::visit(
        [&](const auto& a) {
          const auto d = a.to_dense();
          for (Eigen::Index k = 0; k < d.size(); ++k) {
            real[k] = std::real(d.data()[k]);
            if (imag) imag[k] = std::imag(d.data()[k]);
          }
        },
        m->value);
    return LRTI_OK;
  });
}

lrti_status lrti_matrix_add(const lrti_matrix* a, const lrti_matrix* b, double delta, lrti_matrix** out) {
  LRTI_REQUIRE(a && b && out, "null argument");
  LRTI_REQUIRE(delta >= 0, "delta must be non-negative");
  return guarded([&] {
    if (both_real(a, b))
      *out = new lrti_matrix{add(std::get<LowRankMatrix<Real>>(a->value),
                                 std::get<LowRankMatrix<Real>>(b->value), delta)};
    else
      *out = new lrti_matrix{add(as_complex(a), as_complex(b), delta)};
    return LRTI_OK;
  });
}

lrti_status lrti_matrix_soft_threshold(const lrti_matrix* m, double alpha, lrti_matrix** out) {
  LRTI_REQUIRE(alpha >= 0, "alpha must be non-negative");
  return unary(m, out, [&](const auto& a) { return soft_threshold(a, alpha); });
}

lrti_status lrti_matrix_hard_threshold(const lrti_matrix* m, double alpha, lrti_matrix** out) {
  LRTI_REQUIRE(alpha >= 0, "alpha must be non-negative");
  return unary(m, out, [&](const auto& a) { return hard_threshold(a, alpha); });
}

lrti_status lrti_matrix_recompress(const lrti_matrix* m, double delta, lrti_matrix** out) {
  LRTI_REQUIRE(delta >= 0, "delta must be non-negative");
  return unary(m, out, [&](const auto& a) { return recompress(a, delta); });
}

lrti_status lrti_matrix_distance(const lrti_matrix* a, const lrti_matrix* b, double* out) {
  LRTI_REQUIRE(a && b && out, "null argument");
  return guarded([&] {
    if (both_real(a, b))
      *out = frobenius_dist(std::get<LowRankMatrix<Real>>(a->value), std::get<LowRankMatrix<Real>>(b->value));
    else
      *out = frobenius_dist(as_complex(a), as_complex(b));
    return LRTI_OK;
  });
}

lrti_status lrti_rule_create(lrti_node_kind kind, int J, double t0, double h, lrti_rule** out) {
  LRTI_REQUIRE(out, "null argument");
  LRTI_REQUIRE(kind == LRTI_NODES_GAUSS || kind == LRTI_NODES_RADAU, "unknown node kind");
  return guarded([&] {
    *out = new lrti_rule{make_rule(kind == LRTI_NODES_GAUSS ? NodeKind::gauss : NodeKind::radau_right, J, t0, h)};
    return LRTI_OK;
  });
}

void lrti_rule_free(lrti_rule* rule) { delete rule; }

int lrti_rule_size(const lrti_rule* rule) { return rule ? rule->rule.size() : 0; }

lrti_status lrti_rule_nodes(const lrti_rule* rule, double* nodes, double* weights) {
  LRTI_REQUIRE(rule, "null rule");
  for (int m = 0; m < rule->rule.size(); ++m) {
    if (nodes) nodes[m] = rule->rule.nodes(m);
    if (weights) weights[m] = rule->rule.weights(m);
  }
  return LRTI_OK;
}

lrti_status lrti_rule_integration_matrix(const lrti_rule* rule, double* omega) {
  LRTI_REQUIRE(rule && omega, "null argument");
  const int J = rule->rule.size();
  for (int j = 0; j < J; ++j)
    for (int m = 0; m < J; ++m) omega[j * J + m] = rule->rule.omega(j, m);
  return LRTI_OK;
}

lrti_status lrti_rule_lebesgue(const lrti_rule* rule, double* lambda) {
  LRTI_REQUIRE(rule && lambda, "null argument");
  *lambda = rule->rule.lambda;
  return LRTI_OK;
}

size_t lrti_preset_count(void) { return preset_names().size(); }

const char* lrti_preset_name(size_t index) {
  static const std::vector<std::string> names = preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

lrti_status lrti_config_preset(const char* name, lrti_config** out) {
  LRTI_REQUIRE(name && out, "null argument");
  return guarded([&] {
    *out = new lrti_config{make_preset(name), {}, {}};
    return LRTI_OK;
  });
}

lrti_status lrti_config_parse(const char* text, const char* source, lrti_config** out, int* line) {
  LRTI_REQUIRE(text && out, "null argument");
  try {
    *out = new lrti_config{parse_config(text, source ? source : "<config>"), {}, {}};
    return LRTI_OK;
  } catch (const ConfigError& e) {
    if (line) *line = e.line();
    return fail(LRTI_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(LRTI_ERR_CONFIG, e.what());
  }
}

lrti_status lrti_config_load(const char* path, lrti_config** out, int* line) {
  LRTI_REQUIRE(path && out, "null argument");
  try {
    *out = new lrti_config{load_config(path), {}, {}};
    return LRTI_OK;
  } catch (const ConfigError& e) {
    if (line) *line = e.line();
    return fail(LRTI_ERR_CONFIG, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(LRTI_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(LRTI_ERR_CONFIG, e.what());
  }
}

void lrti_config_free(lrti_config* config) { delete config; }

lrti_status lrti_config_set(lrti_config* config, const char* key, const char* value) {
  LRTI_REQUIRE(config && key && value, "null argument");
  try {
    ExperimentConfig updated = config->config;
    set_config_value(updated, key, value);
    config->config = std::move(updated);
    return LRTI_OK;
  } catch (const std::exception& e) {
    return fail(LRTI_ERR_CONFIG, e.what());
  }
}

const char* lrti_config_dump(lrti_config* config) {
  if (!config) return "";
  config->dump = dump_config(config->config);
  return config->dump.c_str();
}

const char* lrti_config_output_dir(lrti_config* config) {
  if (!config) return "";
  config->output_dir = resolve_output_dir(config->config.output_dir).string();
  return config->output_dir.c_str();
}

lrti_status lrti_run(const lrti_config* config, const char* output_dir, lrti_message_fn warn, void* user,
                     lrti_run_summary* summary) {
  LRTI_REQUIRE(config, "null config");
  try {
    config->config.validate();
  } catch (const std::exception& e) {
    return fail(LRTI_ERR_CONFIG, e.what());
  }
  return guarded([&] {
    const RunOutcome outcome = run_experiment(config->config);
    if (warn)
      for (const auto& w : outcome.warnings) warn(w.c_str(), user);
    const std::filesystem::path dir =
        output_dir ? std::filesystem::path(output_dir) : resolve_output_dir(config->config.output_dir);
    write_run_csv(config->config, outcome, dir);
    if (summary) {
      summary->converged = outcome.converged;
      summary->has_reference = outcome.has_reference;
      summary->intervals = static_cast<int>(outcome.intervals.size());
      summary->total_iterations = outcome.total_iterations;
      summary->max_error = outcome.has_reference ? outcome.max_error : std::numeric_limits<double>::quiet_NaN();
      summary->max_norm_dev = outcome.has_reference ? outcome.max_norm_dev : std::numeric_limits<double>::quiet_NaN();
      summary->max_rank = outcome.max_rank;
      summary->max_optimal_rank = outcome.has_reference ? outcome.max_optimal_rank : -1;
      summary->max_intermediate_rank = outcome.max_intermediate_rank;
    }
    if (!outcome.converged)
      return fail(LRTI_ERR_NOT_CONVERGED, "at least one interval reached the iteration cap");
    return LRTI_OK;
  });
}

lrti_status lrti_convergence(const int* J, size_t n_J, const double* h, size_t n_h, int K, double T,
                             const char* csv_path, double* fitted_orders) {
  LRTI_REQUIRE(J && h && n_J > 0 && n_h > 1, "need at least one J and two step sizes");
  return guarded([&] {
    ConvergenceSettings s;
    s.J.assign(J, J + n_J);
    s.h.assign(h, h + n_h);
    s.K = K;
    s.T = T;
    const auto rows = run_convergence(s);
    if (csv_path) write_convergence_csv(rows, csv_path);
    if (fitted_orders)
      for (size_t i = 0; i < n_J; ++i)
        for (const auto& r : rows)
          if (r.J == J[i]) fitted_orders[i] = r.fitted_order;
    return LRTI_OK;
  });
}

lrti_status lrti_properties(uint64_t seed, int pairs, lrti_message_fn report, void* user, int* failures) {
  LRTI_REQUIRE(pairs >= 0, "pairs must be non-negative");
  return guarded([&] {
    const PropertyReport rep = run_property_suite(seed, pairs);
    int failed = 0;
    for (const auto& r : rep.results) {
      if (!r.passed()) ++failed;
      if (report) {
        std::string line = (r.passed() ? "PASS " : "FAIL ") + r.name + " (" + std::to_string(r.cases) + " cases";
        if (!r.passed()) line += ", " + std::to_string(r.failures) + " failed, first: " + r.first_failure;
        line += ")";
        report(line.c_str(), user);
      }
    }
    if (failures) *failures = failed;
    return LRTI_OK;
  });
}

}  // extern "C"
