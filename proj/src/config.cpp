#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "lrti/experiment.hpp"

namespace lrti {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", source, line, message)), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw std::invalid_argument(fmt::format("{}: expected {}, got '{}'", key, expected, value));
}

int parse_int(std::string_view key, std::string_view s) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, "an integer");
  return out;
}

Real parse_real(std::string_view key, std::string_view s) {
  Real out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out))
    bad_value(key, s, "a finite number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  bad_value(key, s, "true or false");
}

std::string fmt_real(Real x) { return fmt::format("{}", x); }  // shortest exact round trip

// Adaptive-schedule defaults differ between the two problems.
void apply_schedule_defaults(ExperimentConfig& c) {
  auto& s = c.integrator.schedule;
  if (s.mode == ScheduleMode::constant_decrease) {
    s.theta = 0.5;
  } else {
    s.theta = 0.2;
    s.c = c.problem == Problem::schrodinger ? 1.0 / 6 : 0.4;
  }
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

TheoremTolerances& theorem(ExperimentConfig& c) {
  if (!c.integrator.theorem) c.integrator.theorem.emplace();
  return *c.integrator.theorem;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.K", [](auto& c, auto k, auto v) { c.K = parse_int(k, v); }},
      {"model.n", [](auto& c, auto k, auto v) { c.n = parse_int(k, v); }},
      {"model.m", [](auto& c, auto k, auto v) { c.m = parse_int(k, v); }},
      {"model.potential_scale", [](auto& c, auto k, auto v) { c.potential_scale = parse_real(k, v); }},
      {"model.a", [](auto& c, auto k, auto v) { c.a = parse_real(k, v); }},
      {"model.b", [](auto& c, auto k, auto v) { c.b = parse_real(k, v); }},
      {"integrator.h", [](auto& c, auto k, auto v) { c.integrator.h = parse_real(k, v); }},
      {"integrator.N", [](auto& c, auto k, auto v) { c.integrator.N = parse_int(k, v); }},
      {"integrator.J", [](auto& c, auto k, auto v) { c.integrator.J = parse_int(k, v); }},
      {"integrator.nodes",
       [](auto& c, auto k, auto v) {
         if (v == "gauss") c.integrator.nodes = NodeKind::gauss;
         else if (v == "radau") c.integrator.nodes = NodeKind::radau_right;
         else bad_value(k, v, "gauss or radau");
       }},
      {"integrator.method",
       [](auto& c, auto k, auto v) {
         if (v == "picard") c.integrator.method = Method::picard;
         else if (v == "sdc") c.integrator.method = Method::sdc;
         else bad_value(k, v, "picard or sdc");
       }},
      {"integrator.schedule",
       [](auto& c, auto k, auto v) {
         if (v == "constant") c.integrator.schedule.mode = ScheduleMode::constant_decrease;
         else if (v == "adaptive") c.integrator.schedule.mode = ScheduleMode::adaptive;
         else bad_value(k, v, "constant or adaptive");
         apply_schedule_defaults(c);
       }},
      {"integrator.theta", [](auto& c, auto k, auto v) { c.integrator.schedule.theta = parse_real(k, v); }},
      {"integrator.c", [](auto& c, auto k, auto v) { c.integrator.schedule.c = parse_real(k, v); }},
      {"integrator.thresholding",
       [](auto& c, auto k, auto v) { c.integrator.thresholding = parse_bool(k, v); }},
      {"integrator.eps", [](auto& c, auto k, auto v) { c.integrator.eps = parse_real(k, v); }},
      {"integrator.delta_boundary",
       [](auto& c, auto k, auto v) { c.integrator.delta_boundary = parse_real(k, v); }},
      {"integrator.delta_rel", [](auto& c, auto k, auto v) { c.integrator.delta_rel = parse_real(k, v); }},
      {"integrator.delta_rel_residual",
       [](auto& c, auto k, auto v) { c.integrator.delta_rel_residual = parse_real(k, v); }},
      {"integrator.max_iters", [](auto& c, auto k, auto v) { c.integrator.max_iters = parse_int(k, v); }},
      {"integrator.n_bisect",
       [](auto& c, auto k, auto v) { c.integrator.secondary.n_bisect = parse_int(k, v); }},
      {"integrator.inner_nodes",
       [](auto& c, auto k, auto v) { c.integrator.secondary.inner_nodes = parse_int(k, v); }},
      {"integrator.theorem_eta", [](auto& c, auto k, auto v) { theorem(c).eta = parse_real(k, v); }},
      {"integrator.theorem_kappa_J",
       [](auto& c, auto k, auto v) { theorem(c).kappa_J = parse_real(k, v); }},
      {"integrator.theorem_kappa_2J",
       [](auto& c, auto k, auto v) { theorem(c).kappa_2J = parse_real(k, v); }},
      {"reference.enabled", [](auto& c, auto k, auto v) { c.reference.enabled = parse_bool(k, v); }},
      {"reference.tol", [](auto& c, auto k, auto v) { c.reference.tol = parse_real(k, v); }},
      {"reference.n_bisect", [](auto& c, auto k, auto v) { c.reference.n_bisect = parse_int(k, v); }},
      {"reference.inner_nodes",
       [](auto& c, auto k, auto v) { c.reference.inner_nodes = parse_int(k, v); }},
      {"reference.max_iters", [](auto& c, auto k, auto v) { c.reference.max_iters = parse_int(k, v); }},
      {"reference.rank_tol", [](auto& c, auto k, auto v) { c.reference.rank_tol = parse_real(k, v); }},
      {"output.dir", [](auto& c, auto, auto v) { c.output_dir = std::string(v); }},
  };
  return table;
}

// Resolves a bare key to its unique "section.key" form.
std::string qualify(std::string_view key) {
  if (key.find('.') != std::string_view::npos) return std::string(key);
  std::string found;
  for (const auto& [name, setter] : setters()) {
    if (name.substr(name.find('.') + 1) == key) {
      if (!found.empty())
        throw std::invalid_argument(fmt::format("{}: ambiguous, use {} or {}", key, found, name));
      found = name;
    }
  }
  if (found.empty()) throw std::invalid_argument(fmt::format("unknown key '{}'", key));
  return found;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"schrodinger-1e3", "schrodinger-1e6", "schrodinger-free", "parabolic"};
}

ExperimentConfig make_preset(std::string_view name) {
  ExperimentConfig c;
  c.preset = std::string(name);
  auto& in = c.integrator;
  if (name == "schrodinger-1e3" || name == "schrodinger-1e6" || name == "schrodinger-free") {
    c.problem = Problem::schrodinger;
    c.K = 300;
    c.n = c.m = 1;
    c.potential_scale = name == "schrodinger-free" ? 0.0 : 1.0;
    in.h = 0.1;
    in.N = 5;
    in.J = 11;
    in.nodes = NodeKind::gauss;
    in.eps = name == "schrodinger-1e6" ? 1e-6 : 1e-3;
    in.delta_boundary = name == "schrodinger-1e6" ? 1e-7 : 1e-4;
    in.delta_rel = 1e-3;
    in.delta_rel_residual = 1e-6;
    c.reference.tol = 1e-12;
    c.reference.n_bisect = 10;
  } else if (name == "parabolic") {
    c.problem = Problem::parabolic;
    c.K = 500;
    c.a = 1;
    c.b = -0.5;
    in.h = 1e-3;
    in.N = 10;
    in.J = 11;
    in.nodes = NodeKind::radau_right;
    in.eps = 1e-4;
    in.delta_boundary = 0;
    in.delta_rel = 1e-4;
    in.delta_rel_residual = 1e-6;
    in.secondary = {5, 5};
    c.reference.tol = 1e-9;
    c.reference.n_bisect = 10;
    c.reference.inner_nodes = 5;
  } else {
    throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
  }
  in.method = Method::picard;
  in.schedule.mode = ScheduleMode::constant_decrease;
  apply_schedule_defaults(c);
  in.schedule.c = c.problem == Problem::schrodinger ? 1.0 / 6 : 0.4;
  c.output_dir = fmt::format("lrti-out/{}", name);
  return c;
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "preset") {
    config = make_preset(value);
    return;
  }
  if (key == "problem") {
    if (value == "schrodinger") config = make_preset("schrodinger-1e3");
    else if (value == "parabolic") config = make_preset("parabolic");
    else bad_value(key, value, "schrodinger or parabolic");
    return;
  }
  const auto full = qualify(key);
  const auto it = setters().find(full);
  if (it == setters().end()) throw std::invalid_argument(fmt::format("unknown key '{}'", full));
  it->second(config, full, value);
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ExperimentConfig config;
  std::string section;
  bool any_key = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "integrator" && section != "reference" && section != "output")
        throw ConfigError(source, line_no, fmt::format("unknown section [{}]", section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line_no, "missing key");
    if (value.empty()) throw ConfigError(source, line_no, fmt::format("{}: missing value", key));
    const bool base = key == "preset" || key == "problem";
    if (base && (any_key || !section.empty()))
      throw ConfigError(source, line_no, fmt::format("{} must come first, before any section", key));
    std::string full(key);
    if (!base && !section.empty() && key.find('.') == std::string_view::npos) full = section + "." + full;
    try {
      set_config_value(config, full, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source, line_no, e.what());
    }
    any_key = true;
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, line_no, fmt::format("invalid configuration: {}", e.what()));
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string dump_config(const ExperimentConfig& c) {
  const auto& in = c.integrator;
  std::string out;
  out += fmt::format("preset = {}\n\n[model]\n", c.preset);
  out += fmt::format("K = {}\nn = {}\nm = {}\npotential_scale = {}\na = {}\nb = {}\n", c.K, c.n, c.m,
                     fmt_real(c.potential_scale), fmt_real(c.a), fmt_real(c.b));
  out += "\n[integrator]\n";
  out += fmt::format("h = {}\nN = {}\nJ = {}\n", fmt_real(in.h), in.N, in.J);
  out += fmt::format("nodes = {}\n", in.nodes == NodeKind::gauss ? "gauss" : "radau");
  out += fmt::format("method = {}\n", in.method == Method::picard ? "picard" : "sdc");
  out += fmt::format("schedule = {}\n",
                     in.schedule.mode == ScheduleMode::constant_decrease ? "constant" : "adaptive");
  out += fmt::format("theta = {}\nc = {}\n", fmt_real(in.schedule.theta), fmt_real(in.schedule.c));
  out += fmt::format("thresholding = {}\n", in.thresholding ? "true" : "false");
  out += fmt::format("eps = {}\ndelta_boundary = {}\ndelta_rel = {}\ndelta_rel_residual = {}\n",
                     fmt_real(in.eps), fmt_real(in.delta_boundary), fmt_real(in.delta_rel),
                     fmt_real(in.delta_rel_residual));
  out += fmt::format("max_iters = {}\nn_bisect = {}\ninner_nodes = {}\n", in.max_iters,
                     in.secondary.n_bisect, in.secondary.inner_nodes);
  if (in.theorem)
    out += fmt::format("theorem_eta = {}\ntheorem_kappa_J = {}\ntheorem_kappa_2J = {}\n",
                       fmt_real(in.theorem->eta), fmt_real(in.theorem->kappa_J),
                       fmt_real(in.theorem->kappa_2J));
  out += "\n[reference]\n";
  out += fmt::format("enabled = {}\ntol = {}\nn_bisect = {}\ninner_nodes = {}\nmax_iters = {}\nrank_tol = {}\n",
                     c.reference.enabled ? "true" : "false", fmt_real(c.reference.tol),
                     c.reference.n_bisect, c.reference.inner_nodes, c.reference.max_iters,
                     fmt_real(c.reference.rank_tol));
  out += fmt::format("\n[output]\ndir = {}\n", c.output_dir);
  return out;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw std::invalid_argument(key + ": " + what);
  };
  if (K < 1) fail("model.K", "must be positive");
  if (problem == Problem::schrodinger) {
    if (n < 0 || m < 0) fail("model.n", "potential frequencies must be nonnegative");
    if (K < std::max(n, m) + 1) fail("model.K", "must exceed the potential frequencies");
  } else {
    if (K < 30) fail("model.K", "the parabolic initial data needs K >= 30");
    if (!(a > 0) || !(a > std::abs(b))) fail("model.b", "ellipticity requires a > |b|");
    if (integrator.nodes != NodeKind::radau_right) fail("integrator.nodes", "the parabolic problem needs radau");
    if (integrator.theorem) fail("integrator.theorem_eta", "only available for the Schrödinger problem");
  }
  try {
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("integrator.") + e.what());
  }
  if (reference.enabled) {
    if (K > 512) fail("model.K", "dense reference limited to K <= 512");
    if (!(reference.tol > 0)) fail("reference.tol", "must be positive");
    if (reference.n_bisect < 1) fail("reference.n_bisect", "must be at least 1");
    if (reference.inner_nodes < 1) fail("reference.inner_nodes", "must be at least 1");
    if (reference.max_iters < 1) fail("reference.max_iters", "must be at least 1");
  }
  if (!(reference.rank_tol >= 0)) fail("reference.rank_tol", "must be nonnegative");
  if (output_dir.empty()) fail("output.dir", "must not be empty");
}

}  // namespace lrti
