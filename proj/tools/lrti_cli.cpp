// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrti/lrti.h"

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::stringstream cell(item);
    T value{};
    if (!(cell >> value) || !(cell >> std::ws).eof()) throw CLI::ValidationError("bad list entry '" + item + "'");
    out.push_back(value);
  }
  return out;
}

void print_line(const char* message, void* stream) { std::fprintf(static_cast<FILE*>(stream), "%s\n", message); }

std::string presets_help() {
  std::string out;
  for (size_t i = 0; i < lrti_preset_count(); ++i) out += (i ? ", " : "") + std::string(lrti_preset_name(i));
  return out;
}

int cmd_run(const std::string& config_path, const std::string& preset, const std::string& out_dir,
            const std::vector<std::string>& overrides) {
  lrti_config* config = nullptr;
  lrti_status st;
  if (!preset.empty()) {
    st = lrti_config_preset(preset.c_str(), &config);
  } else {
    st = lrti_config_load(config_path.c_str(), &config, nullptr);
  }
  if (st != LRTI_OK) {
    std::fprintf(stderr, "error: %s\n", lrti_last_error());
    return 1;
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos ||
        lrti_config_set(config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) != LRTI_OK) {
      std::fprintf(stderr, "error: --set %s: %s\n", kv.c_str(),
                   eq == std::string::npos ? "expected key=value" : lrti_last_error());
      lrti_config_free(config);
      return 1;
    }
  }
  const std::string dir = out_dir.empty() ? lrti_config_output_dir(config) : out_dir;
  lrti_run_summary s{};
  st = lrti_run(config, dir.c_str(), print_line, stderr, &s);
  lrti_config_free(config);
  if (st != LRTI_OK && st != LRTI_ERR_NOT_CONVERGED) {
    std::fprintf(stderr, "error: %s\n", lrti_last_error());
    return st == LRTI_ERR_CONFIG ? 1 : 3;
  }
  std::printf("intervals %d, iterations %d, max rank %d, max intermediate rank %d\n", s.intervals,
              s.total_iterations, s.max_rank, s.max_intermediate_rank);
  if (s.has_reference)
    std::printf("max boundary error %.3e, max norm deviation %.3e, max optimal rank %d\n", s.max_error,
                s.max_norm_dev, s.max_optimal_rank);
  std::printf("wrote %s/{trace,boundary,ranks}.csv\n", dir.c_str());
  if (st == LRTI_ERR_NOT_CONVERGED) {
    std::fprintf(stderr, "warning: %s\n", lrti_last_error());
    return 2;
  }
  return 0;
}

int cmd_convergence(const std::string& J_text, const std::string& h_text, int K, double T,
                    const std::string& out) {
  const auto J = parse_list<int>(J_text);
  const auto h = parse_list<double>(h_text);
  std::vector<double> orders(J.size(), NAN);
  if (lrti_convergence(J.data(), J.size(), h.data(), h.size(), K, T, out.c_str(), orders.data()) != LRTI_OK) {
    std::fprintf(stderr, "error: %s\n", lrti_last_error());
    return 1;
  }
  for (size_t i = 0; i < J.size(); ++i)
    std::printf("J = %d: fitted order %.3f (expected %d)\n", J[i], orders[i], 2 * J[i]);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_properties(std::uint64_t seed, int pairs) {
  int failures = 0;
  if (lrti_properties(seed, pairs, print_line, stdout, &failures) != LRTI_OK) {
    std::fprintf(stderr, "error: %s\n", lrti_last_error());
    return 1;
  }
  std::printf("%s (seed %llu)\n", failures ? "FAILED" : "all properties passed",
              static_cast<unsigned long long>(seed));
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank time integration with soft-thresholded Picard and SDC iterations"};
  app.set_version_flag("--version", lrti_version());
  app.require_subcommand(1);

  std::string config_path, preset, out_dir;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file or preset");
  run->add_option("config", config_path, "Config file")->check(CLI::ExistingFile);
  run->add_option("--preset", preset, "Built-in configuration: " + presets_help());
  run->add_option("--out", out_dir, "Output directory (overrides config and LRTI_OUTPUT_DIR)");
  run->add_option("--set", overrides, "Override a config key, e.g. --set integrator.method=sdc");
  run->callback([&] {
    if (config_path.empty() == preset.empty()) throw CLI::ValidationError("give exactly one of CONFIG or --preset");
  });

  std::string J_text = "2,3", h_text = "0.2,0.1,0.05,0.025", conv_out = "convergence.csv";
  int K = 32;
  double T = 0.2;
  auto* conv = app.add_subcommand("convergence", "Boundary-error convergence study with thresholds off");
  conv->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  conv->add_option("--J", J_text, "Comma-separated node counts")->capture_default_str();
  conv->add_option("--h", h_text, "Comma-separated step sizes")->capture_default_str();
  conv->add_option("--K", K, "Frequencies per direction")->capture_default_str();
  conv->add_option("--T", T, "Final time")->capture_default_str();
  conv->add_option("--out", conv_out, "CSV path")->capture_default_str();

  std::uint64_t seed = 20240601;
  int pairs = 1000;
  auto* props = app.add_subcommand("properties", "Randomized operator and quadrature property suite");
  props->add_option("--seed", seed, "Generator seed")->capture_default_str();
  props->add_option("--pairs", pairs, "Random matrix pairs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, preset, out_dir, overrides);
    if (*conv) return cmd_convergence(J_text, h_text, K, T, conv_out);
    if (*props) return cmd_properties(seed, pairs);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
