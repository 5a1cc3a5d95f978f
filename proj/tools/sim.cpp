#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "chiral/sweep/acceptance.hpp"
#include "chiral/sweep/config.hpp"
#include "chiral/sweep/presets.hpp"
#include "chiral/sweep/runner.hpp"

namespace {

using namespace chiral;
using namespace chiral::sweep;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct OutputFlags {
  std::string out;
  std::string format;
  int threads = 1;
};

int emit(const RunConfig& cfg, const OutputFlags& flags) {
  Format fmt = cfg.format;
  if (!flags.format.empty()) {
    const auto f = parse_format(flags.format);
    if (!f) {
      std::cerr << "error: --format: expected 'csv' or 'jsonl'\n";
      return kExitConfig;
    }
    fmt = *f;
  }
  RunOutput result;
  try {
    result = execute(cfg, flags.threads);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

  const std::string path = flags.out.empty() ? cfg.output_path : flags.out;
  if (path.empty() || path == "-") {
    write_table(std::cout, result.table, fmt);
    return kExitOk;
  }
  std::ofstream os(path);
  if (!os) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return kExitConfig;
  }
  write_table(os, result.table, fmt);
  std::cerr << "wrote " << result.table.rows.size() << " rows to " << path << "\n";
  return kExitOk;
}

int run_mode(const std::string& mode, const std::string& config_path, const OutputFlags& flags) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  if (mode_name(cfg.mode) != mode) {
    std::cerr << config_path << ": field 'mode': config has mode '" << mode_name(cfg.mode)
              << "' but '" << mode << "' was requested\n";
    return kExitConfig;
  }
  return emit(cfg, flags);
}

int run_preset(const std::string& name, bool print, const OutputFlags& flags) {
  const auto preset = find_preset(name);
  if (!preset) {
    std::cerr << "error: unknown preset '" << name << "'; available:";
    for (const auto& p : figure_recipes()) std::cerr << " " << p.name;
    std::cerr << "\n";
    return kExitConfig;
  }
  if (print) {
    std::cout << preset->json << "\n";
    return kExitOk;
  }
  return emit(parse_config(preset->json), flags);
}

int run_validate(const AcceptanceOptions& opt, bool as_json) {
  int failed = 0;
  for (const auto& r : validate_cross_solver(opt)) {
    if (!r.pass) ++failed;
    if (as_json) {
      nlohmann::json j{{"id", r.id},           {"name", r.name},       {"pass", r.pass},
                       {"detail", r.detail},   {"seconds", r.seconds}};
      std::cout << j.dump() << std::endl;
    } else {
      std::printf("%s [%d] %s (%.1f s): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds, r.detail.c_str());
      std::fflush(stdout);
    }
  }
  return failed == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven V atom in front of a mirror: Markov, cavity and time-bin MPS solvers"};
  app.require_subcommand(1);

  OutputFlags flags;
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out,-o", flags.out, "Output path (default: config output.path or stdout)");
    sub->add_option("--format", flags.format, "csv or jsonl");
    sub->add_option("--threads", flags.threads, "Worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
  };

  std::string mode, config_path;
  for (const char* m : {"steady", "evolve", "mps", "cavity", "dark-curve", "sweep"}) {
    auto* sub = app.add_subcommand(m, std::string("Run a '") + m + "' configuration");
    sub->add_option("--config,-c", config_path, "JSON run configuration")->required();
    add_output(sub);
    sub->callback([&mode, m] { mode = m; });
  }

  std::string preset_name;
  bool print_preset = false, list_presets = false;
  auto* preset = app.add_subcommand("preset", "Run a built-in figure recipe");
  preset->add_option("name", preset_name, "Preset name");
  preset->add_flag("--print", print_preset, "Print the preset configuration and exit");
  preset->add_flag("--list", list_presets, "List presets");
  add_output(preset);

  AcceptanceOptions vopt;
  bool as_json = false;
  auto* validate = app.add_subcommand("validate", "Run the acceptance checks");
  validate->add_flag("--quick", vopt.quick, "Skip the long delayed-feedback checks");
  validate->add_flag("--full-scan", vopt.full_scan,
                     "Phase-shift check on the whole dphi grid instead of windows");
  validate->add_option("--inject-gamma-prime", vopt.inject_gamma_prime,
                       "Extra loss added to the decoherence check (negative control)");
  validate->add_option("--threads", vopt.threads, "Worker threads, 0 = all cores");
  validate->add_flag("--json", as_json, "One JSON object per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (preset->parsed()) {
    if (list_presets) {
      for (const auto& p : figure_recipes()) std::cout << p.name << "\t" << p.description << "\n";
      return kExitOk;
    }
    if (preset_name.empty()) {
      std::cerr << "error: preset name required (see --list)\n";
      return kExitConfig;
    }
    return run_preset(preset_name, print_preset, flags);
  }
  if (validate->parsed()) return run_validate(vopt, as_json);
  return run_mode(mode, config_path, flags);
}
