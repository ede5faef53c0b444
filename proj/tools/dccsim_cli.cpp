// dccsim: runs ETSI / Generate-on-Time CAM scenarios and writes CSV results.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime invariant failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dccsim/config.hpp"
#include "dccsim/simulation.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void print_diagnostics(const std::vector<dccsim::Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    const char* level = d.severity == dccsim::Diagnostic::Severity::Error ? "error" : "warning";
    std::cerr << level << ": " << d.field << ": " << d.reason << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of cross-layer DCC with ETSI and Generate-on-Time CAM generation"};

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  bool trace = false;
  bool quiet = false;
  bool validate_only = false;
  bool print_config = false;

  app.add_option("--config", config_path, "Scenario file (INI sections: scenario, ca, dcc, traffic, channel, "
                                          "metrics, output)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override scenario.seed");
  app.add_option("--out", out_dir, "Override output.dir");
  app.add_option("--mode", mode, "Override scenario.mode")->check(CLI::IsMember({"etsi", "got", "paired"}));
  app.add_flag("--trace", trace, "Write an event trace (trace_<mode>.log) into the output directory");
  app.add_flag("--quiet", quiet, "Suppress the comparison table");
  app.add_flag("--validate", validate_only, "Validate the configuration and exit");
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

  CLI11_PARSE(app, argc, argv);

  dccsim::ScenarioConfig config;
  try {
    if (!config_path.empty()) config = dccsim::load_config(config_path);
  } catch (const dccsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) config.seed = *seed;
  if (out_dir) config.out_dir = *out_dir;
  if (mode) {
    config.mode = *mode == "etsi" ? dccsim::RunMode::Etsi
                  : *mode == "got" ? dccsim::RunMode::Got
                                   : dccsim::RunMode::Paired;
  }

  const auto diagnostics = dccsim::validate(config);
  print_diagnostics(diagnostics);
  if (!dccsim::runnable(diagnostics)) return kExitConfig;
  if (print_config) {
    std::cout << dccsim::serialize_config(config);
    return 0;
  }
  if (validate_only) return 0;

  try {
    std::ofstream trace_etsi, trace_got;
    if (trace) {
      std::filesystem::create_directories(config.out_dir);
      trace_etsi.open(std::filesystem::path{config.out_dir} / "trace_etsi.log");
      trace_got.open(std::filesystem::path{config.out_dir} / "trace_got.log");
    }
    const auto runs = dccsim::run_scenario(config, trace ? &trace_etsi : nullptr, trace ? &trace_got : nullptr);
    dccsim::write_outputs(config.out_dir, config, runs);
    if (!quiet) {
      std::cout << "run " << dccsim::run_id(config) << " -> " << config.out_dir << '\n';
      dccsim::print_comparison(std::cout, runs);
    }
  } catch (const dccsim::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
