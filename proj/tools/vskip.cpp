// Command-line front end: `vskip run <config>` executes a scenario,
// `vskip validate <config>` only checks it and prints the normalized form.
// Exit codes: 0 all verdicts pass, 2 some verdict failed, 1 error.
#include "vskip/minimizer.hpp"
#include "vskip/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

namespace {

nlohmann::json read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw vskip::ConfigError("cannot open config " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw vskip::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

void apply_thread_env() {
  const char* env = std::getenv("VSKIP_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw vskip::ConfigError("VSKIP_THREADS must be a positive integer");
  vskip::set_worker_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Area-minimizing surfaces in polyhedral cones: scenario runner", vskip::kToolName};
  app.set_version_flag("--version", vskip::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Execute a scenario and write its outputs");
  run->add_option("config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  validate->add_option("config", config_path, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto cfg = vskip::normalize_config(read_config(config_path));
    if (*validate) {
      std::cout << cfg.dump(2) << '\n';
      return 0;
    }
    apply_thread_env();
    const std::string dir = out_dir.empty() ? cfg["output_dir"].get<std::string>() : out_dir;
    const auto outcome = vskip::run_scenario(cfg, dir);
    for (const auto& v : outcome.verdicts)
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " = " << vskip::format_g17(v.value) << " (" << v.rule
                << ", tolerance " << vskip::format_g17(v.tolerance) << ")\n";
    std::cout << "report: " << dir << "/report.json\n";
    return outcome.pass() ? 0 : 2;
  } catch (const vskip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
