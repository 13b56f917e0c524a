// gauss-extrema: run, list and validate experiment configs.
//
// Exit codes: 0 every assertion passed, 1 config error, 2 assertion failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "gauss_extrema/harness.hpp"

namespace ge = gauss_extrema;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAssertion = 2;

ge::RunConfig load_with_env(const std::string& path) {
  auto cfg = ge::load_config(path);
  if (const auto seed = ge::seed_from_env()) cfg.seed = *seed;
  return cfg;
}

int cmd_run(const std::string& path, std::size_t workers, const std::string& out_dir) {
  const auto cfg = load_with_env(path);
  ge::validate_config(cfg);
  const auto report = ge::run_experiment(cfg, workers);
  const std::filesystem::path dir = std::filesystem::path(out_dir.empty() ? cfg.output_dir : out_dir);
  const auto files = ge::write_report(report, dir);
  for (const auto& a : report.assertions)
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
  std::cout << "report " << files.front().string() << "\n";
  std::cerr << "wall time " << report.wall_seconds << " s\n";
  return report.passed() ? kExitOk : kExitAssertion;
}

int cmd_list() {
  for (const auto& e : ge::experiment_catalog()) {
    std::cout << e.name << "\t" << e.summary;
    if (!e.params.empty()) {
      std::cout << " [params:";
      for (const auto& p : e.params) std::cout << " " << p;
      std::cout << "]";
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const auto cfg = load_with_env(path);
  ge::validate_config(cfg);
  std::cout << "ok " << ge::to_string(cfg.experiment) << " " << ge::config_hash(cfg) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremes of Gaussian sequences and processes: simulation harness", "gauss-extrema"};
  app.require_subcommand(1);

  std::string config;
  std::size_t workers = 1;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run the experiment described by a config");
  run->add_option("--config", config, "path to a JSON config")->required();
  run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");

  auto* list = app.add_subcommand("list-experiments", "list available experiments");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", validate_path, "path to a JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, workers, out_dir);
    if (*list) return cmd_list();
    if (*validate) return cmd_validate(validate_path);
  } catch (const ge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
