// qrelay-bench: reproducible quantum-relay simulation scenarios.
//
//   qrelay-bench run <scenario> [--config file.json] [--seed N]
//                [--backend analytic|montecarlo|both] [--out dir]
//
// Scenarios: entanglement, bb84-sweep, detuning, oscillation, tomography,
// landscape, full-report.  QRELAY_THREADS caps worker threads.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qrelay/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum-relay simulation and analysis bench"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a named scenario");
  std::string scenario;
  std::string config_path;
  std::string backend;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("scenario", scenario,
                  "entanglement | bb84-sweep | detuning | oscillation | tomography | "
                  "landscape | full-report")
      ->required();
  run->add_option("--config", config_path, "JSON config file (defaults when omitted)");
  run->add_option("--seed", seed, "override run.seed");
  run->add_option("--backend", backend, "override run.backend");
  run->add_option("--out", out_dir, "override run.output_dir");

  CLI11_PARSE(app, argc, argv);

  try {
    qrelay::BenchConfig cfg =
        config_path.empty() ? qrelay::default_config() : qrelay::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!backend.empty()) cfg.backend = qrelay::parse_backend(backend);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();

    const int threads = qrelay::default_thread_count();
    const int code = qrelay::run_scenario(scenario, cfg, cfg.output_dir, threads);
    if (code == qrelay::kExitOk) {
      std::printf("scenario %s finished, outputs in %s\n", scenario.c_str(),
                  cfg.output_dir.c_str());
    }
    return code;
  } catch (const qrelay::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return qrelay::kExitConfigError;
  } catch (const qrelay::InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return qrelay::kExitInvariantViolation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
