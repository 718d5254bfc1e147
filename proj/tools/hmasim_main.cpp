// SPDX-License-Identifier: Apache-2.0
//
// Command-line experiment runner.
//
//   hmasim run --config <path> --out <path> [--jobs N] [--seed S]
//   hmasim power --arch <hma|dpa|fchp_act> --n <N> --m <M> [--n-ps P]
//                [--catalog <csv>] [--lna-input W]
//   hmasim validate --config <path>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hmasim/harness.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_path,
            int jobs, bool seed_set, std::uint64_t seed) {
  hmasim::ScenarioConfig cfg = hmasim::parse_config(config_path);
  if (seed_set) cfg.seed = seed;
  hmasim::validate_config(cfg);

  const auto rows = hmasim::run_experiment(cfg, jobs);
  hmasim::emit_csv(rows, out_path);

  bool any_flagged = false;
  for (const auto& row : rows) {
    if (row.n_failures > 0) {
      std::cerr << "warning: " << row.arch << " @ " << row.p_t_dbm << " dBm/m2: "
                << row.n_failures << "/" << row.n_trials << " trials failed"
                << (row.flagged ? " [flagged]" : "") << "\n";
    }
    any_flagged = any_flagged || row.flagged;
  }
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return any_flagged ? 2 : 0;
}

int cmd_power(const std::string& arch, int n, int m, int n_ps,
              const std::string& catalog_path, double lna_input) {
  const auto catalog = catalog_path.empty()
                           ? hmasim::DeviceCatalog::defaults()
                           : hmasim::DeviceCatalog::load_csv(catalog_path);
  hmasim::Architecture kind;
  hmasim::ArchDims dims{n, m, 0};
  if (arch == "hma") {
    kind = hmasim::Architecture::kHma;
  } else if (arch == "dpa") {
    kind = hmasim::Architecture::kDpa;
    dims.m_chains = n;
  } else if (arch == "fchp_act") {
    kind = hmasim::Architecture::kFchpActive;
    dims.n_phase_shifters = (n_ps > 0) ? n_ps : n * m;
  } else {
    std::cerr << "unknown architecture '" << arch << "'\n";
    return 1;
  }
  const auto breakdown = hmasim::architecture_power(kind, dims, catalog, lna_input);
  std::printf("arch           : %s\n", arch.c_str());
  std::printf("rf_chains_w    : %.9g\n", breakdown.rf_chains_w);
  std::printf("metasurface_w  : %.9g\n", breakdown.metasurface_w);
  std::printf("phase_shifters_w: %.9g\n", breakdown.phase_shifters_w);
  std::printf("total_w        : %.9g\n", breakdown.total_w);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level simulator for metasurface-backed antennas"};
  app.require_subcommand(1);

  std::string config_path, out_path, arch, catalog_path;
  int jobs = 1, n = 0, m = 1, n_ps = 0;
  std::uint64_t seed = 0;
  double lna_input = 0.0;

  auto* run = app.add_subcommand("run", "Run a configured experiment sweep");
  run->add_option("--config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_option("--jobs", jobs, "Worker threads");
  auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");

  auto* power = app.add_subcommand("power", "Print a power breakdown");
  power->add_option("--arch", arch, "hma | dpa | fchp_act")->required();
  power->add_option("--n", n, "Antennas / unit-cells")->required();
  power->add_option("--m", m, "RF chains");
  power->add_option("--n-ps", n_ps, "Phase shifters (default N*M)");
  power->add_option("--catalog", catalog_path, "Device catalog CSV");
  power->add_option("--lna-input", lna_input, "LNA input power, W");

  auto* validate = app.add_subcommand("validate", "Check a config without running");
  validate->add_option("--config", config_path, "Scenario config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_path, jobs, seed_opt->count() > 0, seed);
    }
    if (power->parsed()) {
      return cmd_power(arch, n, m, n_ps, catalog_path, lna_input);
    }
    if (validate->parsed()) {
      hmasim::validate_config(hmasim::parse_config(config_path));
      std::cout << "config ok\n";
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
