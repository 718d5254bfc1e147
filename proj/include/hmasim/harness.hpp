// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: scenario configuration, seeded Monte-Carlo trials over
// user drops and channel realizations for each antenna architecture, and CSV
// output of mean rate and energy efficiency per transmit-power point.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmasim/link_optimizer.hpp"
#include "hmasim/power_model.hpp"

namespace hmasim {

enum class ArchKind { kHmaFp, kHmaSmp, kDpaMrc, kDpaZf, kFchpAct };

std::string arch_name(ArchKind kind);
ArchKind parse_arch(const std::string& name);

struct SweepSpec {
  double start_dbm = 0.0;
  double stop_dbm = 40.0;
  double step_db = 10.0;
  std::vector<double> points() const;
};

struct ScenarioConfig {
  double fc_ghz = 3.0;
  double bandwidth_hz = 20e6;
  double aperture_z = 2.0;   // wavelengths
  double aperture_x = 2.0;   // wavelengths
  double cell_pitch = 0.25;  // wavelengths
  double d_sep = 1.0;        // wavelengths
  int k_users = 1;
  int m_chains = 1;
  SweepSpec p_t_sweep;
  int n_drops = 1;
  int n_channels_per_drop = 1;
  std::uint64_t seed = 1;
  std::vector<ArchKind> architectures;
  SolverOptions solver;
  double t_hms_loss = 0.7;
  std::string channel_source = "synthetic";  // "synthetic" or a file path
  double cell_radius_m = 250.0;
  double exclusion_m = 25.0;
  double patch_eff_area = 0.0026;  // DPA/FCHP element effective area, m^2
  double patch_efficiency = 0.9;   // applied as a power factor on the signal
  bool kronecker_no_sqrt = false;  // literal (no square root) channel mixing
  std::string catalog_path;        // empty: built-in device table
};

// UTF-8 "key = value" lines; '#' starts a comment; lists comma-separated.
ScenarioConfig parse_config(const std::string& path);

// Checks cross-field invariants; throws std::invalid_argument on violation.
void validate_config(const ScenarioConfig& config);

struct ResultRow {
  std::string arch;
  double p_t_dbm = 0.0;
  double mean_rate = 0.0;  // bits/s/Hz over successful trials
  double rate_ci95 = 0.0;  // normal-approximation half width
  double mean_ee = 0.0;    // bits/s/Hz/W
  double power_w = 0.0;
  int n_trials = 0;        // attempted
  int n_failures = 0;
  bool flagged = false;    // more than 5% of trials failed
};

// Trials are independent tasks distributed over `jobs` workers; per-trial
// seeds derive from (config seed, drop index, channel index), so results are
// bit-identical for any worker count.
std::vector<ResultRow> run_experiment(const ScenarioConfig& config, int jobs = 1);

// Header arch,p_t_dbm,mean_rate_bps_hz,rate_ci95,mean_ee_bps_hz_per_w,
// power_w,n_trials; 9 significant digits; rows sorted by (arch, p_t).
std::string render_csv(std::vector<ResultRow> rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace hmasim
