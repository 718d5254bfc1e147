// SPDX-License-Identifier: Apache-2.0

#include "hmasim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hmasim/baselines.hpp"
#include "hmasim/rng.hpp"

namespace hmasim {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

// Seed-stream purpose tags (see rng.hpp for the derivation scheme).
constexpr std::uint64_t kTagUsers = 0x55u;
constexpr std::uint64_t kTagHmaChannel = 0xC1u;
constexpr std::uint64_t kTagPatchChannel = 0xC2u;
constexpr std::uint64_t kTagFpInit = 0xF0u;

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

bool uses_hma(ArchKind a) {
  return a == ArchKind::kHmaFp || a == ArchKind::kHmaSmp;
}
bool uses_patch_grid(ArchKind a) { return !uses_hma(a); }

}  // namespace

std::string arch_name(ArchKind kind) {
  switch (kind) {
    case ArchKind::kHmaFp: return "hma_fp";
    case ArchKind::kHmaSmp: return "hma_smp";
    case ArchKind::kDpaMrc: return "dpa_mrc";
    case ArchKind::kDpaZf: return "dpa_zf";
    case ArchKind::kFchpAct: return "fchp_act";
  }
  throw std::invalid_argument("arch_name: unknown architecture");
}

ArchKind parse_arch(const std::string& name) {
  if (name == "hma_fp") return ArchKind::kHmaFp;
  if (name == "hma_smp") return ArchKind::kHmaSmp;
  if (name == "dpa_mrc") return ArchKind::kDpaMrc;
  if (name == "dpa_zf") return ArchKind::kDpaZf;
  if (name == "fchp_act") return ArchKind::kFchpAct;
  throw std::invalid_argument("unknown architecture '" + name + "'");
}

std::vector<double> SweepSpec::points() const {
  if (step_db <= 0.0 && start_dbm != stop_dbm) {
    throw std::invalid_argument("sweep: step must be positive");
  }
  std::vector<double> pts;
  if (start_dbm == stop_dbm) {
    pts.push_back(start_dbm);
    return pts;
  }
  for (double p = start_dbm; p <= stop_dbm + 1e-9; p += step_db) {
    pts.push_back(p);
  }
  return pts;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string item;
  while (std::getline(iss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  const double v = std::stod(value, &used);
  if (used != value.size()) {
    throw std::invalid_argument("config: bad number for " + key + ": " + value);
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + value);
}

}  // namespace

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  ScenarioConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));

    if (key == "fc_ghz") cfg.fc_ghz = to_double(key, value);
    else if (key == "bandwidth_hz") cfg.bandwidth_hz = to_double(key, value);
    else if (key == "aperture_z") cfg.aperture_z = to_double(key, value);
    else if (key == "aperture_x") cfg.aperture_x = to_double(key, value);
    else if (key == "cell_pitch") cfg.cell_pitch = to_double(key, value);
    else if (key == "d_sep") cfg.d_sep = to_double(key, value);
    else if (key == "k_users") cfg.k_users = static_cast<int>(to_double(key, value));
    else if (key == "m_chains") cfg.m_chains = static_cast<int>(to_double(key, value));
    else if (key == "p_t_dbm") {
      const auto parts = split_list(value);
      if (parts.size() != 3) {
        throw std::invalid_argument("config: p_t_dbm wants start, stop, step");
      }
      cfg.p_t_sweep = {to_double(key, parts[0]), to_double(key, parts[1]),
                       to_double(key, parts[2])};
    } else if (key == "n_drops") cfg.n_drops = static_cast<int>(to_double(key, value));
    else if (key == "n_channels_per_drop")
      cfg.n_channels_per_drop = static_cast<int>(to_double(key, value));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_double(key, value));
    else if (key == "architectures") {
      cfg.architectures.clear();
      for (const auto& name : split_list(value)) {
        cfg.architectures.push_back(parse_arch(name));
      }
    } else if (key == "t_hms_loss") cfg.t_hms_loss = to_double(key, value);
    else if (key == "channel_source") cfg.channel_source = value;
    else if (key == "cell_radius_m") cfg.cell_radius_m = to_double(key, value);
    else if (key == "exclusion_m") cfg.exclusion_m = to_double(key, value);
    else if (key == "patch_eff_area") cfg.patch_eff_area = to_double(key, value);
    else if (key == "patch_efficiency") cfg.patch_efficiency = to_double(key, value);
    else if (key == "kronecker_no_sqrt") cfg.kronecker_no_sqrt = to_bool(key, value);
    else if (key == "catalog") cfg.catalog_path = value;
    else if (key == "solver_max_outer") cfg.solver.max_outer = static_cast<int>(to_double(key, value));
    else if (key == "solver_inner_first") cfg.solver.inner_first = static_cast<int>(to_double(key, value));
    else if (key == "solver_inner_rest") cfg.solver.inner_rest = static_cast<int>(to_double(key, value));
    else if (key == "solver_tol") cfg.solver.outer_tol = to_double(key, value);
    else {
      throw std::invalid_argument("config: unknown key '" + key + "' at line " +
                                  std::to_string(line_no));
    }
  }
  return cfg;
}

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.fc_ghz <= 0.0 || cfg.bandwidth_hz <= 0.0) {
    throw std::invalid_argument("config: carrier and bandwidth must be positive");
  }
  if (cfg.architectures.empty()) {
    throw std::invalid_argument("config: no architectures selected");
  }
  if (cfg.p_t_sweep.points().empty()) {
    throw std::invalid_argument("config: empty transmit-power sweep");
  }
  if (cfg.n_drops < 1 || cfg.n_channels_per_drop < 1) {
    throw std::invalid_argument("config: need at least one drop and one channel");
  }
  if (cfg.k_users < 1 || cfg.m_chains < 1) {
    throw std::invalid_argument("config: need at least one user and one chain");
  }
  if (cfg.aperture_z < cfg.cell_pitch || cfg.aperture_x < cfg.cell_pitch) {
    throw std::invalid_argument("config: aperture smaller than the cell pitch");
  }
  if (cfg.t_hms_loss <= 0.0 || cfg.t_hms_loss > 1.0) {
    throw std::invalid_argument("config: t_hms_loss must be in (0, 1]");
  }
  if (cfg.exclusion_m >= cfg.cell_radius_m * std::sqrt(3.0) / 2.0) {
    throw std::invalid_argument("config: exclusion zone covers the cell");
  }
  for (const ArchKind arch : cfg.architectures) {
    if ((uses_hma(arch) || arch == ArchKind::kFchpAct) &&
        cfg.m_chains != cfg.k_users) {
      throw std::invalid_argument(
          "config: HMA and FCHP require m_chains = k_users");
    }
    if ((arch == ArchKind::kHmaSmp || arch == ArchKind::kDpaMrc) &&
        cfg.k_users != 1) {
      throw std::invalid_argument(
          "config: hma_smp and dpa_mrc are single-user schemes");
    }
  }
}

namespace {

// Immutable per-run context shared by all workers.
struct RunContext {
  ScenarioConfig cfg;
  double lambda = 0.0;
  std::vector<double> sweep_w;    // watts per sweep point
  std::vector<double> sweep_dbm;
  DeviceCatalog catalog;

  bool need_hma = false;
  bool need_patch = false;

  ArrayLayout hma_layout;
  std::unique_ptr<HmaModel> hma_model;
  std::unique_ptr<ChannelSampler> hma_sampler;
  NoiseModel hma_noise;

  std::vector<Eigen::Vector3d> patch_positions;
  std::unique_ptr<ChannelSampler> patch_sampler;
  Eigen::MatrixXd patch_sigma_rx;
  NoiseModel patch_noise;
  HybridBlockModel fchp_blocks;

  bool from_file = false;
  std::vector<ChannelRealization> imported;

  int n_trials = 0;
  double mean_beta = 0.0;
};

struct TrialChannels {
  ChannelRealization hma;
  ChannelRealization patch;
};

TrialChannels make_trial_channels(const RunContext& ctx, int trial) {
  TrialChannels out;
  if (ctx.from_file) {
    if (ctx.need_hma) {
      out.hma = ctx.imported[trial];
      if (out.hma.h.rows() != ctx.hma_layout.n_cells()) {
        throw std::runtime_error("imported channel rows do not match the HMS grid");
      }
      out.hma.sigma_rx = ctx.hma_sampler->sigma_rx();
    }
    if (ctx.need_patch) {
      out.patch = ctx.imported[trial];
      if (out.patch.h.rows() != static_cast<Eigen::Index>(ctx.patch_positions.size())) {
        throw std::runtime_error("imported channel rows do not match the patch grid");
      }
      out.patch.sigma_rx = ctx.patch_sigma_rx;
    }
    return out;
  }
  const int drop = trial / ctx.cfg.n_channels_per_drop;
  const int chan = trial % ctx.cfg.n_channels_per_drop;
  const auto users =
      drop_users(ctx.cfg.k_users, ctx.cfg.cell_radius_m, ctx.cfg.exclusion_m,
                 derive_seed(ctx.cfg.seed, drop, 0, kTagUsers));
  if (ctx.need_hma) {
    out.hma = ctx.hma_sampler->draw(
        users, derive_seed(ctx.cfg.seed, drop, chan, kTagHmaChannel));
  }
  if (ctx.need_patch) {
    out.patch = ctx.patch_sampler->draw(
        users, derive_seed(ctx.cfg.seed, drop, chan, kTagPatchChannel));
  }
  return out;
}

double trial_rate(const RunContext& ctx, ArchKind arch, int trial,
                  const TrialChannels& channels, double p_t_w) {
  switch (arch) {
    case ArchKind::kHmaFp: {
      SolverOptions opts = ctx.cfg.solver;
      const int drop = trial / std::max(ctx.cfg.n_channels_per_drop, 1);
      const int chan = trial % std::max(ctx.cfg.n_channels_per_drop, 1);
      opts.init_seed = derive_seed(ctx.cfg.seed, drop, chan, kTagFpInit);
      return solve_multiuser(*ctx.hma_model, channels.hma, ctx.hma_noise,
                             p_t_w, opts).sum_rate;
    }
    case ArchKind::kHmaSmp: {
      HmaModel tuned = *ctx.hma_model;
      tuned.t_hms = smp_combiner(*ctx.hma_model, channels.hma);
      const Eigen::MatrixXcd w_d = Eigen::MatrixXcd::Identity(1, 1);
      LinkState state{&tuned, &channels.hma, &ctx.hma_noise, p_t_w, w_d};
      return sum_rate(evaluate_sinr(state));
    }
    case ArchKind::kDpaMrc: {
      ArraySystem sys{&channels.patch, &ctx.patch_noise, p_t_w,
                      ctx.cfg.patch_efficiency};
      return dpa_mrc(sys).rate;
    }
    case ArchKind::kDpaZf: {
      ArraySystem sys{&channels.patch, &ctx.patch_noise, p_t_w,
                      ctx.cfg.patch_efficiency};
      return dpa_zf(sys).rate;
    }
    case ArchKind::kFchpAct: {
      ArraySystem sys{&channels.patch, &ctx.patch_noise, p_t_w,
                      ctx.cfg.patch_efficiency};
      return fchp_active(sys, ctx.fchp_blocks).rate;
    }
  }
  throw std::logic_error("trial_rate: unknown architecture");
}

PowerBreakdown arch_power(const RunContext& ctx, ArchKind arch, double p_t_w) {
  const int n_patch = static_cast<int>(ctx.patch_positions.size());
  switch (arch) {
    case ArchKind::kHmaFp:
    case ArchKind::kHmaSmp: {
      const ArchDims dims{ctx.hma_layout.n_cells(), ctx.cfg.m_chains, 0};
      const double lna_in = mean_lna_input_power(
          p_t_w, ctx.mean_beta, ctx.hma_layout.unit_cell_area,
          double(dims.n_antennas) / dims.m_chains);
      return architecture_power(Architecture::kHma, dims, ctx.catalog, lna_in);
    }
    case ArchKind::kDpaMrc:
    case ArchKind::kDpaZf: {
      const ArchDims dims{n_patch, n_patch, 0};
      const double lna_in = mean_lna_input_power(p_t_w, ctx.mean_beta,
                                                 ctx.cfg.patch_eff_area, 1.0);
      return architecture_power(Architecture::kDpa, dims, ctx.catalog, lna_in);
    }
    case ArchKind::kFchpAct: {
      const ArchDims dims{n_patch, ctx.cfg.m_chains,
                          n_patch * ctx.cfg.m_chains};
      const double lna_in = mean_lna_input_power(
          p_t_w, ctx.mean_beta, ctx.cfg.patch_eff_area,
          double(n_patch) / ctx.cfg.m_chains);
      return architecture_power(Architecture::kFchpActive, dims, ctx.catalog,
                                lna_in);
    }
  }
  throw std::logic_error("arch_power: unknown architecture");
}

RunContext make_context(const ScenarioConfig& cfg) {
  validate_config(cfg);
  RunContext ctx;
  ctx.cfg = cfg;
  ctx.lambda = kSpeedOfLight / (cfg.fc_ghz * 1e9);
  ctx.sweep_dbm = cfg.p_t_sweep.points();
  for (const double dbm : ctx.sweep_dbm) ctx.sweep_w.push_back(dbm_to_watt(dbm));
  ctx.catalog = cfg.catalog_path.empty() ? DeviceCatalog::defaults()
                                         : DeviceCatalog::load_csv(cfg.catalog_path);

  for (const ArchKind arch : cfg.architectures) {
    ctx.need_hma = ctx.need_hma || uses_hma(arch);
    ctx.need_patch = ctx.need_patch || uses_patch_grid(arch);
  }

  const auto rf_stages = rf_chain_stages(ctx.catalog);
  const double sigma2_rf =
      rf_noise_power(rf_stages, cfg.bandwidth_hz, 290.0);

  if (ctx.need_hma) {
    ctx.hma_layout = build_planar_layout(
        cfg.aperture_z * ctx.lambda, cfg.aperture_x * ctx.lambda,
        cfg.cell_pitch * ctx.lambda, 1, cfg.m_chains, cfg.d_sep * ctx.lambda,
        ctx.lambda);
    ctx.hma_model = std::make_unique<HmaModel>(
        make_hma_model(ctx.hma_layout, cfg.t_hms_loss));
    ctx.hma_sampler = std::make_unique<ChannelSampler>(
        ctx.hma_layout.hms_positions, ctx.lambda, cfg.fc_ghz,
        cfg.kronecker_no_sqrt);
    ctx.hma_noise = NoiseModel{
        antenna_noise_power(ctx.hma_layout.unit_cell_area, ctx.lambda,
                            cfg.bandwidth_hz, 290.0),
        sigma2_rf, cfg.bandwidth_hz, 290.0, 290.0};
  }
  if (ctx.need_patch) {
    ctx.patch_positions = planar_grid(cfg.aperture_z * ctx.lambda,
                                      cfg.aperture_x * ctx.lambda,
                                      0.5 * ctx.lambda);
    ctx.patch_sampler = std::make_unique<ChannelSampler>(
        ctx.patch_positions, ctx.lambda, cfg.fc_ghz, cfg.kronecker_no_sqrt);
    ctx.patch_sigma_rx = ctx.patch_sampler->sigma_rx();
    ctx.patch_noise = NoiseModel{
        antenna_noise_power(cfg.patch_eff_area, ctx.lambda, cfg.bandwidth_hz,
                            290.0),
        sigma2_rf, cfg.bandwidth_hz, 290.0, 290.0};
    ctx.fchp_blocks = block_noise_factors(
        device_stage(ctx.catalog, "act_ps"),
        device_stage(ctx.catalog, "wilkinson"),
        static_cast<int>(ctx.patch_positions.size()), rf_stages);
  }

  ctx.from_file = cfg.channel_source != "synthetic";
  if (ctx.from_file) {
    ctx.imported = import_channels(cfg.channel_source);
    ctx.n_trials = static_cast<int>(ctx.imported.size());
    double acc = 0.0;
    for (const auto& real : ctx.imported) acc += real.beta.mean();
    ctx.mean_beta = acc / ctx.imported.size();
  } else {
    ctx.n_trials = cfg.n_drops * cfg.n_channels_per_drop;
    double acc = 0.0;
    for (int drop = 0; drop < cfg.n_drops; ++drop) {
      const auto users = drop_users(cfg.k_users, cfg.cell_radius_m,
                                    cfg.exclusion_m,
                                    derive_seed(cfg.seed, drop, 0, kTagUsers));
      for (const auto& pos : users) acc += path_loss(pos.norm(), cfg.fc_ghz);
    }
    ctx.mean_beta = acc / (double(cfg.n_drops) * cfg.k_users);
  }
  return ctx;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ScenarioConfig& config, int jobs) {
  const RunContext ctx = make_context(config);
  const int n_arch = static_cast<int>(ctx.cfg.architectures.size());
  const int n_pts = static_cast<int>(ctx.sweep_w.size());
  const int n_cells = n_arch * n_pts;

  // rates[trial][arch * n_pts + pt]; NaN marks a failed solve.
  std::vector<std::vector<double>> rates(
      ctx.n_trials,
      std::vector<double>(n_cells, std::numeric_limits<double>::quiet_NaN()));

  std::atomic<int> next_trial{0};
  auto worker = [&]() {
    for (;;) {
      const int trial = next_trial.fetch_add(1);
      if (trial >= ctx.n_trials) return;
      TrialChannels channels;
      bool channels_ok = true;
      try {
        channels = make_trial_channels(ctx, trial);
      } catch (const std::exception&) {
        channels_ok = false;  // the whole trial fails for every cell
      }
      if (!channels_ok) continue;
      for (int a = 0; a < n_arch; ++a) {
        for (int p = 0; p < n_pts; ++p) {
          try {
            rates[trial][a * n_pts + p] = trial_rate(
                ctx, ctx.cfg.architectures[a], trial, channels, ctx.sweep_w[p]);
          } catch (const std::exception&) {
            // failure already marked by NaN
          }
        }
      }
    }
  };

  const int n_workers = std::clamp(jobs, 1, std::max(ctx.n_trials, 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRow> rows;
  rows.reserve(n_cells);
  for (int a = 0; a < n_arch; ++a) {
    for (int p = 0; p < n_pts; ++p) {
      ResultRow row;
      row.arch = arch_name(ctx.cfg.architectures[a]);
      row.p_t_dbm = ctx.sweep_dbm[p];
      row.n_trials = ctx.n_trials;
      row.power_w = arch_power(ctx, ctx.cfg.architectures[a], ctx.sweep_w[p]).total_w;

      double sum = 0.0;
      double ee_sum = 0.0;
      int ok = 0;
      for (int t = 0; t < ctx.n_trials; ++t) {
        const double r = rates[t][a * n_pts + p];
        if (std::isnan(r)) continue;
        sum += r;
        ee_sum += r / row.power_w;
        ++ok;
      }
      row.n_failures = ctx.n_trials - ok;
      row.flagged = row.n_failures > 0.05 * ctx.n_trials;
      if (ok > 0) {
        row.mean_rate = sum / ok;
        row.mean_ee = ee_sum / ok;
        if (ok > 1) {
          double ss = 0.0;
          for (int t = 0; t < ctx.n_trials; ++t) {
            const double r = rates[t][a * n_pts + p];
            if (std::isnan(r)) continue;
            ss += (r - row.mean_rate) * (r - row.mean_rate);
          }
          row.rate_ci95 = 1.96 * std::sqrt(ss / (ok - 1) / ok);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string render_csv(std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.arch != b.arch) return a.arch < b.arch;
    return a.p_t_dbm < b.p_t_dbm;
  });
  std::string out =
      "arch,p_t_dbm,mean_rate_bps_hz,rate_ci95,mean_ee_bps_hz_per_w,power_w,"
      "n_trials\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n",
                  row.arch.c_str(), row.p_t_dbm, row.mean_rate, row.rate_ci95,
                  row.mean_ee, row.power_w, row.n_trials);
    out += buf;
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit_csv: cannot open " + path);
  }
  out << render_csv(rows);
  if (!out) {
    throw std::runtime_error("emit_csv: write failed for " + path);
  }
}

}  // namespace hmasim
