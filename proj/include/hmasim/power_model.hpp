// SPDX-License-Identifier: Apache-2.0
//
// Hardware power-consumption model: per-device catalog, RF-chain and
// metasurface-driver power, per-architecture breakdowns, and energy
// efficiency.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "hmasim/channel.hpp"

namespace hmasim {

struct DeviceSpec {
  std::string name;
  double power_w = 0.0;
  double gain_db = 0.0;
  double nf_db = 0.0;
};

// Data-driven device table. Built-in defaults carry the baseline hardware
// set; load_csv swaps in alternative hardware without code changes.
class DeviceCatalog {
 public:
  static DeviceCatalog defaults();

  // CSV with header "name,power_w,gain_db,nf_db"; '-' or empty for
  // not-applicable gain/NF entries (stored as 0 dB).
  static DeviceCatalog load_csv(const std::string& path);

  const DeviceSpec& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  void upsert(DeviceSpec spec);

 private:
  std::map<std::string, DeviceSpec> devices_;
};

double db_to_linear(double db);
double linear_to_db(double lin);

// Gain/NF of one catalog device as a linear cascade stage.
NoiseStage device_stage(const DeviceCatalog& catalog, const std::string& name);

// Signal path of one RF chain, in order: filter, LNA, mixer, IQD, AAF,
// ADC driver, ADC.
std::vector<NoiseStage> rf_chain_stages(const DeviceCatalog& catalog);

inline constexpr double kLnaPae = 0.12;  // power-added efficiency at saturation

// max(static, (G - 1)/pae * p_in): static consumption dominates until the
// summed input signal power is large.
double lna_power(double p_in, double g_lna, double pae, double p_static);

// P_osc + m * (P_filter + P_lna + P_mixer + P_iqd
//              + 2 (P_aaf + P_adc_driver + P_adc) + P_clock_dist);
// the oscillator is shared across chains.
double rf_chain_power(int m, const DeviceCatalog& catalog,
                      double lna_input_power);

// n_cells * (P_dac + P_controller) + P_fpga; varactors draw no power.
double metasurface_power(int n_cells, const DeviceCatalog& catalog);

// Average LNA input power: mean path gain x per-antenna effective area x
// transmit power density x antennas feeding the chain.
double mean_lna_input_power(double p_t, double mean_beta, double a_eff,
                            double antennas_per_chain);

enum class Architecture { kHma, kDpa, kFchpActive };

struct ArchDims {
  int n_antennas = 0;       // unit-cells (HMA) or array elements (DPA/FCHP)
  int m_chains = 0;         // RF chains
  int n_phase_shifters = 0; // FCHP only; must equal n_antennas * m_chains
};

struct PowerBreakdown {
  double rf_chains_w = 0.0;
  double metasurface_w = 0.0;
  double phase_shifters_w = 0.0;
  double total_w = 0.0;
  double energy_efficiency = 0.0;  // populated when paired with a rate
};

// Itemized consumed power. Depends only on (arch, dims, catalog, lna_input):
// the metasurface state does not change the draw.
PowerBreakdown architecture_power(Architecture arch, const ArchDims& dims,
                                  const DeviceCatalog& catalog,
                                  double lna_input_w);

double energy_efficiency(double rate, const PowerBreakdown& breakdown);

}  // namespace hmasim
