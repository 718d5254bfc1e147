// SPDX-License-Identifier: Apache-2.0

#include "hmasim/power_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hmasim {

DeviceCatalog DeviceCatalog::defaults() {
  DeviceCatalog catalog;
  // name, power [W], gain [dB], NF [dB]; passive devices have NF = loss.
  catalog.upsert({"filter", 0.0, -3.0, 3.0});
  catalog.upsert({"lna", 0.75, 15.0, 3.5});
  catalog.upsert({"mixer", 0.4, -7.1, 8.0});
  catalog.upsert({"iqd", 2.2, 0.0, 31.0});
  catalog.upsert({"aaf", 0.01, 0.0, 0.0});
  catalog.upsert({"adc_driver", 0.15, 20.0, 6.4});
  catalog.upsert({"adc", 0.725, 0.0, 30.0});
  catalog.upsert({"osc", 0.02, 0.0, 0.0});
  catalog.upsert({"clock_dist", 0.08, 0.0, 0.0});
  catalog.upsert({"pas_ps", 0.0, -5.0, 5.0});
  catalog.upsert({"act_ps", 0.625, -4.5, 23.0});
  catalog.upsert({"wilkinson", 0.0, -3.9, 3.9});
  catalog.upsert({"dac", 0.002, 0.0, 0.0});
  catalog.upsert({"hms_controller", 0.0006, 0.0, 0.0});
  catalog.upsert({"fpga", 0.1, 0.0, 0.0});
  return catalog;
}

namespace {

double parse_field(const std::string& field) {
  const auto start = field.find_first_not_of(" \t\r");
  if (start == std::string::npos) return 0.0;
  const auto stop = field.find_last_not_of(" \t\r");
  const std::string token = field.substr(start, stop - start + 1);
  if (token == "-" || token.empty()) return 0.0;
  std::size_t used = 0;
  const double value = std::stod(token, &used);
  if (used != token.size()) {
    throw std::runtime_error("catalog: bad numeric field '" + token + "'");
  }
  return value;
}

}  // namespace

DeviceCatalog DeviceCatalog::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("catalog: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("catalog: empty file " + path);
  }
  if (line.rfind("name,power_w,gain_db,nf_db", 0) != 0) {
    throw std::runtime_error("catalog: bad header in " + path);
  }
  DeviceCatalog catalog;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string name, power, gain, nf;
    if (!std::getline(row, name, ',') || !std::getline(row, power, ',') ||
        !std::getline(row, gain, ',')) {
      throw std::runtime_error("catalog: malformed row at line " +
                               std::to_string(line_no));
    }
    std::getline(row, nf, ',');
    catalog.upsert({name, parse_field(power), parse_field(gain), parse_field(nf)});
  }
  return catalog;
}

const DeviceSpec& DeviceCatalog::at(const std::string& name) const {
  const auto it = devices_.find(name);
  if (it == devices_.end()) {
    throw std::out_of_range("catalog: unknown device '" + name + "'");
  }
  return it->second;
}

bool DeviceCatalog::contains(const std::string& name) const {
  return devices_.count(name) != 0;
}

void DeviceCatalog::upsert(DeviceSpec spec) {
  devices_[spec.name] = std::move(spec);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

NoiseStage device_stage(const DeviceCatalog& catalog, const std::string& name) {
  const DeviceSpec& spec = catalog.at(name);
  return {db_to_linear(spec.nf_db), db_to_linear(spec.gain_db)};
}

std::vector<NoiseStage> rf_chain_stages(const DeviceCatalog& catalog) {
  return {device_stage(catalog, "filter"),     device_stage(catalog, "lna"),
          device_stage(catalog, "mixer"),      device_stage(catalog, "iqd"),
          device_stage(catalog, "aaf"),        device_stage(catalog, "adc_driver"),
          device_stage(catalog, "adc")};
}

double lna_power(double p_in, double g_lna, double pae, double p_static) {
  if (pae <= 0.0 || pae > 1.0) {
    throw std::invalid_argument("lna_power: pae must be in (0, 1]");
  }
  if (g_lna <= 1.0) {
    throw std::invalid_argument("lna_power: gain must exceed 1");
  }
  return std::max(p_static, (g_lna - 1.0) / pae * p_in);
}

double rf_chain_power(int m, const DeviceCatalog& catalog,
                      double lna_input_power) {
  if (m < 1) {
    throw std::invalid_argument("rf_chain_power: need at least one chain");
  }
  const DeviceSpec& lna = catalog.at("lna");
  const double p_lna = lna_power(lna_input_power, db_to_linear(lna.gain_db),
                                 kLnaPae, lna.power_w);
  const double per_chain =
      catalog.at("filter").power_w + p_lna + catalog.at("mixer").power_w +
      catalog.at("iqd").power_w +
      2.0 * (catalog.at("aaf").power_w + catalog.at("adc_driver").power_w +
             catalog.at("adc").power_w) +
      catalog.at("clock_dist").power_w;
  return catalog.at("osc").power_w + m * per_chain;
}

double metasurface_power(int n_cells, const DeviceCatalog& catalog) {
  if (n_cells < 1) {
    throw std::invalid_argument("metasurface_power: need at least one cell");
  }
  return n_cells * (catalog.at("dac").power_w +
                    catalog.at("hms_controller").power_w) +
         catalog.at("fpga").power_w;
}

double mean_lna_input_power(double p_t, double mean_beta, double a_eff,
                            double antennas_per_chain) {
  return p_t * mean_beta * a_eff * antennas_per_chain;
}

PowerBreakdown architecture_power(Architecture arch, const ArchDims& dims,
                                  const DeviceCatalog& catalog,
                                  double lna_input_w) {
  PowerBreakdown out;
  switch (arch) {
    case Architecture::kHma:
      if (dims.n_antennas < 1 || dims.m_chains < 1 || dims.n_phase_shifters != 0) {
        throw std::invalid_argument("architecture_power: bad HMA dims");
      }
      out.rf_chains_w = rf_chain_power(dims.m_chains, catalog, lna_input_w);
      out.metasurface_w = metasurface_power(dims.n_antennas, catalog);
      break;
    case Architecture::kDpa:
      if (dims.n_antennas < 1 || dims.m_chains != dims.n_antennas ||
          dims.n_phase_shifters != 0) {
        throw std::invalid_argument("architecture_power: DPA requires M = N");
      }
      out.rf_chains_w = rf_chain_power(dims.m_chains, catalog, lna_input_w);
      break;
    case Architecture::kFchpActive:
      if (dims.n_antennas < 1 || dims.m_chains < 1 ||
          dims.n_phase_shifters != dims.n_antennas * dims.m_chains) {
        throw std::invalid_argument(
            "architecture_power: FCHP requires N*M phase shifters");
      }
      out.rf_chains_w = rf_chain_power(dims.m_chains, catalog, lna_input_w);
      out.phase_shifters_w = dims.n_phase_shifters * catalog.at("act_ps").power_w;
      break;
  }
  out.total_w = out.rf_chains_w + out.metasurface_w + out.phase_shifters_w;
  return out;
}

double energy_efficiency(double rate, const PowerBreakdown& breakdown) {
  if (breakdown.total_w <= 0.0) {
    throw std::invalid_argument("energy_efficiency: zero consumed power");
  }
  return rate / breakdown.total_w;
}

}  // namespace hmasim
