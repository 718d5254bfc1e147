// SPDX-License-Identifier: Apache-2.0
//
// Correlated Rayleigh uplink channels, user drops, noise powers, and import
// of externally generated channel matrices.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmasim/geometry.hpp"

namespace hmasim {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K

struct ChannelRealization {
  Eigen::MatrixXcd h;        // N x K uplink channel, unit-cells x users
  Eigen::VectorXd beta;      // K per-user linear path gains
  Eigen::MatrixXd sigma_rx;  // N x N receive correlation (unit diagonal)
  std::vector<Eigen::Vector2d> user_positions;  // meters; empty when imported

  int n_antennas() const { return static_cast<int>(h.rows()); }
  int n_users() const { return static_cast<int>(h.cols()); }
};

struct NoiseModel {
  double sigma2_ant = 0.0;  // per-antenna external noise power, W
  double sigma2_rf = 0.0;   // per-RF-chain white noise power, W
  double bandwidth = 20e6;  // Hz
  double temp_env = 290.0;  // K
  double temp_bs = 290.0;   // K
};

// (Sigma_rx)_{n,n'} = sinc(2 d_{n,n'} / lambda) with sinc(x) = sin(pi x)/(pi x);
// diagonal exactly 1, exactly symmetric.
Eigen::MatrixXd receive_correlation(const std::vector<Eigen::Vector3d>& positions,
                                    double wavelength);
Eigen::MatrixXd receive_correlation(const ArrayLayout& layout);

// Winner II urban-microcell NLOS: PL_dB = 36.7 log10(d) + 22.7 + 26 log10(fc),
// returned as a linear power gain. Distances below the 25 m exclusion zone
// are a domain error.
double path_loss(double distance_m, double fc_ghz);

// K positions uniform over a hexagon (circumradius cell_radius, one vertex on
// +x) minus the exclusion disk, via rejection sampling. Deterministic per seed.
std::vector<Eigen::Vector2d> drop_users(int k, double cell_radius,
                                        double exclusion, std::uint64_t seed);

// Kronecker Rayleigh sampler. Precomputes the symmetric PSD square root of
// the receive correlation once per layout (eigenvalues clipped at zero; more
// than -1e-9 relative negative is a numerical error). literal_kronecker
// reproduces the non-square-root reading H = Sigma_rx Htilde Sigma_tx.
class ChannelSampler {
 public:
  ChannelSampler(std::vector<Eigen::Vector3d> positions, double wavelength,
                 double fc_ghz, bool literal_kronecker = false);

  ChannelRealization draw(const std::vector<Eigen::Vector2d>& users,
                          std::uint64_t seed) const;

  // Same sampler with caller-supplied per-user gains instead of path loss.
  ChannelRealization draw_with_gains(const Eigen::VectorXd& beta,
                                     std::uint64_t seed) const;

  const Eigen::MatrixXd& sigma_rx() const { return sigma_rx_; }

 private:
  Eigen::MatrixXd sigma_rx_;
  Eigen::MatrixXd rx_mixer_;  // sqrt(Sigma_rx), or Sigma_rx when literal
  double fc_ghz_;
};

// One-shot convenience wrapper over ChannelSampler.
ChannelRealization draw_channel(const ArrayLayout& layout,
                                const std::vector<Eigen::Vector2d>& users,
                                double fc_ghz, std::uint64_t seed,
                                bool literal_kronecker = false);

// sigma2_ant = k * T_E * B * (A_eff / lambda^2) * 2*pi  (half-space noise).
double antenna_noise_power(double a_eff, double wavelength, double bandwidth,
                           double temp_env);

// One device in a cascaded signal path, in linear units.
struct NoiseStage {
  double noise_factor = 1.0;  // >= 1
  double gain = 1.0;          // > 0, power gain
};

// Friis cascade: F = F1 + sum_{i>=2} (F_i - 1)/prod_{j<i} G_j ; G = prod G_i.
std::pair<double, double> friis_cascade(const std::vector<NoiseStage>& stages);

// Input-referred chain noise power (F_total - 1) * k * T_BS * B.
double rf_noise_power(const std::vector<NoiseStage>& stages, double bandwidth,
                      double temp_bs);

// Text channel file: line 1 "N K"; then N lines of 2K floats (re im per
// user); optional trailing "beta: b1 ... bK"; realizations separated by "---".
std::vector<ChannelRealization> import_channels(const std::string& path);
void export_channels(const std::string& path,
                     const std::vector<ChannelRealization>& list);

}  // namespace hmasim
