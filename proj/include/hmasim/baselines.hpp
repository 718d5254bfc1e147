// SPDX-License-Identifier: Apache-2.0
//
// Reference architectures for rate and energy-efficiency comparison: the
// digital phased array (MRC / zero-forcing) and the fully-connected hybrid
// phased array with active phase shifters, including the two-block noise
// model with phase-shifter and Wilkinson combiner losses.

#pragma once

#include <Eigen/Dense>

#include "hmasim/channel.hpp"

namespace hmasim {

// Gains and noise factors of the two hybrid-array blocks. Block 1 is the
// analog combining path (phase shifter plus combiner tree); block 2 is the
// RF chain. All linear units; gains are power gains.
struct HybridBlockModel {
  double g1 = 1.0;
  double g2 = 1.0;
  double f1 = 1.0;
  double f2 = 1.0;
  Eigen::MatrixXcd w_abf;  // M x N analog combiner, |entries| <= 1 for active PSs
};

// Evaluation context shared by the baseline arrays: channel on the patch
// grid, noise parameters, transmit power density, and the antenna efficiency
// applied as a power factor on the received signal.
struct ArraySystem {
  const ChannelRealization* chan = nullptr;
  const NoiseModel* noise = nullptr;
  double p_t = 0.0;           // W/m^2
  double rx_efficiency = 0.9; // patch antenna insertion loss
};

struct BaselineSolution {
  Eigen::MatrixXcd w_abf;  // analog combiner (empty for all-digital arrays)
  Eigen::MatrixXcd w_d;    // digital combiner
  Eigen::VectorXd sinr;
  double rate = 0.0;
  HybridBlockModel blocks;
};

// Single-user maximum ratio combining, w = h^H.
BaselineSolution dpa_mrc(const ArraySystem& sys);

// Multi-user zero forcing, W = (H^H H)^{-1} H^H; requires K <= N and full
// column rank.
BaselineSolution dpa_zf(const ArraySystem& sys);

// Cascades one phase shifter with ceil(log2(n_way)) two-way Wilkinson stages
// (block 1) and the RF chain (block 2); returns factors and gains via the
// Friis formula. w_abf is left empty.
HybridBlockModel block_noise_factors(const NoiseStage& phase_shifter,
                                     const NoiseStage& wilkinson_two_way,
                                     int n_way,
                                     const std::vector<NoiseStage>& rf_stages);

// Fully-connected hybrid array with active phase shifters: MRC (K = 1) or ZF
// rows scaled so the largest entry magnitude is one, digital ZF on the
// block-1 equivalent channel, and SINR with colored block-1 noise injected
// at the antenna ports plus white block-2 noise referred through g1.
BaselineSolution fchp_active(const ArraySystem& sys,
                             const HybridBlockModel& blocks);

}  // namespace hmasim
