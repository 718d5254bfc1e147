// SPDX-License-Identifier: Apache-2.0

#include "hmasim/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "hmasim/link_optimizer.hpp"

namespace hmasim {

namespace {

void check_system(const ArraySystem& sys) {
  if (sys.chan == nullptr || sys.noise == nullptr) {
    throw std::invalid_argument("baseline: incomplete array system");
  }
}

}  // namespace

BaselineSolution dpa_mrc(const ArraySystem& sys) {
  check_system(sys);
  const auto& h = sys.chan->h;
  if (h.cols() != 1) {
    throw std::invalid_argument("dpa_mrc: single-user combiner, K must be 1");
  }
  BaselineSolution sol;
  sol.w_d = h.adjoint();  // 1 x N
  sol.sinr = combined_sinr(sol.w_d, h, sys.chan->sigma_rx,
                           sys.p_t * sys.rx_efficiency, sys.noise->sigma2_ant,
                           0.0, sol.w_d, sys.noise->sigma2_rf);
  sol.rate = sum_rate(sol.sinr);
  return sol;
}

BaselineSolution dpa_zf(const ArraySystem& sys) {
  check_system(sys);
  const auto& h = sys.chan->h;
  if (h.cols() > h.rows()) {
    throw std::invalid_argument("dpa_zf: more users than antennas");
  }
  const Eigen::MatrixXcd gram = h.adjoint() * h;  // K x K
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw std::runtime_error("dpa_zf: rank-deficient channel");
  }
  BaselineSolution sol;
  sol.w_d = gram.partialPivLu().solve(h.adjoint());
  // Refinement keeps W H - I at machine precision.
  sol.w_d += gram.partialPivLu().solve(h.adjoint() - gram * sol.w_d);
  sol.sinr = combined_sinr(sol.w_d, h, sys.chan->sigma_rx,
                           sys.p_t * sys.rx_efficiency, sys.noise->sigma2_ant,
                           0.0, sol.w_d, sys.noise->sigma2_rf);
  sol.rate = sum_rate(sol.sinr);
  return sol;
}

HybridBlockModel block_noise_factors(const NoiseStage& phase_shifter,
                                     const NoiseStage& wilkinson_two_way,
                                     int n_way,
                                     const std::vector<NoiseStage>& rf_stages) {
  if (n_way < 1) {
    throw std::invalid_argument("block_noise_factors: n_way must be >= 1");
  }
  std::vector<NoiseStage> block1{phase_shifter};
  const int tree_depth =
      (n_way == 1) ? 0 : static_cast<int>(std::ceil(std::log2(double(n_way)) - 1e-12));
  for (int i = 0; i < tree_depth; ++i) block1.push_back(wilkinson_two_way);

  HybridBlockModel blocks;
  std::tie(blocks.f1, blocks.g1) = friis_cascade(block1);
  std::tie(blocks.f2, blocks.g2) = friis_cascade(rf_stages);
  return blocks;
}

BaselineSolution fchp_active(const ArraySystem& sys,
                             const HybridBlockModel& blocks) {
  check_system(sys);
  const auto& h = sys.chan->h;
  const Eigen::Index k_users = h.cols();

  // Analog combiner: MRC for a single user, ZF rows otherwise, then one
  // global scale so every active phase-shifter weight has magnitude <= 1.
  Eigen::MatrixXcd w0;
  if (k_users == 1) {
    w0 = h.adjoint();
  } else {
    const Eigen::MatrixXcd gram = h.adjoint() * h;
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0) || svd.singularValues().maxCoeff() / smin > 1e12) {
      throw std::runtime_error("fchp_active: rank-deficient channel");
    }
    w0 = gram.partialPivLu().solve(h.adjoint());
  }
  const double peak = w0.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) {
    throw std::runtime_error("fchp_active: zero analog combiner");
  }

  BaselineSolution sol;
  sol.blocks = blocks;
  sol.blocks.w_abf = w0 / peak;  // M x N with M = K
  sol.w_abf = sol.blocks.w_abf;

  // Digital ZF on the block-1 equivalent channel.
  const Eigen::MatrixXcd h_eq = sol.w_abf * h;  // K x K
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd_eq(h_eq);
  const double smin = svd_eq.singularValues().minCoeff();
  if (!(smin > 0.0) || svd_eq.singularValues().maxCoeff() / smin > 1e12) {
    throw std::runtime_error("fchp_active: singular equivalent channel");
  }
  sol.w_d = h_eq.partialPivLu().inverse();
  sol.w_d += sol.w_d *
             (Eigen::MatrixXcd::Identity(k_users, k_users) - h_eq * sol.w_d);

  // Input-referred block noises: z1 at the antenna ports (colored through the
  // full combiner), z2 at the block-2 input, referred through the block-1
  // power gain.
  const double ktb =
      kBoltzmann * sys.noise->temp_bs * sys.noise->bandwidth;
  const double sigma2_block1 = (sol.blocks.f1 - 1.0) * ktb;
  const double sigma2_block2 = (sol.blocks.f2 - 1.0) * ktb / sol.blocks.g1;

  const Eigen::MatrixXcd total = sol.w_d * sol.w_abf;  // K x N
  sol.sinr = combined_sinr(total, h, sys.chan->sigma_rx,
                           sys.p_t * sys.rx_efficiency, sys.noise->sigma2_ant,
                           sigma2_block1, sol.w_d, sigma2_block2);
  sol.rate = sum_rate(sol.sinr);
  return sol;
}

}  // namespace hmasim
