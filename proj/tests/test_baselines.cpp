// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "hmasim/baselines.hpp"
#include "hmasim/link_optimizer.hpp"
#include "hmasim/power_model.hpp"
#include "hmasim/rng.hpp"

using namespace hmasim;
using cd = std::complex<double>;

namespace {

constexpr double kLambda = 0.09993081933333334;

ChannelRealization fixed_channel(const Eigen::MatrixXcd& h) {
  ChannelRealization chan;
  chan.h = h;
  chan.sigma_rx = Eigen::MatrixXd::Identity(h.rows(), h.rows());
  chan.beta = Eigen::VectorXd::Ones(h.cols());
  return chan;
}

NoiseModel patch_noise() {
  NoiseModel noise;
  noise.sigma2_ant = antenna_noise_power(0.0026, kLambda, 20e6, 290.0);
  noise.sigma2_rf = 3.324664950124442e-11;
  return noise;
}

Eigen::MatrixXcd random_channel(int n, int k, std::uint64_t seed,
                                double scale = 1e-5) {
  Rng rng(seed);
  Eigen::MatrixXcd h(n, k);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < k; ++c) h(r, c) = scale * rng.cnormal();
  return h;
}

}  // namespace

TEST_CASE("MRC picks the only excited element") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 1);
  h(0, 0) = cd(2.0e-5, -1.0e-5);
  const auto chan = fixed_channel(h);
  const auto noise = patch_noise();
  ArraySystem sys{&chan, &noise, 0.1, 0.9};
  const auto sol = dpa_mrc(sys);
  CHECK(std::abs(sol.w_d(0, 0) - std::conj(h(0, 0))) < 1e-18);
  for (int n = 1; n < 4; ++n) CHECK(std::abs(sol.w_d(0, n)) == 0.0);
  CHECK(sol.rate > 0.0);
}

TEST_CASE("MRC beats random unit-norm combiners") {
  const auto chan = fixed_channel(random_channel(6, 1, 3));
  const auto noise = patch_noise();
  ArraySystem sys{&chan, &noise, 0.1, 0.9};
  const auto sol = dpa_mrc(sys);

  Rng rng(4);
  for (int probe = 0; probe < 100; ++probe) {
    Eigen::MatrixXcd w(1, 6);
    for (int n = 0; n < 6; ++n) w(0, n) = rng.cnormal();
    w /= w.norm();
    const auto gamma = combined_sinr(w, chan.h, chan.sigma_rx,
                                     sys.p_t * sys.rx_efficiency,
                                     noise.sigma2_ant, 0.0, w, noise.sigma2_rf);
    CHECK(sol.rate >= sum_rate(gamma) - 1e-12);
  }
}

TEST_CASE("ZF combiner properties") {
  SUBCASE("semi-unitary channel gives the adjoint") {
    // Orthonormal columns from a QR factorization.
    const Eigen::MatrixXcd raw = random_channel(6, 2, 9, 1.0);
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(raw);
    const Eigen::MatrixXcd q =
        qr.householderQ() * Eigen::MatrixXcd::Identity(6, 2);
    const auto chan = fixed_channel(q);
    const auto noise = patch_noise();
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    const auto sol = dpa_zf(sys);
    CHECK((sol.w_d - q.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("square invertible channel gives the inverse") {
    const Eigen::MatrixXcd h = random_channel(2, 2, 10, 1.0);
    const auto chan = fixed_channel(h);
    const auto noise = patch_noise();
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    const auto sol = dpa_zf(sys);
    CHECK((sol.w_d * h - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("8x2 nulling residual") {
    const auto chan = fixed_channel(random_channel(8, 2, 11));
    const auto noise = patch_noise();
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    const auto sol = dpa_zf(sys);
    const Eigen::MatrixXcd residual =
        sol.w_d * chan.h - Eigen::MatrixXcd::Identity(2, 2);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("single-user ZF matches MRC (both reduce to matched filtering)") {
    const auto chan = fixed_channel(random_channel(6, 1, 13));
    const auto noise = patch_noise();
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    CHECK(dpa_zf(sys).rate == doctest::Approx(dpa_mrc(sys).rate).epsilon(1e-12));
  }
  SUBCASE("rank deficiency is rejected") {
    Eigen::MatrixXcd h(4, 2);
    const Eigen::MatrixXcd col = random_channel(4, 1, 12);
    h.col(0) = col;
    h.col(1) = 2.0 * col;
    const auto chan = fixed_channel(h);
    const auto noise = patch_noise();
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    CHECK_THROWS_AS(dpa_zf(sys), std::runtime_error);
  }
}

TEST_CASE("block noise factors") {
  const auto catalog = DeviceCatalog::defaults();
  const auto rf = rf_chain_stages(catalog);

  SUBCASE("a lone active phase shifter") {
    const auto blocks =
        block_noise_factors(device_stage(catalog, "act_ps"),
                            device_stage(catalog, "wilkinson"), 1, rf);
    CHECK(blocks.f1 == doctest::Approx(std::pow(10.0, 2.3)).epsilon(1e-12));
    CHECK(blocks.g1 == doctest::Approx(std::pow(10.0, -0.45)).epsilon(1e-12));
  }
  SUBCASE("passive element noise figure equals its insertion loss") {
    const auto wilkinson = device_stage(catalog, "wilkinson");
    CHECK(wilkinson.noise_factor ==
          doctest::Approx(1.0 / wilkinson.gain).epsilon(1e-12));
    const auto filter = device_stage(catalog, "filter");
    CHECK(filter.noise_factor == doctest::Approx(1.0 / filter.gain).epsilon(1e-12));
  }
  SUBCASE("two cascaded two-way stages (Friis over identical passives)") {
    const NoiseStage unity{1.0, 1.0};
    const auto blocks =
        block_noise_factors(unity, device_stage(catalog, "wilkinson"), 4, rf);
    CHECK(blocks.g1 == doctest::Approx(std::pow(10.0, -0.78)).epsilon(1e-12));
    CHECK(blocks.f1 == doctest::Approx(std::pow(10.0, 0.78)).epsilon(1e-12));
  }
  SUBCASE("eight-way tree loses ceil(log2 N) x 3.9 dB") {
    const auto blocks =
        block_noise_factors(device_stage(catalog, "act_ps"),
                            device_stage(catalog, "wilkinson"), 8, rf);
    const double tree_gain_db =
        linear_to_db(blocks.g1 / std::pow(10.0, -0.45));
    CHECK(tree_gain_db == doctest::Approx(-11.7).epsilon(1e-9));
  }
}

TEST_CASE("fully-connected hybrid with active phase shifters") {
  const auto catalog = DeviceCatalog::defaults();
  const auto rf = rf_chain_stages(catalog);
  const auto noise = patch_noise();

  SUBCASE("analog weights are scaled into the unit disk") {
    const auto chan = fixed_channel(random_channel(8, 2, 21));
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    const auto blocks = block_noise_factors(device_stage(catalog, "act_ps"),
                                            device_stage(catalog, "wilkinson"),
                                            8, rf);
    const auto sol = fchp_active(sys, blocks);
    CHECK(sol.w_abf.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.w_abf.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  }

  SUBCASE("amplitude scaling leaves zero-forcing nulls intact") {
    const auto chan = fixed_channel(random_channel(8, 2, 22));
    ArraySystem sys{&chan, &noise, 0.1, 0.9};
    const auto blocks = block_noise_factors(device_stage(catalog, "act_ps"),
                                            device_stage(catalog, "wilkinson"),
                                            8, rf);
    const auto sol = fchp_active(sys, blocks);
    const Eigen::MatrixXcd effective = sol.w_d * sol.w_abf * chan.h;
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < 2; ++j) {
        if (j != k) {
          CHECK(std::abs(effective(k, j)) <= 1e-8 * std::abs(effective(k, k)));
        }
      }
    }
  }

  SUBCASE("lossless noiseless-block-2 hybrid degenerates to MRC with block-1 noise") {
    const auto chan = fixed_channel(random_channel(6, 1, 23));
    ArraySystem sys{&chan, &noise, 0.1, 0.9};

    HybridBlockModel blocks;
    blocks.f1 = 2.0;  // block-1 noise kTB, no loss
    blocks.g1 = 1.0;
    blocks.f2 = 1.0;  // noiseless block 2
    blocks.g2 = 1.0;
    const auto sol = fchp_active(sys, blocks);

    NoiseModel mrc_noise = noise;
    mrc_noise.sigma2_rf = kBoltzmann * noise.temp_bs * noise.bandwidth;
    ArraySystem mrc_sys{&chan, &mrc_noise, 0.1, 0.9};
    const auto mrc = dpa_mrc(mrc_sys);
    CHECK(sol.rate == doctest::Approx(mrc.rate).epsilon(1e-12));
  }
}
