// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "hmasim/em_model.hpp"
#include "hmasim/rng.hpp"

using namespace hmasim;
using cd = std::complex<double>;

TEST_CASE("amplitude at one meter broadside") {
  // Direct evaluation of the closed form, in long double.
  const long double coeff = 3.0L * std::sqrt(2.0L) / (8.0L * M_PIl);
  const double expected = static_cast<double>(std::sqrt(coeff));
  CHECK(propagation_amplitude(1.0, M_PI / 2) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(propagation_amplitude(1.0, M_PI / 2) ==
        doctest::Approx(0.41088).epsilon(1e-4));
}

TEST_CASE("dipole axis is a null") {
  CHECK(propagation_amplitude(0.3, 0.0) == 0.0);
  CHECK(propagation_amplitude(7.0, 0.0) == 0.0);
  CHECK(propagation_amplitude(1.0, M_PI) == 0.0);
}

TEST_CASE("amplitude scales as 1/r") {
  const double a1 = propagation_amplitude(1.0, M_PI / 2);
  const double a2 = propagation_amplitude(2.0, M_PI / 2);
  CHECK(a2 == doctest::Approx(0.5 * a1).epsilon(1e-14));
}

TEST_CASE("amplitude rejects nonpositive distance") {
  CHECK_THROWS_AS(propagation_amplitude(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(propagation_amplitude(-1.0, 1.0), std::domain_error);
}

TEST_CASE("phase at k0 r = 1 evaluates to -1 rad") {
  // pi/2 - 1 + arg(1 - j - 1) = pi/2 - 1 - pi/2
  CHECK(propagation_phase(1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("phase at one wavelength matches a complex-arithmetic oracle") {
  const double lambda = 0.125;
  const double k0 = 2 * M_PI / lambda;
  const double kr = k0 * lambda;  // 2 pi
  const cd bracket = 1.0 + 1.0 / (cd(0.0, 1.0) * kr) - 1.0 / (kr * kr);
  double expected = std::remainder(M_PI / 2 - kr + std::arg(bracket), 2 * M_PI);
  if (expected <= -M_PI) expected += 2 * M_PI;
  CHECK(propagation_phase(lambda, k0) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(propagation_phase(lambda, k0) ==
        doctest::Approx(1.4089337165427418).epsilon(1e-12));
}

TEST_CASE("far-field phase approaches pi/2 - k0 r") {
  const double r = 1000.0;
  const double k0 = 2 * M_PI;  // k0 r = 2000 pi, so wrap(pi/2 - k0 r) = pi/2
  const double phase = propagation_phase(r, k0);
  CHECK(std::abs(phase - M_PI / 2) < 2e-4);
}

TEST_CASE("wrap_phase lands in (-pi, pi]") {
  CHECK(wrap_phase(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(M_PI + 0.1) == doctest::Approx(-M_PI + 0.1).epsilon(1e-12));
  CHECK(wrap_phase(0.25) == doctest::Approx(0.25));
}

TEST_CASE("propagation matrix matches elementwise recomputation") {
  const double lambda = 0.1;
  const auto layout =
      build_planar_layout(lambda, lambda / 4, lambda / 4, 1, 2, 0.3 * lambda, lambda);
  REQUIRE(layout.n_cells() == 4);
  REQUIRE(layout.n_chains() == 2);

  const Eigen::MatrixXcd p = build_p_hms(layout, lambda);
  const double k0 = 2 * M_PI / lambda;
  for (int m = 0; m < 2; ++m) {
    for (int n = 0; n < 4; ++n) {
      // Scalar oracle from raw vector arithmetic and the closed forms.
      const Eigen::Vector3d d = layout.hms_positions[n] - layout.dpa_positions[m];
      const double r = d.norm();
      const double sin_theta = std::hypot(d.x(), d.y()) / r;
      const double amp = std::sqrt(3.0 * std::sqrt(2.0) / (8.0 * M_PI)) * sin_theta / r;
      const double kr = k0 * r;
      const cd bracket(1.0 - 1.0 / (kr * kr), -1.0 / kr);
      const cd expected = std::polar(amp, M_PI / 2 - kr + std::arg(bracket));
      CHECK(std::abs(p(m, n) - expected) < 1e-12 * std::abs(expected));
    }
  }
}

TEST_CASE("propagation matrix construction is deterministic") {
  const double lambda = 0.09993;
  const auto layout = build_planar_layout(2 * lambda, 2 * lambda, lambda / 4,
                                          1, 2, lambda, lambda);
  const Eigen::MatrixXcd a = build_p_hms(layout, lambda);
  const Eigen::MatrixXcd b = build_p_hms(layout, lambda);
  CHECK((a.array() == b.array()).all());
}

namespace {

HmaModel small_model(double t_loss) {
  const double lambda = 0.1;
  const auto layout = build_planar_layout(lambda, lambda, lambda / 4, 1, 1,
                                          lambda, lambda);
  return make_hma_model(layout, t_loss);
}

}  // namespace

TEST_CASE("identity weighting returns the propagation matrix") {
  HmaModel model = small_model(1.0);
  const Eigen::MatrixXcd g = rwd_combiner(model);
  CHECK((g - model.p_hms).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("insertion loss scales every column by sqrt(T) t_n") {
  HmaModel model = small_model(0.7);
  Rng rng(11);
  for (int n = 0; n < model.t_hms.size(); ++n) model.t_hms[n] = rng.cnormal();

  const Eigen::MatrixXcd g = rwd_combiner(model);
  const double root_t = std::sqrt(0.7);
  for (int n = 0; n < model.p_hms.cols(); ++n) {
    for (int m = 0; m < model.p_hms.rows(); ++m) {
      const cd expected = root_t * model.t_hms[n] * model.p_hms(m, n);
      CHECK(std::abs(g(m, n) - expected) <= 1e-15);
    }
  }
}

TEST_CASE("rwd_combiner rejects mismatched weight length") {
  HmaModel model = small_model(0.7);
  model.t_hms = Eigen::VectorXcd::Ones(model.p_hms.cols() + 1);
  CHECK_THROWS_AS(rwd_combiner(model), std::invalid_argument);
}

TEST_CASE("power conservation gap") {
  Rng rng(5);
  Eigen::VectorXd p_in(6);
  for (int i = 0; i < 6; ++i) p_in[i] = rng.uniform(0.1, 2.0);
  const double total = p_in.sum();

  SUBCASE("unit transmission conserves power") {
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(6);
    CHECK(power_conservation_gap(ones, p_in) == doctest::Approx(0.0));
  }
  SUBCASE("uniform attenuation halves the throughput") {
    const Eigen::VectorXcd t = Eigen::VectorXcd::Constant(6, 1.0 / std::sqrt(2.0));
    CHECK(power_conservation_gap(t, p_in) ==
          doctest::Approx(-0.5 * total).epsilon(1e-12));
  }
  SUBCASE("any unit-modulus configuration is exactly conservative") {
    Eigen::VectorXcd t(6);
    for (int i = 0; i < 6; ++i) t[i] = std::polar(1.0, rng.uniform(-M_PI, M_PI));
    CHECK(std::abs(power_conservation_gap(t, p_in)) <= 1e-12 * total);
  }
  SUBCASE("gap is invariant under per-element phase rotation") {
    Eigen::VectorXcd t(6);
    for (int i = 0; i < 6; ++i) t[i] = rng.cnormal();
    const double before = power_conservation_gap(t, p_in);
    for (int i = 0; i < 6; ++i) t[i] *= std::polar(1.0, rng.uniform(-M_PI, M_PI));
    CHECK(power_conservation_gap(t, p_in) ==
          doctest::Approx(before).epsilon(1e-12));
  }
  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(power_conservation_gap(Eigen::VectorXcd::Ones(5), p_in),
                    std::invalid_argument);
  }
}

TEST_CASE("|G h| is invariant under a global phase on the weights") {
  const double lambda = 0.1;
  const auto layout =
      build_planar_layout(lambda, lambda, lambda / 4, 1, 2, lambda, lambda);
  HmaModel model = make_hma_model(layout, 0.7);

  Rng rng(23);
  for (int n = 0; n < model.t_hms.size(); ++n) model.t_hms[n] = rng.cnormal();
  Eigen::VectorXcd h(model.p_hms.cols());
  for (int n = 0; n < h.size(); ++n) h[n] = rng.cnormal();

  const Eigen::VectorXcd base = rwd_combiner(model) * h;
  HmaModel rotated = model;
  rotated.t_hms *= std::polar(1.0, 1.234);
  const Eigen::VectorXcd rot = rwd_combiner(rotated) * h;
  for (int m = 0; m < base.size(); ++m) {
    CHECK(std::abs(rot[m]) == doctest::Approx(std::abs(base[m])).epsilon(1e-12));
  }
}
