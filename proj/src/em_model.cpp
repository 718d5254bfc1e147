// SPDX-License-Identifier: Apache-2.0

#include "hmasim/em_model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace hmasim {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_phase(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);  // lands in [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double propagation_amplitude(double r, double theta) {
  if (r <= 0.0) {
    throw std::domain_error("propagation_amplitude: r must be positive");
  }
  double s = std::sin(theta);
  if (std::abs(s) < 1e-15) s = 0.0;  // the dipole axis is an exact null
  const double coeff = 3.0 * std::sqrt(2.0) / (8.0 * kPi);
  return std::sqrt(coeff * s * s / (r * r));
}

double propagation_phase(double r, double wavenumber) {
  if (r <= 0.0 || wavenumber <= 0.0) {
    throw std::domain_error("propagation_phase: r and wavenumber must be positive");
  }
  const double kr = wavenumber * r;
  // 1 + 1/(j*kr) - 1/(kr)^2 = (1 - 1/kr^2) - j/kr
  const std::complex<double> bracket(1.0 - 1.0 / (kr * kr), -1.0 / kr);
  return wrap_phase(kPi / 2.0 - kr + std::arg(bracket));
}

Eigen::MatrixXcd build_p_hms(const ArrayLayout& layout, double wavelength) {
  if (wavelength <= 0.0) {
    throw std::invalid_argument("build_p_hms: wavelength must be positive");
  }
  const double k0 = 2.0 * kPi / wavelength;
  const int m_count = layout.n_chains();
  const int n_count = layout.n_cells();
  Eigen::MatrixXcd p(m_count, n_count);
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < n_count; ++n) {
      const PairGeometry pg = pair_geometry(layout, m, n);
      const double amp = propagation_amplitude(pg.r, pg.theta);
      const double phase = propagation_phase(pg.r, k0);
      p(m, n) = std::polar(amp, phase);
    }
  }
  return p;
}

HmaModel make_hma_model(const ArrayLayout& layout, double t_loss) {
  if (t_loss <= 0.0 || t_loss > 1.0) {
    throw std::invalid_argument("make_hma_model: t_loss must be in (0, 1]");
  }
  HmaModel model;
  model.layout = layout;
  model.p_hms = build_p_hms(layout, layout.wavelength);
  model.t_hms = Eigen::VectorXcd::Ones(layout.n_cells());
  model.t_loss = t_loss;
  return model;
}

Eigen::MatrixXcd rwd_combiner(const HmaModel& model) {
  if (model.t_hms.size() != model.p_hms.cols()) {
    throw std::invalid_argument("rwd_combiner: t_hms length must match columns of p_hms");
  }
  return std::sqrt(model.t_loss) * model.p_hms * model.t_hms.asDiagonal();
}

double power_conservation_gap(const Eigen::VectorXcd& t_hms,
                              const Eigen::VectorXd& p_in) {
  if (t_hms.size() != p_in.size()) {
    throw std::invalid_argument("power_conservation_gap: length mismatch");
  }
  double through = 0.0;
  double incident = 0.0;
  for (Eigen::Index n = 0; n < p_in.size(); ++n) {
    through += std::norm(t_hms[n]) * p_in[n];
    incident += p_in[n];
  }
  return through - incident;
}

}  // namespace hmasim
