// SPDX-License-Identifier: Apache-2.0
//
// Radiated-wave-domain model of a Huygens' metasurface antenna: the
// dipole-to-unit-cell propagation matrix, the per-cell transmission
// coefficients, and the insertion-loss-scaled composite combiner.

#pragma once

#include <Eigen/Dense>

#include "hmasim/geometry.hpp"

namespace hmasim {

// Amplitude of the propagation coefficient from a Hertzian dipole to an
// evaluation point at distance r and axial angle theta:
//   sqrt( (3*sqrt(2))/(8*pi) * sin(theta)^2 / r^2 ).
// The constant normalizes the radiated power over the half-sphere facing the
// surface. Throws std::domain_error for r <= 0.
double propagation_amplitude(double r, double theta);

// Phase change of the dipole electric field over distance r:
//   pi/2 - k0*r + arg(1 + 1/(j*k0*r) - 1/(k0*r)^2),
// wrapped to (-pi, pi]. Throws std::domain_error for r <= 0 or k <= 0.
double propagation_phase(double r, double wavenumber);

// Wraps an angle to (-pi, pi].
double wrap_phase(double angle);

// M x N propagation matrix; element (m, n) couples DPA element m to
// unit-cell n. Purely geometric, hence deterministic for a given layout.
Eigen::MatrixXcd build_p_hms(const ArrayLayout& layout, double wavelength);

// The HMS is abstracted as one complex transmission coefficient per
// unit-cell plus a single average power insertion-loss coefficient t_loss.
// Instances are immutable by convention: optimizers mutate copies of t_hms.
struct HmaModel {
  Eigen::MatrixXcd p_hms;   // M x N propagation matrix
  Eigen::VectorXcd t_hms;   // N transmission coefficients
  double t_loss = 0.7;      // average power transmission coefficient, (0, 1]
  ArrayLayout layout;
};

// Builds p_hms from the layout and initializes t_hms to all-ones.
HmaModel make_hma_model(const ArrayLayout& layout, double t_loss = 0.7);

// Complete radiated-wave-domain combiner sqrt(t_loss) * P * diag(t).
Eigen::MatrixXcd rwd_combiner(const HmaModel& model);

// Signed surplus of the global power-conservation rule:
//   sum_n |t_n|^2 p_in[n] - sum_n p_in[n].
// Feasible configurations give <= 0; the constraint is active at 0.
double power_conservation_gap(const Eigen::VectorXcd& t_hms,
                              const Eigen::VectorXd& p_in);

}  // namespace hmasim
