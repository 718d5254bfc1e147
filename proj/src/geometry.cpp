// SPDX-License-Identifier: Apache-2.0

#include "hmasim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmasim {

std::vector<Eigen::Vector3d> planar_grid(double aperture_z, double aperture_x,
                                         double pitch) {
  if (pitch <= 0.0 || aperture_z <= 0.0 || aperture_x <= 0.0) {
    throw std::invalid_argument("planar_grid: dimensions must be positive");
  }
  // Tolerance absorbs representation error in ratios like 4*lambda / (lambda/4).
  const int count_z = static_cast<int>(std::floor(aperture_z / pitch + 1e-9));
  const int count_x = static_cast<int>(std::floor(aperture_x / pitch + 1e-9));
  if (count_z < 1 || count_x < 1) {
    throw std::invalid_argument("planar_grid: aperture smaller than pitch");
  }
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<std::size_t>(count_z) * count_x);
  for (int iz = 0; iz < count_z; ++iz) {
    const double z = (iz - 0.5 * (count_z - 1)) * pitch;
    for (int ix = 0; ix < count_x; ++ix) {
      const double x = (ix - 0.5 * (count_x - 1)) * pitch;
      points.emplace_back(x, 0.0, z);
    }
  }
  return points;
}

ArrayLayout build_planar_layout(double aperture_z, double aperture_x,
                                double cell_pitch, int dpa_rows, int dpa_cols,
                                double d_sep, double wavelength) {
  if (aperture_z <= 0.0 || aperture_x <= 0.0 || cell_pitch <= 0.0 ||
      d_sep <= 0.0 || wavelength <= 0.0) {
    throw std::invalid_argument("build_planar_layout: invalid geometry");
  }
  if (aperture_z < cell_pitch || aperture_x < cell_pitch) {
    throw std::invalid_argument(
        "build_planar_layout: aperture must admit at least one unit-cell");
  }
  if (dpa_rows < 1 || dpa_cols < 1) {
    throw std::invalid_argument("build_planar_layout: need at least one DPA element");
  }

  ArrayLayout layout;
  layout.wavelength = wavelength;
  layout.d_sep = d_sep;
  layout.unit_cell_area = cell_pitch * cell_pitch;
  layout.dpa_elem_eff_area = 0.0026;  // patch element effective area, m^2
  layout.hms_positions = planar_grid(aperture_z, aperture_x, cell_pitch);
  if (static_cast<long long>(dpa_rows) * dpa_cols >
      static_cast<long long>(layout.hms_positions.size())) {
    throw std::invalid_argument(
        "build_planar_layout: more DPA elements than unit-cells");
  }

  const double dpa_pitch = 0.5 * wavelength;
  layout.dpa_positions.reserve(static_cast<std::size_t>(dpa_rows) * dpa_cols);
  for (int iz = 0; iz < dpa_rows; ++iz) {
    const double z = (iz - 0.5 * (dpa_rows - 1)) * dpa_pitch;
    for (int ix = 0; ix < dpa_cols; ++ix) {
      const double x = (ix - 0.5 * (dpa_cols - 1)) * dpa_pitch;
      layout.dpa_positions.emplace_back(x, -d_sep, z);
    }
  }
  return layout;
}

PairGeometry pair_geometry(const ArrayLayout& layout, int m, int n) {
  if (m < 0 || m >= layout.n_chains()) {
    throw std::out_of_range("pair_geometry: DPA index out of range");
  }
  if (n < 0 || n >= layout.n_cells()) {
    throw std::out_of_range("pair_geometry: unit-cell index out of range");
  }
  const Eigen::Vector3d disp = layout.hms_positions[n] - layout.dpa_positions[m];
  PairGeometry pg;
  pg.r = disp.norm();
  const double cos_theta = std::clamp(disp.z() / pg.r, -1.0, 1.0);
  pg.theta = std::acos(cos_theta);
  return pg;
}

}  // namespace hmasim
