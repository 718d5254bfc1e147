// SPDX-License-Identifier: Apache-2.0
//
// Planar array geometry: the metasurface unit-cell grid, the backing
// digital-phased-array grid, and the pairwise source/cell geometry that the
// electromagnetic and channel models consume.

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hmasim {

// Unit-cell centers lie on the z-x plane at y = 0; DPA element centers on a
// parallel plane at y = -d_sep. The dipole axis of every DPA element points
// along +z (any fixed in-plane axis is equivalent by symmetry).
//
// Immutable after construction; safe to share across concurrent workers.
struct ArrayLayout {
  std::vector<Eigen::Vector3d> hms_positions;  // N unit-cell centers, meters
  std::vector<Eigen::Vector3d> dpa_positions;  // M element centers, meters
  double unit_cell_area = 0.0;                 // A_UC, m^2
  double dpa_elem_eff_area = 0.0;              // effective area per DPA patch, m^2
  double wavelength = 0.0;                     // lambda_0, meters
  double d_sep = 0.0;                          // HMS-to-DPA plane separation, meters

  int n_cells() const { return static_cast<int>(hms_positions.size()); }
  int n_chains() const { return static_cast<int>(dpa_positions.size()); }
};

// r: Euclidean distance between DPA element m and unit-cell n.
// theta: angle between the dipole axis (+z) and the displacement vector from
// element m to cell n, in [0, pi].
struct PairGeometry {
  double r = 0.0;
  double theta = 0.0;
};

// Uniform grid of points on the z-x plane (y = 0), centered at the origin.
// count_z = floor(aperture_z / pitch), count_x likewise.
std::vector<Eigen::Vector3d> planar_grid(double aperture_z, double aperture_x,
                                         double pitch);

// Tiles the aperture with unit-cells at cell_pitch and places a
// dpa_rows x dpa_cols element grid at half-wavelength pitch a distance d_sep
// behind the surface, both centered on the same boresight axis.
ArrayLayout build_planar_layout(double aperture_z, double aperture_x,
                                double cell_pitch, int dpa_rows, int dpa_cols,
                                double d_sep, double wavelength);

PairGeometry pair_geometry(const ArrayLayout& layout, int m, int n);

}  // namespace hmasim
