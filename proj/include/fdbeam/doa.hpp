// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/types.hpp"

#include <utility>
#include <vector>

namespace fdbeam {

/// One slot of receive snapshots feeding direction estimation.
struct SnapshotBlock {
  CMat samples;            // M_b x L, one column per snapshot
  double noise_power = 0;  // per-chain noise power in mW (diagnostic only)
};

struct MusicResult {
  double theta_hat = 0.0;  // grid angle of the spectrum peak
  std::vector<std::pair<double, double>> spectrum;  // (angle, pseudo power)
  double signal_eigenvalue = 0.0;
  RVec noise_eigenvalues;  // descending
  // Set when the dominant eigenvalue fails to clear twice the largest noise
  // eigenvalue; the estimate is then unreliable and callers should prefer
  // their previous angle.
  bool low_confidence = false;
};

// Spectrum denominators under this floor are treated as an exact subspace
// hit and clipped to the corresponding cap.
inline constexpr double kSpectrumFloor = 1e-18;
inline constexpr double kSpectrumCap = 1e18;
inline constexpr double kConfidenceRatio = 2.0;

/// Uniform search grid over [-pi/2, pi/2] with the given step; the final
/// point pi/2 is always included.
RVec make_angle_grid(double step);

/// Array responses for every grid angle, precomputed once per scenario so
/// repeated spectrum evaluations reduce to one matrix product.
struct SteeringGrid {
  RVec angles;
  CMat steering;  // m x grid size, column g = a(angles[g])
};

SteeringGrid make_steering_grid(const RVec& angles, Eigen::Index m, double spacing_ratio);

/// Sample covariance (1/L) * Y * Y^H.
CMat sample_covariance(const CMat& samples);

/// Columns spanning the noise subspace: eigenvectors of r past the
/// num_sources largest eigenvalues (descending order).
CMat noise_subspace(const CMat& r, int num_sources);

/// Pseudo spectrum 1 / ||u_n^H a(theta)||^2 on the grid.
std::vector<std::pair<double, double>> music_spectrum(const CMat& u_n, const RVec& grid,
                                                      double spacing_ratio);

/// Single-source subspace direction estimate from one snapshot block. Peak
/// ties resolve to the smallest angle; the low_confidence flag marks slots
/// where signal and noise eigenvalues are not separated enough to trust the
/// result.
MusicResult estimate_los_doa(const SnapshotBlock& block, const SteeringGrid& grid);
MusicResult estimate_los_doa(const SnapshotBlock& block, const RVec& grid_angles,
                             double spacing_ratio);

}  // namespace fdbeam
