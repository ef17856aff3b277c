// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/types.hpp"

#include <vector>

namespace fdbeam {

struct NlosPath {
  Complex gain;
  double doa = 0.0;  // radians in [-pi/2, pi/2]
};

/// Geometric multipath state shared by the uplink and downlink directions.
/// The line-of-sight component is tracked over time; non-line-of-sight
/// scatterers are redrawn every slot.
struct PathSet {
  Complex los_gain;
  double los_doa = 0.0;
  std::vector<NlosPath> nlos;
  // Power budget captured at generation time. The LoS reference drives the
  // Gauss-Markov innovation variance; the nLoS total is re-split on redraws.
  double los_power_ref = 0.0;
  double nlos_power_total = 0.0;
};

struct MobilityModel {
  double velocity_mps = 0.0;      // >= 0
  double slot_duration_s = 0.0;   // > 0
  double bs_distance_m = 0.0;     // > 0
  double gain_correlation = 1.0;  // rho in [0, 1]
};

/// All channel quantities of one slot, drawn together for stream parity
/// across transmission modes.
struct ChannelRealization {
  CVec ul;      // BS receive channel, length M_b
  CVec dl;      // column vector c with downlink row channel c^T, length N_b
  CMat si_bs;   // BS TX -> BS RX self-interference, M_b x N_b
  Complex si_ue;  // UE TX -> UE RX self-interference
};

/// Per-slot line-of-sight angle increment arctan(v*T_s / d).
double delta_theta(const MobilityModel& m);

/// Draws a fresh path set: LoS power 10^(-pathloss_db/10) split against
/// n_nlos equal-power scatterers that together sit rician_db below the LoS.
/// All angles are uniform on [-pi/2, pi/2], all gain phases uniform.
PathSet draw_initial_paths(double pathloss_db, double rician_db, int n_nlos, Rng& rng);

/// One-slot evolution: LoS angle advances by delta_theta (folded back into
/// the observable half plane), LoS gain follows a Gauss-Markov recursion
/// with innovation variance (1 - rho^2) times the LoS reference power, and
/// every nLoS path is redrawn independently.
PathSet evolve_paths(const PathSet& p, const MobilityModel& m, Rng& rng);

/// Uplink array channel sum_p gain_p * a(theta_p).
CVec build_ul_channel(const PathSet& p, Eigen::Index m_b, double spacing_ratio);

/// Downlink channel column; the physical row channel is its transpose, so
/// each path contributes gain_p * conj(a(theta_p)).
CVec build_dl_channel(const PathSet& p, Eigen::Index n_b, double spacing_ratio);

/// Deterministic near-field line-of-sight coupling matrix with entries
/// exp(j*pi*i*k / max(rows, cols)), zero-based indices.
CMat si_los_matrix(Eigen::Index rows, Eigen::Index cols);

/// Rician self-interference draw g*(sqrt(kappa/(kappa+1))*H_los +
/// sqrt(1/(kappa+1))*H_w) with g = 10^(-pathloss_db/20) and H_w i.i.d.
/// CN(0,1). kappa_db = +inf collapses to the pure LoS matrix.
CMat draw_si_channel_bs(double kappa_db, double pathloss_db, Eigen::Index m_b,
                        Eigen::Index n_b, Rng& rng);

/// Scalar UE-side counterpart of draw_si_channel_bs (LoS component 1).
Complex draw_si_channel_ue(double kappa_db, double pathloss_db, Rng& rng);

}  // namespace fdbeam
