// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/channel.hpp"

#include "fdbeam/numerics.hpp"

#include <stdexcept>

namespace fdbeam {

namespace {

void check_mobility(const MobilityModel& m) {
  if (m.velocity_mps < 0.0) {
    throw std::invalid_argument("mobility: velocity must be non-negative");
  }
  if (m.slot_duration_s <= 0.0) {
    throw std::invalid_argument("mobility: slot duration must be positive");
  }
  if (m.bs_distance_m <= 0.0) {
    throw std::invalid_argument("mobility: BS distance must be positive");
  }
  if (m.gain_correlation < 0.0 || m.gain_correlation > 1.0) {
    throw std::invalid_argument("mobility: gain correlation must be in [0, 1]");
  }
}

// Splits the Rician factor into LoS / scattered amplitude weights; a +inf
// factor degenerates cleanly to (1, 0).
void rician_weights(double kappa_db, double& w_los, double& w_scatter) {
  if (std::isinf(kappa_db) && kappa_db > 0.0) {
    w_los = 1.0;
    w_scatter = 0.0;
    return;
  }
  const double kappa = db_to_linear(kappa_db);
  w_los = std::sqrt(kappa / (kappa + 1.0));
  w_scatter = std::sqrt(1.0 / (kappa + 1.0));
}

}  // namespace

double delta_theta(const MobilityModel& m) {
  check_mobility(m);
  return std::atan(m.velocity_mps * m.slot_duration_s / m.bs_distance_m);
}

PathSet draw_initial_paths(double pathloss_db, double rician_db, int n_nlos, Rng& rng) {
  if (n_nlos < 0) {
    throw std::invalid_argument("draw_initial_paths: nLoS path count must be non-negative");
  }
  PathSet p;
  p.los_power_ref = db_to_linear(-pathloss_db);
  p.nlos_power_total =
      (std::isinf(rician_db) && rician_db > 0.0) ? 0.0 : p.los_power_ref * db_to_linear(-rician_db);
  p.los_gain = std::sqrt(p.los_power_ref) * rng.unit_phasor();
  p.los_doa = rng.uniform(-kPi / 2, kPi / 2);
  p.nlos.resize(size_t(n_nlos));
  const double per_path = n_nlos > 0 ? p.nlos_power_total / n_nlos : 0.0;
  const double amplitude = std::sqrt(per_path);
  for (NlosPath& path : p.nlos) {
    path.gain = amplitude * rng.unit_phasor();
    path.doa = rng.uniform(-kPi / 2, kPi / 2);
  }
  return p;
}

PathSet evolve_paths(const PathSet& p, const MobilityModel& m, Rng& rng) {
  check_mobility(m);
  PathSet q = p;
  q.los_doa = fold_to_halfplane(p.los_doa + delta_theta(m));
  const double rho = m.gain_correlation;
  const Complex innovation = rng.complex_gaussian((1.0 - rho * rho) * p.los_power_ref);
  q.los_gain = rho * p.los_gain + innovation;
  const double per_path = p.nlos.empty() ? 0.0 : p.nlos_power_total / double(p.nlos.size());
  const double amplitude = std::sqrt(per_path);
  for (NlosPath& path : q.nlos) {
    path.gain = amplitude * rng.unit_phasor();
    path.doa = rng.uniform(-kPi / 2, kPi / 2);
  }
  return q;
}

CVec build_ul_channel(const PathSet& p, Eigen::Index m_b, double spacing_ratio) {
  CVec h = p.los_gain * steering_vector(p.los_doa, m_b, spacing_ratio);
  for (const NlosPath& path : p.nlos) {
    h += path.gain * steering_vector(path.doa, m_b, spacing_ratio);
  }
  return h;
}

CVec build_dl_channel(const PathSet& p, Eigen::Index n_b, double spacing_ratio) {
  CVec h = p.los_gain * steering_vector(p.los_doa, n_b, spacing_ratio).conjugate();
  for (const NlosPath& path : p.nlos) {
    h += path.gain * steering_vector(path.doa, n_b, spacing_ratio).conjugate();
  }
  return h;
}

CMat si_los_matrix(Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("si_los_matrix: dimensions must be positive");
  }
  const double denom = double(std::max(rows, cols));
  CMat h(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      h(i, k) = std::polar(1.0, kPi * double(i) * double(k) / denom);
    }
  }
  return h;
}

CMat draw_si_channel_bs(double kappa_db, double pathloss_db, Eigen::Index m_b,
                        Eigen::Index n_b, Rng& rng) {
  double w_los = 0.0;
  double w_scatter = 0.0;
  rician_weights(kappa_db, w_los, w_scatter);
  const double gain = std::pow(10.0, -pathloss_db / 20.0);
  CMat h = si_los_matrix(m_b, n_b);
  for (Eigen::Index i = 0; i < m_b; ++i) {
    for (Eigen::Index k = 0; k < n_b; ++k) {
      h(i, k) = gain * (w_los * h(i, k) + w_scatter * rng.complex_gaussian(1.0));
    }
  }
  return h;
}

Complex draw_si_channel_ue(double kappa_db, double pathloss_db, Rng& rng) {
  double w_los = 0.0;
  double w_scatter = 0.0;
  rician_weights(kappa_db, w_los, w_scatter);
  const double gain = std::pow(10.0, -pathloss_db / 20.0);
  return gain * (w_los + w_scatter * rng.complex_gaussian(1.0));
}

}  // namespace fdbeam
