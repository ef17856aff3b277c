// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/doa.hpp"

#include "fdbeam/numerics.hpp"

#include <stdexcept>

namespace fdbeam {

namespace {

// Shared spectrum core: denominators are the column norms of u_n^H * A,
// evaluated as one dense product.
RVec spectrum_values(const CMat& u_n, const CMat& steering) {
  const CMat projected = u_n.adjoint() * steering;
  RVec values(steering.cols());
  for (Eigen::Index g = 0; g < steering.cols(); ++g) {
    const double denom = projected.col(g).squaredNorm();
    values(g) = denom < kSpectrumFloor ? kSpectrumCap : 1.0 / denom;
  }
  return values;
}

MusicResult estimate_impl(const SnapshotBlock& block, const SteeringGrid& grid) {
  if (block.samples.rows() < 2) {
    throw std::invalid_argument("estimate_los_doa: need at least two receive chains");
  }
  if (block.samples.cols() < 1) {
    throw std::invalid_argument("estimate_los_doa: snapshot block is empty");
  }
  if (grid.steering.rows() != block.samples.rows()) {
    throw std::invalid_argument("estimate_los_doa: steering grid dimension mismatch");
  }

  const CMat r = sample_covariance(block.samples);
  const EigenDecomposition eig = hermitian_eig(r);
  const Eigen::Index m = r.rows();

  MusicResult res;
  res.signal_eigenvalue = eig.eigenvalues(0);
  res.noise_eigenvalues = eig.eigenvalues.tail(m - 1);
  // Multiplicative form of the separation test avoids dividing by a noise
  // eigenvalue that can be numerically zero in noiseless runs.
  res.low_confidence = res.signal_eigenvalue < kConfidenceRatio * res.noise_eigenvalues(0);

  const CMat u_n = eig.eigenvectors.rightCols(m - 1);
  const RVec values = spectrum_values(u_n, grid.steering);

  Eigen::Index best = 0;
  for (Eigen::Index g = 1; g < values.size(); ++g) {
    if (values(g) > values(best)) best = g;  // strict: ties keep the smaller angle
  }
  res.theta_hat = grid.angles(best);
  res.spectrum.reserve(size_t(values.size()));
  for (Eigen::Index g = 0; g < values.size(); ++g) {
    res.spectrum.emplace_back(grid.angles(g), values(g));
  }
  return res;
}

}  // namespace

RVec make_angle_grid(double step) {
  if (!(step > 0.0) || step > kPi) {
    throw std::invalid_argument("make_angle_grid: step must be in (0, pi]");
  }
  std::vector<double> angles;
  const double lo = -kPi / 2;
  const double hi = kPi / 2;
  for (Eigen::Index k = 0;; ++k) {
    const double a = lo + double(k) * step;
    if (a >= hi) break;
    angles.push_back(a);
  }
  angles.push_back(hi);
  return Eigen::Map<const RVec>(angles.data(), Eigen::Index(angles.size()));
}

SteeringGrid make_steering_grid(const RVec& angles, Eigen::Index m, double spacing_ratio) {
  SteeringGrid grid;
  grid.angles = angles;
  grid.steering.resize(m, angles.size());
  for (Eigen::Index g = 0; g < angles.size(); ++g) {
    grid.steering.col(g) = steering_vector(angles(g), m, spacing_ratio);
  }
  return grid;
}

CMat sample_covariance(const CMat& samples) {
  if (samples.cols() < 1) {
    throw std::invalid_argument("sample_covariance: need at least one snapshot");
  }
  return (samples * samples.adjoint()) / double(samples.cols());
}

CMat noise_subspace(const CMat& r, int num_sources) {
  if (num_sources < 1 || num_sources >= r.rows()) {
    throw std::invalid_argument("noise_subspace: source count must be in [1, m)");
  }
  const EigenDecomposition eig = hermitian_eig(r);
  return eig.eigenvectors.rightCols(r.rows() - num_sources);
}

std::vector<std::pair<double, double>> music_spectrum(const CMat& u_n, const RVec& grid,
                                                      double spacing_ratio) {
  const SteeringGrid sg = make_steering_grid(grid, u_n.rows(), spacing_ratio);
  const RVec values = spectrum_values(u_n, sg.steering);
  std::vector<std::pair<double, double>> out;
  out.reserve(size_t(grid.size()));
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    out.emplace_back(grid(g), values(g));
  }
  return out;
}

MusicResult estimate_los_doa(const SnapshotBlock& block, const SteeringGrid& grid) {
  return estimate_impl(block, grid);
}

MusicResult estimate_los_doa(const SnapshotBlock& block, const RVec& grid_angles,
                             double spacing_ratio) {
  const SteeringGrid grid =
      make_steering_grid(grid_angles, block.samples.rows(), spacing_ratio);
  return estimate_impl(block, grid);
}

}  // namespace fdbeam
