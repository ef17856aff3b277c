// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fdbeam {

CVec steering_vector(double theta, Eigen::Index m, double spacing_ratio) {
  if (m < 1) {
    throw std::invalid_argument("steering_vector: element count must be positive");
  }
  if (spacing_ratio <= 0.0) {
    throw std::invalid_argument("steering_vector: spacing ratio must be positive");
  }
  const double phase_step = 2.0 * kPi * spacing_ratio * std::sin(theta);
  const double scale = 1.0 / std::sqrt(double(m));
  CVec a(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    a(k) = std::polar(scale, phase_step * double(k));
  }
  return a;
}

EigenDecomposition hermitian_eig(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("hermitian_eig: matrix must be square");
  }
  if ((a - a.adjoint()).norm() > 1e-8 * a.norm()) {
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMat> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigendecomposition failed to converge");
  }

  // Eigen returns ascending eigenvalues; re-order descending with a stable
  // sort so equal eigenvalues keep a reproducible column order.
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return solver.eigenvalues()(i) > solver.eigenvalues()(j);
  });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    out.eigenvalues(c) = solver.eigenvalues()(order[size_t(c)]);
    out.eigenvectors.col(c) = solver.eigenvectors().col(order[size_t(c)]);
    // Fix the arbitrary per-column phase: rotate so the first component of
    // non-negligible magnitude becomes real and non-negative.
    for (Eigen::Index r = 0; r < n; ++r) {
      const Complex x = out.eigenvectors(r, c);
      if (std::abs(x) > 1e-12) {
        out.eigenvectors.col(c) *= std::conj(x) / std::abs(x);
        break;
      }
    }
  }
  return out;
}

}  // namespace fdbeam
