// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/types.hpp"

namespace fdbeam {

/// Unit-norm response of an m-element uniform linear array towards angle
/// theta (radians, broadside = 0). spacing_ratio is element spacing over
/// wavelength. Element k carries phase 2*pi*spacing_ratio*k*sin(theta).
CVec steering_vector(double theta, Eigen::Index m, double spacing_ratio);

struct EigenDecomposition {
  RVec eigenvalues;   // sorted descending, ties keep solver order
  CMat eigenvectors;  // columns follow eigenvalue order, unit norm, first
                      // significant component made real non-negative
};

/// Hermitian eigendecomposition with a deterministic ordering and phase
/// convention so downstream subspace operations are reproducible bit for bit.
/// Throws std::invalid_argument for non-square or non-Hermitian input
/// (Frobenius asymmetry above 1e-8 relative).
EigenDecomposition hermitian_eig(const CMat& a);

}  // namespace fdbeam
