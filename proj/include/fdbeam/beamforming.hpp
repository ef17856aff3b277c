// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/types.hpp"

#include <vector>

namespace fdbeam {

/// Unit-norm DFT transmit codebook: 2^bits beams taken from the n_b-point
/// DFT matrix, beam k element n = exp(-j*2*pi*k*n/n_b)/sqrt(n_b).
struct Codebook {
  std::vector<CVec> beams;
  int bits = 0;
};

Codebook dft_codebook(Eigen::Index n_b, int bits);

/// Physical pointing angle of DFT beam `index`: asin of the sin-domain
/// position -index/(n_b*spacing_ratio) folded into [-1, 1).
double beam_boresight(int index, Eigen::Index n_b, double spacing_ratio);

/// Rank-one downlink channel approximation built from the estimated LoS
/// direction alone: the plain array response a(theta_hat). Callers that need
/// the downlink column convention conjugate it.
CVec approx_dl_channel(double theta_hat, Eigen::Index n_b, double spacing_ratio);

struct BeamSelection {
  int index = -1;
  CVec beam;
  double metric = 0.0;
  // All self-interference denominators were degenerate; the choice fell back
  // to plain beamforming gain.
  bool denominator_fallback = false;
};

// Self-interference projections below this are considered degenerate.
inline constexpr double kBeamDenominatorFloor = 1e-30;

/// Exhaustive codebook search maximizing beamforming gain |h^T v|^2.
BeamSelection select_beam(const CVec& h_hat, const Codebook& cb);

/// Exhaustive codebook search maximizing the self-interference-aware ratio
/// |h^T v|^2 / ||H_si v||^2. Falls back to the gain-only rule when every
/// beam's denominator is below kBeamDenominatorFloor.
BeamSelection select_beam(const CVec& h_hat, const CMat& si_hat, const Codebook& cb);

}  // namespace fdbeam
