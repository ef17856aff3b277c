// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/beamforming.hpp"

#include "fdbeam/numerics.hpp"

#include <stdexcept>

namespace fdbeam {

Codebook dft_codebook(Eigen::Index n_b, int bits) {
  if (n_b < 1) {
    throw std::invalid_argument("dft_codebook: antenna count must be positive");
  }
  if (bits < 0 || bits >= 63) {
    throw std::invalid_argument("dft_codebook: codebook bits out of range");
  }
  const Eigen::Index count = Eigen::Index(1) << bits;
  if (count > n_b) {
    throw std::invalid_argument("dft_codebook: 2^bits beams exceed the antenna count");
  }
  Codebook cb;
  cb.bits = bits;
  cb.beams.reserve(size_t(count));
  const double scale = 1.0 / std::sqrt(double(n_b));
  for (Eigen::Index k = 0; k < count; ++k) {
    CVec v(n_b);
    for (Eigen::Index n = 0; n < n_b; ++n) {
      v(n) = std::polar(scale, -2.0 * kPi * double(k) * double(n) / double(n_b));
    }
    cb.beams.push_back(std::move(v));
  }
  return cb;
}

double beam_boresight(int index, Eigen::Index n_b, double spacing_ratio) {
  if (n_b < 1 || spacing_ratio <= 0.0) {
    throw std::invalid_argument("beam_boresight: bad array geometry");
  }
  if (index < 0 || index >= n_b) {
    throw std::invalid_argument("beam_boresight: beam index out of range");
  }
  // DFT beam k compensates the downlink phase ramp at the sin-domain
  // position -k/(n_b*spacing_ratio), unique up to the grating period.
  const double period = 1.0 / spacing_ratio;
  double s = -double(index) / (double(n_b) * spacing_ratio);
  s -= period * std::floor(s / period + 0.5);
  if (s < -1.0 || s > 1.0) {
    throw std::invalid_argument("beam_boresight: beam points outside the visible region");
  }
  return std::asin(s);
}

CVec approx_dl_channel(double theta_hat, Eigen::Index n_b, double spacing_ratio) {
  return steering_vector(theta_hat, n_b, spacing_ratio);
}

namespace {

BeamSelection pick_by_gain(const CVec& h_hat, const Codebook& cb) {
  BeamSelection sel;
  for (size_t k = 0; k < cb.beams.size(); ++k) {
    const double gain = std::norm(h_hat.cwiseProduct(cb.beams[k]).sum());
    if (sel.index < 0 || gain > sel.metric) {
      sel.index = int(k);
      sel.metric = gain;
    }
  }
  sel.beam = cb.beams[size_t(sel.index)];
  return sel;
}

}  // namespace

BeamSelection select_beam(const CVec& h_hat, const Codebook& cb) {
  if (cb.beams.empty()) {
    throw std::invalid_argument("select_beam: codebook is empty");
  }
  if (h_hat.size() != cb.beams.front().size()) {
    throw std::invalid_argument("select_beam: channel length does not match codebook");
  }
  return pick_by_gain(h_hat, cb);
}

BeamSelection select_beam(const CVec& h_hat, const CMat& si_hat, const Codebook& cb) {
  if (cb.beams.empty()) {
    throw std::invalid_argument("select_beam: codebook is empty");
  }
  if (h_hat.size() != cb.beams.front().size() || si_hat.cols() != h_hat.size()) {
    throw std::invalid_argument("select_beam: dimension mismatch");
  }

  // Degenerate self-interference (all projections ~0) carries no ranking
  // information; keep the decision well defined by reverting to pure gain.
  double max_denominator = 0.0;
  for (const CVec& v : cb.beams) {
    max_denominator = std::max(max_denominator, (si_hat * v).squaredNorm());
  }
  if (max_denominator < kBeamDenominatorFloor) {
    BeamSelection sel = pick_by_gain(h_hat, cb);
    sel.denominator_fallback = true;
    return sel;
  }

  BeamSelection sel;
  for (size_t k = 0; k < cb.beams.size(); ++k) {
    const CVec& v = cb.beams[k];
    const double num = std::norm(h_hat.cwiseProduct(v).sum());
    const double den = std::max((si_hat * v).squaredNorm(), kBeamDenominatorFloor);
    const double ratio = num / den;
    if (sel.index < 0 || ratio > sel.metric) {
      sel.index = int(k);
      sel.metric = ratio;
    }
  }
  sel.beam = cb.beams[size_t(sel.index)];
  return sel;
}

}  // namespace fdbeam
