// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/types.hpp"

#include <vector>

namespace fdbeam {

/// Receive-chain saturation thresholds in mW.
struct SaturationSpec {
  double lambda_b_mw = 0.0;  // per BS receive chain
  double lambda_u_mw = 0.0;  // UE receive chain
};

/// Analog + digital cancellation taps for one slot. Analog taps act before
/// the receiver front end and are the ones that must keep every chain below
/// its saturation threshold; digital taps clean up the remainder.
struct CancellerState {
  CVec analog_bs;        // c_b, length M_b, zero beyond active_taps
  CVec digital_bs;       // d_b, length M_b
  Complex analog_ue{0.0, 0.0};
  Complex digital_ue{0.0, 0.0};
  int active_taps = 0;
  bool feasible = false;
};

/// Adds i.i.d. CN(0, nmse * mean|entry|^2) estimation error to a channel.
/// nmse_db = -inf returns the exact channel.
CMat estimate_with_error(const CMat& true_value, double nmse_db, Rng& rng);
Complex estimate_with_error(Complex true_value, double nmse_db, Rng& rng);

/// Per-chain saturation test: flag j is true iff
/// p_tx * |(h_si * v + c)_j|^2 <= lambda_mw (inclusive).
std::vector<bool> verify_saturation(const CMat& h_si, const CVec& v, const CVec& c,
                                    double p_tx_mw, double lambda_mw);

/// Joint analog/digital canceller design for one slot. Analog BS taps are
/// grown one at a time (c_b = -[(H v)_1..n; 0]) until every chain passes the
/// saturation test, with a full-vector fallback when max_taps covers the
/// whole array; the UE side always takes the single tap c_u = -h_uu. Digital
/// taps remove whatever the analog stage left: d_b = -(H v + c_b), d_u = 0.
/// feasible = false (all taps zeroed) when no configuration passes.
CancellerState design_cancellers(const CMat& si_bs_hat, Complex si_ue_hat, const CVec& v,
                                 double p_b_mw, double p_u_mw, const SaturationSpec& sat,
                                 int max_taps);

/// Residual UE self-interference power p_u * |h_uu + c_u + d_u|^2 in mW.
double residual_si_power_ue(Complex si_ue_true, Complex c_u, Complex d_u, double p_u_mw);

}  // namespace fdbeam
