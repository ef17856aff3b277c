// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/cancellation.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdbeam {

namespace {

bool all_pass(const std::vector<bool>& flags) {
  return std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
}

double nmse_variance(double nmse_db, double mean_square) {
  if (std::isinf(nmse_db) && nmse_db < 0.0) return 0.0;
  return db_to_linear(nmse_db) * mean_square;
}

}  // namespace

CMat estimate_with_error(const CMat& true_value, double nmse_db, Rng& rng) {
  const double variance =
      nmse_variance(nmse_db, true_value.squaredNorm() / double(true_value.size()));
  if (variance == 0.0) return true_value;
  CMat estimate = true_value;
  for (Eigen::Index i = 0; i < estimate.rows(); ++i) {
    for (Eigen::Index k = 0; k < estimate.cols(); ++k) {
      estimate(i, k) += rng.complex_gaussian(variance);
    }
  }
  return estimate;
}

Complex estimate_with_error(Complex true_value, double nmse_db, Rng& rng) {
  const double variance = nmse_variance(nmse_db, std::norm(true_value));
  if (variance == 0.0) return true_value;
  return true_value + rng.complex_gaussian(variance);
}

std::vector<bool> verify_saturation(const CMat& h_si, const CVec& v, const CVec& c,
                                    double p_tx_mw, double lambda_mw) {
  if (h_si.cols() != v.size() || h_si.rows() != c.size()) {
    throw std::invalid_argument("verify_saturation: dimension mismatch");
  }
  if (p_tx_mw < 0.0 || lambda_mw <= 0.0) {
    throw std::invalid_argument("verify_saturation: powers must be positive");
  }
  const CVec residual = h_si * v + c;
  std::vector<bool> flags(size_t(residual.size()));
  for (Eigen::Index j = 0; j < residual.size(); ++j) {
    flags[size_t(j)] = p_tx_mw * std::norm(residual(j)) <= lambda_mw;
  }
  return flags;
}

CancellerState design_cancellers(const CMat& si_bs_hat, Complex si_ue_hat, const CVec& v,
                                 double p_b_mw, double p_u_mw, const SaturationSpec& sat,
                                 int max_taps) {
  if (si_bs_hat.cols() != v.size()) {
    throw std::invalid_argument("design_cancellers: beam length mismatch");
  }
  if (max_taps < 1) {
    throw std::invalid_argument("design_cancellers: need at least one analog tap");
  }
  if (p_b_mw < 0.0 || p_u_mw < 0.0 || sat.lambda_b_mw <= 0.0 || sat.lambda_u_mw <= 0.0) {
    throw std::invalid_argument("design_cancellers: powers and thresholds must be positive");
  }
  const Eigen::Index m = si_bs_hat.rows();
  const CVec coupled = si_bs_hat * v;  // per-chain response the taps must tame

  CancellerState st;
  st.analog_bs = CVec::Zero(m);
  st.digital_bs = CVec::Zero(m);

  // The UE analog tap c_u = -h_uu_hat nulls the estimated coupling exactly,
  // so its saturation check p_u * |h_uu_hat + c_u|^2 <= lambda_u always
  // passes; feasibility hinges on the BS side alone.
  auto finalize = [&](const CVec& c, int taps) {
    st.analog_bs = c;
    st.digital_bs = -(coupled + c);
    st.analog_ue = -si_ue_hat;
    st.digital_ue = Complex(0.0, 0.0);
    st.active_taps = taps;
    st.feasible = true;
    return true;
  };

  // Prefer the cheapest analog configuration: cancel the first n chains
  // outright and leave the rest untouched.
  const Eigen::Index partial_limit = std::min(Eigen::Index(max_taps), m - 1);
  for (Eigen::Index n = 1; n <= partial_limit; ++n) {
    CVec c = CVec::Zero(m);
    c.head(n) = -coupled.head(n);
    if (all_pass(verify_saturation(si_bs_hat, v, c, p_b_mw, sat.lambda_b_mw)) &&
        finalize(c, int(n))) {
      return st;
    }
  }
  if (Eigen::Index(max_taps) >= m) {
    const CVec c = -coupled;
    if (all_pass(verify_saturation(si_bs_hat, v, c, p_b_mw, sat.lambda_b_mw)) &&
        finalize(c, int(m))) {
      return st;
    }
  }

  st.analog_bs = CVec::Zero(m);
  st.digital_bs = CVec::Zero(m);
  st.analog_ue = Complex(0.0, 0.0);
  st.digital_ue = Complex(0.0, 0.0);
  st.active_taps = 0;
  st.feasible = false;
  return st;
}

double residual_si_power_ue(Complex si_ue_true, Complex c_u, Complex d_u, double p_u_mw) {
  return p_u_mw * std::norm(si_ue_true + c_u + d_u);
}

}  // namespace fdbeam
