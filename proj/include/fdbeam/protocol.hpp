// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/cancellation.hpp"
#include "fdbeam/channel.hpp"
#include "fdbeam/doa.hpp"
#include "fdbeam/types.hpp"

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdbeam {

/// Transmission protocols under comparison. fd-sddt estimates direction from
/// full-slot uplink data while transmitting downlink data simultaneously;
/// the three half-duplex baselines differ only in when they spend uplink
/// pilot time.
enum class Mode {
  kFdSddt,
  kHdInitial,
  kHdEachSlot,
  kHdUpdate,
};

const char* mode_name(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);
std::vector<Mode> all_modes();

/// Full scenario description. Distances/powers keep their configuration
/// units here; conversion to linear scale happens where values are used.
struct ScenarioConfig {
  int n_b = 64;  // BS transmit antennas
  int m_b = 2;   // BS receive chains
  double carrier_ghz = 28.0;
  double spacing_ratio = 0.5;

  int n_paths = 5;             // LoS plus n_paths - 1 scatterers
  double pathloss_db = 100.0;  // UL/DL link pathloss
  double rician_db = 25.0;     // LoS over total nLoS power
  double si_kappa_db = 35.0;   // self-interference Rician factor
  double si_pathloss_db = 40.0;

  double noise_dbm = -100.0;
  double lambda_b_dbm = -40.0;  // BS chain saturation threshold
  double lambda_u_dbm = -40.0;  // UE saturation threshold
  double p_b_dbm = 30.0;        // BS transmit power
  double p_u_dbm = 10.0;        // UE transmit power

  double velocity_kmh = 120.0;
  double bs_distance_m = 100.0;
  double gain_correlation = 0.995;

  int slots = 100;
  double slot_duration_ms = 10.0;
  int symbols_per_slot = 400;

  int codebook_bits = 6;
  int analog_taps = 2;
  double hd_training_fraction = 0.1;
  double hd_update_snr_loss_db = 3.0;

  // Self-interference channel estimation quality; -inf means exact.
  double nmse_bs_db = -std::numeric_limits<double>::infinity();
  double nmse_ue_db = -std::numeric_limits<double>::infinity();

  double grid_step_rad = 1e-3;
  // NaN draws the initial LoS direction uniformly; a finite value pins it.
  double initial_doa_rad = std::numeric_limits<double>::quiet_NaN();

  Mode mode = Mode::kFdSddt;

  MobilityModel mobility() const;
  double noise_mw() const { return dbm_to_mw(noise_dbm); }
  double p_b_mw() const { return dbm_to_mw(p_b_dbm); }
  double p_u_mw() const { return dbm_to_mw(p_u_dbm); }
  SaturationSpec saturation() const {
    return {dbm_to_mw(lambda_b_dbm), dbm_to_mw(lambda_u_dbm)};
  }
  /// Pilot symbols of a half-duplex training slot.
  int hd_training_symbols() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Everything recorded about one slot of one run.
struct SlotOutcome {
  int slot = 0;
  double theta_true = 0.0;
  double theta_hat = 0.0;   // estimate in effect at the end of the slot
  double doa_error = 0.0;   // |wrapped difference|
  int beam_index = -1;      // -1 when the slot carried no downlink data
  double rate_estimated = 0.0;  // b/s/Hz under the rank-one channel model
  double rate_realized = 0.0;   // b/s/Hz under the true channel
  double effective_rate = 0.0;  // realized rate scaled by the data fraction
  double residual_si_ue_mw = 0.0;
  bool saturated = false;   // no feasible canceller; downlink stayed silent
  bool doa_updated = false; // a fresh direction estimate was adopted
  // Bookkeeping not serialized to traces.
  int data_symbols = 0;
  double bs_residual_max_mw = 0.0;  // worst post-analog BS chain power (true channel)
};

/// The four independent randomness streams of one Monte Carlo run. Streams
/// depend only on (master_seed, run), never on mode or sweep point, so all
/// modes see common random numbers.
struct RunStreams {
  Rng channel;
  Rng noise;
  Rng data;
  Rng estimation;

  static RunStreams make(std::uint64_t master_seed, std::uint64_t run);
};

/// BS receive block for one slot: unit-power uplink pilots through h_ul,
/// optional residual downlink self-interference (per-symbol random QPSK-like
/// phasors through the post-cancellation coupling), and per-chain AWGN.
SnapshotBlock synthesize_bs_rx(const CVec& h_ul, const CMat& si_bs_true, const CVec& v,
                               const CancellerState& canc, double p_u_mw, double p_b_mw,
                               double noise_mw, int n_symbols, Rng& noise_rng,
                               Rng& data_rng, bool include_dl_interference);

/// Downlink spectral efficiency log2(1 + p_b |h^T v|^2 / (noise + residual)).
double dl_rate(const CVec& h_dl, const CVec& v, double p_b_mw, double noise_mw,
               double residual_si_mw);

std::vector<SlotOutcome> run_protocol(const ScenarioConfig& cfg, Mode mode, RunStreams& streams);

std::vector<SlotOutcome> run_fd_sddt(const ScenarioConfig& cfg, RunStreams& streams);
std::vector<SlotOutcome> run_hd_initial(const ScenarioConfig& cfg, RunStreams& streams);
std::vector<SlotOutcome> run_hd_each_slot(const ScenarioConfig& cfg, RunStreams& streams);
std::vector<SlotOutcome> run_hd_update(const ScenarioConfig& cfg, RunStreams& streams);

}  // namespace fdbeam
