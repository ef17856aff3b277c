// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/protocol.hpp"

#include "fdbeam/beamforming.hpp"
#include "fdbeam/errors.hpp"
#include "fdbeam/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace fdbeam {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kFdSddt: return "fd-sddt";
    case Mode::kHdInitial: return "hd-initial";
    case Mode::kHdEachSlot: return "hd-each-slot";
    case Mode::kHdUpdate: return "hd-update";
  }
  throw std::invalid_argument("mode_name: unknown mode");
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "fd-sddt") return Mode::kFdSddt;
  if (name == "hd-initial") return Mode::kHdInitial;
  if (name == "hd-each-slot") return Mode::kHdEachSlot;
  if (name == "hd-update") return Mode::kHdUpdate;
  return std::nullopt;
}

std::vector<Mode> all_modes() {
  return {Mode::kFdSddt, Mode::kHdInitial, Mode::kHdEachSlot, Mode::kHdUpdate};
}

MobilityModel ScenarioConfig::mobility() const {
  MobilityModel m;
  m.velocity_mps = velocity_kmh / 3.6;
  m.slot_duration_s = slot_duration_ms / 1000.0;
  m.bs_distance_m = bs_distance_m;
  m.gain_correlation = gain_correlation;
  return m;
}

int ScenarioConfig::hd_training_symbols() const {
  return int(std::lround(hd_training_fraction * symbols_per_slot));
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (n_b < 1) fail("n_b: transmit antenna count must be >= 1");
  if (m_b < 2) fail("m_b: need at least 2 receive chains for subspace estimation");
  if (carrier_ghz <= 0.0) fail("carrier_ghz: must be positive");
  if (spacing_ratio <= 0.0) fail("spacing_ratio: must be positive");
  if (n_paths < 1) fail("n_paths: need at least the LoS path");
  if (!std::isfinite(pathloss_db)) fail("pathloss_db: must be finite");
  if (std::isnan(rician_db) || (std::isinf(rician_db) && rician_db < 0.0))
    fail("rician_db: must be finite or +inf");
  if (std::isnan(si_kappa_db) || (std::isinf(si_kappa_db) && si_kappa_db < 0.0))
    fail("si_kappa_db: must be finite or +inf");
  if (!std::isfinite(si_pathloss_db)) fail("si_pathloss_db: must be finite");
  if (!std::isfinite(noise_dbm)) fail("noise_dbm: must be finite");
  if (!std::isfinite(lambda_b_dbm)) fail("lambda_b_dbm: must be finite");
  if (!std::isfinite(lambda_u_dbm)) fail("lambda_u_dbm: must be finite");
  if (!std::isfinite(p_b_dbm)) fail("p_b_dbm: must be finite");
  if (!std::isfinite(p_u_dbm)) fail("p_u_dbm: must be finite");
  if (velocity_kmh < 0.0) fail("velocity_kmh: must be non-negative");
  if (bs_distance_m <= 0.0) fail("bs_distance_m: must be positive");
  if (gain_correlation < 0.0 || gain_correlation > 1.0)
    fail("gain_correlation: must be in [0, 1]");
  if (slots < 1) fail("slots: must be >= 1");
  if (slot_duration_ms <= 0.0) fail("slot_duration_ms: must be positive");
  if (symbols_per_slot < 2) fail("symbols_per_slot: must be >= 2");
  if (codebook_bits < 0 || codebook_bits >= 31) fail("codebook_bits: out of range");
  if ((Eigen::Index(1) << codebook_bits) > n_b)
    fail("codebook_bits: 2^bits beams exceed n_b");
  if (analog_taps < 1) fail("analog_taps: must be >= 1");
  if (!(hd_training_fraction > 0.0) || !(hd_training_fraction < 1.0))
    fail("hd_training_fraction: must be in (0, 1)");
  const int n_train = hd_training_symbols();
  if (n_train < 1 || n_train > symbols_per_slot - 1)
    fail("hd_training_fraction: leaves no room for pilots and data");
  if (!(hd_update_snr_loss_db > 0.0)) fail("hd_update_snr_loss_db: must be positive");
  if (std::isnan(nmse_bs_db) || (std::isinf(nmse_bs_db) && nmse_bs_db > 0.0))
    fail("nmse_bs_db: must be finite or -inf");
  if (std::isnan(nmse_ue_db) || (std::isinf(nmse_ue_db) && nmse_ue_db > 0.0))
    fail("nmse_ue_db: must be finite or -inf");
  if (!(grid_step_rad > 0.0) || grid_step_rad > kPi)
    fail("grid_step_rad: must be in (0, pi]");
  if (!std::isnan(initial_doa_rad) &&
      (initial_doa_rad < -kPi / 2 || initial_doa_rad > kPi / 2))
    fail("initial_doa_rad: must be in [-pi/2, pi/2] or 'random'");
}

RunStreams RunStreams::make(std::uint64_t master_seed, std::uint64_t run) {
  return RunStreams{Rng(master_seed, run, Rng::kChannel), Rng(master_seed, run, Rng::kNoise),
                    Rng(master_seed, run, Rng::kData), Rng(master_seed, run, Rng::kEstimation)};
}

SnapshotBlock synthesize_bs_rx(const CVec& h_ul, const CMat& si_bs_true, const CVec& v,
                               const CancellerState& canc, double p_u_mw, double p_b_mw,
                               double noise_mw, int n_symbols, Rng& noise_rng,
                               Rng& data_rng, bool include_dl_interference) {
  const Eigen::Index m = h_ul.size();
  if (m < 1) throw std::invalid_argument("synthesize_bs_rx: empty uplink channel");
  if (n_symbols < 1) throw std::invalid_argument("synthesize_bs_rx: need at least one symbol");
  if (p_u_mw < 0.0 || p_b_mw < 0.0 || noise_mw < 0.0)
    throw std::invalid_argument("synthesize_bs_rx: powers must be non-negative");

  // The uplink stream is unit-modulus; its symbol phases do not change the
  // snapshot covariance, so a constant symbol stands in for it. The downlink
  // stream is unknown data and must stay random per symbol.
  const CVec pilot = std::sqrt(p_u_mw) * h_ul;
  CVec coupled;
  if (include_dl_interference) {
    if (si_bs_true.rows() != m || si_bs_true.cols() != v.size() ||
        canc.analog_bs.size() != m || canc.digital_bs.size() != m) {
      throw std::invalid_argument("synthesize_bs_rx: self-interference dimension mismatch");
    }
    coupled = (si_bs_true * v + canc.analog_bs + canc.digital_bs) * std::sqrt(p_b_mw);
  }

  SnapshotBlock blk;
  blk.noise_power = noise_mw;
  blk.samples.resize(m, n_symbols);
  for (int t = 0; t < n_symbols; ++t) {
    CVec col = pilot;
    if (include_dl_interference) col += coupled * data_rng.unit_phasor();
    for (Eigen::Index i = 0; i < m; ++i) col(i) += noise_rng.complex_gaussian(noise_mw);
    blk.samples.col(t) = col;
  }
  return blk;
}

double dl_rate(const CVec& h_dl, const CVec& v, double p_b_mw, double noise_mw,
               double residual_si_mw) {
  if (h_dl.size() != v.size()) throw std::invalid_argument("dl_rate: dimension mismatch");
  if (noise_mw <= 0.0) throw std::invalid_argument("dl_rate: noise power must be positive");
  if (residual_si_mw < 0.0) throw std::invalid_argument("dl_rate: negative residual power");
  const double signal = p_b_mw * std::norm(h_dl.cwiseProduct(v).sum());
  return std::log2(1.0 + signal / (noise_mw + residual_si_mw));
}

namespace {

// Mutable state carried across slots of one run.
struct EngineState {
  double theta_hat = 0.0;
  bool have_estimate = false;
  BeamSelection sel;    // beam in service (half-duplex modes)
  CVec hcol_hat;        // rank-one downlink model behind sel
  double ref_sinr_db = 0.0;
  bool pending_update = false;
};

class SlotEngine {
 public:
  SlotEngine(const ScenarioConfig& cfg, Mode mode, RunStreams& streams)
      : cfg_(cfg),
        mode_(mode),
        streams_(streams),
        grid_(make_steering_grid(make_angle_grid(cfg.grid_step_rad), cfg.m_b,
                                 cfg.spacing_ratio)),
        codebook_(dft_codebook(cfg.n_b, cfg.codebook_bits)),
        mobility_(cfg.mobility()),
        noise_mw_(cfg.noise_mw()),
        p_b_mw_(cfg.p_b_mw()),
        p_u_mw_(cfg.p_u_mw()),
        saturation_(cfg.saturation()),
        n_train_(cfg.hd_training_symbols()) {}

  std::vector<SlotOutcome> run() {
    std::vector<SlotOutcome> outcomes;
    outcomes.reserve(size_t(cfg_.slots));
    for (int slot = 0; slot < cfg_.slots; ++slot) {
      advance_channel(slot);
      SlotOutcome o;
      o.slot = slot;
      o.theta_true = paths_.los_doa;
      switch (mode_) {
        case Mode::kFdSddt: fd_slot(slot, o); break;
        case Mode::kHdInitial: hd_initial_slot(slot, o); break;
        case Mode::kHdEachSlot: hd_each_slot(slot, o); break;
        case Mode::kHdUpdate: hd_update_slot(slot, o); break;
      }
      o.theta_hat = st_.theta_hat;
      o.doa_error = std::abs(wrap_pi(st_.theta_hat - o.theta_true));
      outcomes.push_back(o);
    }
    return outcomes;
  }

 private:
  void advance_channel(int slot) {
    if (slot == 0) {
      paths_ = draw_initial_paths(cfg_.pathloss_db, cfg_.rician_db, cfg_.n_paths - 1,
                                  streams_.channel);
      if (!std::isnan(cfg_.initial_doa_rad)) paths_.los_doa = cfg_.initial_doa_rad;
    } else {
      paths_ = evolve_paths(paths_, mobility_, streams_.channel);
    }
    ch_.ul = build_ul_channel(paths_, cfg_.m_b, cfg_.spacing_ratio);
    ch_.dl = build_dl_channel(paths_, cfg_.n_b, cfg_.spacing_ratio);
    // Self-interference is drawn every slot in every mode so the channel
    // stream stays aligned across modes (common random numbers).
    ch_.si_bs = draw_si_channel_bs(cfg_.si_kappa_db, cfg_.si_pathloss_db, cfg_.m_b,
                                   cfg_.n_b, streams_.channel);
    ch_.si_ue = draw_si_channel_ue(cfg_.si_kappa_db, cfg_.si_pathloss_db, streams_.channel);
  }

  MusicResult estimate(int n_symbols, const CVec& v, const CancellerState& canc,
                       bool include_dl) {
    const SnapshotBlock blk =
        synthesize_bs_rx(ch_.ul, ch_.si_bs, v, canc, p_u_mw_, p_b_mw_, noise_mw_,
                         n_symbols, streams_.noise, streams_.data, include_dl);
    return estimate_los_doa(blk, grid_);
  }

  // Adopts a fresh estimate unless the subspace separation was too weak to
  // trust it; the very first estimate is always adopted.
  void maybe_adopt(const MusicResult& mr, SlotOutcome& o) {
    if (!st_.have_estimate || !mr.low_confidence) {
      st_.theta_hat = mr.theta_hat;
      st_.have_estimate = true;
      o.doa_updated = true;
    }
  }

  CVec dl_column_model(double theta) const {
    return approx_dl_channel(theta, cfg_.n_b, cfg_.spacing_ratio).conjugate();
  }

  // Contract check: a canceller reported feasible must pass every saturation
  // constraint it was designed against.
  void assert_saturation_ok(const CMat& si_bs_hat, Complex si_ue_hat, const CVec& v,
                            const CancellerState& canc) const {
    const std::vector<bool> flags =
        verify_saturation(si_bs_hat, v, canc.analog_bs, p_b_mw_, saturation_.lambda_b_mw);
    for (bool ok : flags) {
      if (!ok) throw std::logic_error("protocol: feasible canceller violates BS saturation");
    }
    if (p_u_mw_ * std::norm(si_ue_hat + canc.analog_ue) > saturation_.lambda_u_mw) {
      throw std::logic_error("protocol: feasible canceller violates UE saturation");
    }
  }

  double realized_sinr(const CVec& v, double residual_mw) const {
    return p_b_mw_ * std::norm(ch_.dl.cwiseProduct(v).sum()) / (noise_mw_ + residual_mw);
  }

  void fill_rates(SlotOutcome& o, const CVec& hcol_model, const CVec& v,
                  double residual_mw, int data_symbols) {
    o.rate_realized = dl_rate(ch_.dl, v, p_b_mw_, noise_mw_, residual_mw);
    o.rate_estimated = dl_rate(hcol_model, v, p_b_mw_, noise_mw_, residual_mw);
    // Fraction first: full-data slots then carry exactly the realized rate.
    o.effective_rate =
        (double(data_symbols) / double(cfg_.symbols_per_slot)) * o.rate_realized;
    o.data_symbols = data_symbols;
  }

  void fd_slot(int slot, SlotOutcome& o) {
    if (slot == 0) {
      // Cold start: one clean full-slot uplink training pass, no downlink.
      maybe_adopt(estimate(cfg_.symbols_per_slot, CVec(), CancellerState{}, false), o);
      return;
    }
    // Beam and cancellers come from the previous slot's direction estimate;
    // this slot's own estimate forms while data flows.
    const CVec hcol = dl_column_model(st_.theta_hat);
    const CMat si_bs_hat = estimate_with_error(ch_.si_bs, cfg_.nmse_bs_db, streams_.estimation);
    const Complex si_ue_hat = estimate_with_error(ch_.si_ue, cfg_.nmse_ue_db, streams_.estimation);
    const BeamSelection sel = select_beam(hcol, si_bs_hat, codebook_);
    const CancellerState canc =
        design_cancellers(si_bs_hat, si_ue_hat, sel.beam, p_b_mw_, p_u_mw_, saturation_,
                          cfg_.analog_taps);
    o.beam_index = sel.index;
    if (!canc.feasible) {
      // Outage: the downlink stays silent to protect the receive chains, the
      // slot's estimation is skipped and the previous estimate carries over.
      o.saturated = true;
      return;
    }
    assert_saturation_ok(si_bs_hat, si_ue_hat, sel.beam, canc);
    maybe_adopt(estimate(cfg_.symbols_per_slot, sel.beam, canc, true), o);
    o.residual_si_ue_mw =
        residual_si_power_ue(ch_.si_ue, canc.analog_ue, canc.digital_ue, p_u_mw_);
    o.bs_residual_max_mw =
        p_b_mw_ * (ch_.si_bs * sel.beam + canc.analog_bs).cwiseAbs2().maxCoeff();
    fill_rates(o, hcol, sel.beam, o.residual_si_ue_mw, cfg_.symbols_per_slot);
  }

  void hd_initial_slot(int slot, SlotOutcome& o) {
    if (slot == 0) {
      maybe_adopt(estimate(n_train_, CVec(), CancellerState{}, false), o);
      st_.hcol_hat = dl_column_model(st_.theta_hat);
      st_.sel = select_beam(st_.hcol_hat, codebook_);
      o.beam_index = st_.sel.index;
      fill_rates(o, st_.hcol_hat, st_.sel.beam, 0.0, cfg_.symbols_per_slot - n_train_);
      return;
    }
    o.beam_index = st_.sel.index;
    fill_rates(o, st_.hcol_hat, st_.sel.beam, 0.0, cfg_.symbols_per_slot);
  }

  void hd_each_slot(int slot, SlotOutcome& o) {
    const MusicResult mr = estimate(n_train_, CVec(), CancellerState{}, false);
    // Processing delay: data in this slot rides on the previous slot's
    // estimate; the fresh one takes over from the next slot.
    const double beam_theta = st_.have_estimate ? st_.theta_hat : mr.theta_hat;
    maybe_adopt(mr, o);
    st_.hcol_hat = dl_column_model(beam_theta);
    st_.sel = select_beam(st_.hcol_hat, codebook_);
    o.beam_index = st_.sel.index;
    fill_rates(o, st_.hcol_hat, st_.sel.beam, 0.0, cfg_.symbols_per_slot - n_train_);
    (void)slot;
  }

  void hd_update_slot(int slot, SlotOutcome& o) {
    const bool estimate_now = (slot == 0) || st_.pending_update;
    int data_symbols = cfg_.symbols_per_slot;
    if (estimate_now) {
      maybe_adopt(estimate(n_train_, CVec(), CancellerState{}, false), o);
      st_.hcol_hat = dl_column_model(st_.theta_hat);
      st_.sel = select_beam(st_.hcol_hat, codebook_);
      st_.pending_update = false;
      data_symbols = cfg_.symbols_per_slot - n_train_;
    }
    o.beam_index = st_.sel.index;
    fill_rates(o, st_.hcol_hat, st_.sel.beam, 0.0, data_symbols);
    const double sinr_db = 10.0 * std::log10(realized_sinr(st_.sel.beam, 0.0));
    if (estimate_now) {
      st_.ref_sinr_db = sinr_db;  // fresh-beam reference for the loss trigger
    } else if (sinr_db < st_.ref_sinr_db - cfg_.hd_update_snr_loss_db) {
      st_.pending_update = true;  // re-estimate at the start of the next slot
    }
  }

  const ScenarioConfig& cfg_;
  Mode mode_;
  RunStreams& streams_;
  SteeringGrid grid_;
  Codebook codebook_;
  MobilityModel mobility_;
  double noise_mw_;
  double p_b_mw_;
  double p_u_mw_;
  SaturationSpec saturation_;
  int n_train_;

  PathSet paths_;
  ChannelRealization ch_;
  EngineState st_;
};

}  // namespace

std::vector<SlotOutcome> run_protocol(const ScenarioConfig& cfg, Mode mode,
                                      RunStreams& streams) {
  cfg.validate();
  SlotEngine engine(cfg, mode, streams);
  return engine.run();
}

std::vector<SlotOutcome> run_fd_sddt(const ScenarioConfig& cfg, RunStreams& streams) {
  return run_protocol(cfg, Mode::kFdSddt, streams);
}
std::vector<SlotOutcome> run_hd_initial(const ScenarioConfig& cfg, RunStreams& streams) {
  return run_protocol(cfg, Mode::kHdInitial, streams);
}
std::vector<SlotOutcome> run_hd_each_slot(const ScenarioConfig& cfg, RunStreams& streams) {
  return run_protocol(cfg, Mode::kHdEachSlot, streams);
}
std::vector<SlotOutcome> run_hd_update(const ScenarioConfig& cfg, RunStreams& streams) {
  return run_protocol(cfg, Mode::kHdUpdate, streams);
}

}  // namespace fdbeam
