// SPDX-License-Identifier: Apache-2.0
#include "fdbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fdbeam {

const char* sweep_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNone: return "none";
    case SweepVariable::kUlPower: return "ul-power";
    case SweepVariable::kDlPower: return "dl-power";
  }
  throw std::invalid_argument("sweep_name: unknown sweep variable");
}

std::optional<SweepVariable> parse_sweep(std::string_view name) {
  if (name == "none") return SweepVariable::kNone;
  if (name == "ul-power") return SweepVariable::kUlPower;
  if (name == "dl-power") return SweepVariable::kDlPower;
  return std::nullopt;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError(key + ": cannot parse '" + value + "' as a number");
  }
  return x;
}

long long parse_int(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError(key + ": cannot parse '" + value + "' as an integer");
  }
  return x;
}

std::uint64_t parse_uint64(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v.front() == '-' || end != v.c_str() + v.size()) {
    throw ConfigError(key + ": cannot parse '" + value + "' as an unsigned integer");
  }
  return x;
}

void apply_key(LoadedConfig& cfg, const std::string& key, const std::string& value) {
  ScenarioConfig& sc = cfg.scenario;
  SweepSpec& sw = cfg.sweep;
  if (key == "n_b") sc.n_b = int(parse_int(key, value));
  else if (key == "m_b") sc.m_b = int(parse_int(key, value));
  else if (key == "carrier_ghz") sc.carrier_ghz = parse_double(key, value);
  else if (key == "spacing_ratio") sc.spacing_ratio = parse_double(key, value);
  else if (key == "n_paths") sc.n_paths = int(parse_int(key, value));
  else if (key == "pathloss_db") sc.pathloss_db = parse_double(key, value);
  else if (key == "rician_db") sc.rician_db = parse_double(key, value);
  else if (key == "si_kappa_db") sc.si_kappa_db = parse_double(key, value);
  else if (key == "si_pathloss_db") sc.si_pathloss_db = parse_double(key, value);
  else if (key == "noise_dbm") sc.noise_dbm = parse_double(key, value);
  else if (key == "lambda_b_dbm") sc.lambda_b_dbm = parse_double(key, value);
  else if (key == "lambda_u_dbm") sc.lambda_u_dbm = parse_double(key, value);
  else if (key == "p_b_dbm") sc.p_b_dbm = parse_double(key, value);
  else if (key == "p_u_dbm") sc.p_u_dbm = parse_double(key, value);
  else if (key == "velocity_kmh") sc.velocity_kmh = parse_double(key, value);
  else if (key == "bs_distance_m") sc.bs_distance_m = parse_double(key, value);
  else if (key == "gain_correlation") sc.gain_correlation = parse_double(key, value);
  else if (key == "slots") sc.slots = int(parse_int(key, value));
  else if (key == "slot_duration_ms") sc.slot_duration_ms = parse_double(key, value);
  else if (key == "symbols_per_slot") sc.symbols_per_slot = int(parse_int(key, value));
  else if (key == "codebook_bits") sc.codebook_bits = int(parse_int(key, value));
  else if (key == "analog_taps") sc.analog_taps = int(parse_int(key, value));
  else if (key == "hd_training_fraction") sc.hd_training_fraction = parse_double(key, value);
  else if (key == "hd_update_snr_loss_db") sc.hd_update_snr_loss_db = parse_double(key, value);
  else if (key == "nmse_bs_db") sc.nmse_bs_db = parse_double(key, value);
  else if (key == "nmse_ue_db") sc.nmse_ue_db = parse_double(key, value);
  else if (key == "grid_step_rad") sc.grid_step_rad = parse_double(key, value);
  else if (key == "initial_doa_rad") {
    if (trim(value) == "random") {
      sc.initial_doa_rad = std::numeric_limits<double>::quiet_NaN();
    } else {
      sc.initial_doa_rad = parse_double(key, value);
    }
  } else if (key == "mode") {
    const auto m = parse_mode(trim(value));
    if (!m) throw ConfigError("mode: unknown mode '" + value + "'");
    sc.mode = *m;
  } else if (key == "sweep") {
    const auto v = parse_sweep(trim(value));
    if (!v) throw ConfigError("sweep: unknown sweep variable '" + value + "'");
    sw.variable = *v;
  } else if (key == "sweep_values") {
    sw.values = parse_value_list(value);
  } else if (key == "runs") {
    sw.runs = int(parse_int(key, value));
  } else if (key == "master_seed") {
    sw.master_seed = parse_uint64(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void append_double(std::string& s, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

// Shortest representation that still parses back to the identical double;
// used for the human-facing config text (CSV columns stay at full %.17g).
void append_double_shortest(std::string& s, double v) {
  if (!std::isfinite(v)) {
    append_double(s, v);
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

}  // namespace

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    values.push_back(parse_double("sweep_values", item));
  }
  if (values.empty()) throw ConfigError("sweep_values: empty list");
  return values;
}

void validate_sweep(const SweepSpec& sweep) {
  if (sweep.runs < 1) throw ConfigError("runs: must be >= 1");
  if (sweep.variable == SweepVariable::kNone) return;
  if (sweep.values.empty()) {
    throw ConfigError("sweep_values: required when a sweep is active");
  }
  for (size_t i = 0; i < sweep.values.size(); ++i) {
    if (!std::isfinite(sweep.values[i])) {
      throw ConfigError("sweep_values: values must be finite");
    }
    if (i > 0 && sweep.values[i] <= sweep.values[i - 1]) {
      throw ConfigError("sweep_values: values must be strictly ascending");
    }
  }
}

LoadedConfig parse_config_text(const std::string& text) {
  LoadedConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_key(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.scenario.validate();
  validate_sweep(cfg.sweep);
  return cfg;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path + ": read failure");
  return parse_config_text(buf.str());
}

std::string format_config(const LoadedConfig& cfg) {
  const ScenarioConfig& sc = cfg.scenario;
  std::string s;
  auto put_d = [&s](const char* key, double v) {
    s += key;
    s += " = ";
    append_double_shortest(s, v);
    s += '\n';
  };
  auto put_i = [&s](const char* key, long long v) {
    s += key;
    s += " = ";
    s += std::to_string(v);
    s += '\n';
  };
  put_i("n_b", sc.n_b);
  put_i("m_b", sc.m_b);
  put_d("carrier_ghz", sc.carrier_ghz);
  put_d("spacing_ratio", sc.spacing_ratio);
  put_i("n_paths", sc.n_paths);
  put_d("pathloss_db", sc.pathloss_db);
  put_d("rician_db", sc.rician_db);
  put_d("si_kappa_db", sc.si_kappa_db);
  put_d("si_pathloss_db", sc.si_pathloss_db);
  put_d("noise_dbm", sc.noise_dbm);
  put_d("lambda_b_dbm", sc.lambda_b_dbm);
  put_d("lambda_u_dbm", sc.lambda_u_dbm);
  put_d("p_b_dbm", sc.p_b_dbm);
  put_d("p_u_dbm", sc.p_u_dbm);
  put_d("velocity_kmh", sc.velocity_kmh);
  put_d("bs_distance_m", sc.bs_distance_m);
  put_d("gain_correlation", sc.gain_correlation);
  put_i("slots", sc.slots);
  put_d("slot_duration_ms", sc.slot_duration_ms);
  put_i("symbols_per_slot", sc.symbols_per_slot);
  put_i("codebook_bits", sc.codebook_bits);
  put_i("analog_taps", sc.analog_taps);
  put_d("hd_training_fraction", sc.hd_training_fraction);
  put_d("hd_update_snr_loss_db", sc.hd_update_snr_loss_db);
  put_d("nmse_bs_db", sc.nmse_bs_db);
  put_d("nmse_ue_db", sc.nmse_ue_db);
  put_d("grid_step_rad", sc.grid_step_rad);
  if (std::isnan(sc.initial_doa_rad)) {
    s += "initial_doa_rad = random\n";
  } else {
    put_d("initial_doa_rad", sc.initial_doa_rad);
  }
  s += "mode = ";
  s += mode_name(sc.mode);
  s += '\n';
  s += "sweep = ";
  s += sweep_name(cfg.sweep.variable);
  s += '\n';
  if (!cfg.sweep.values.empty()) {
    s += "sweep_values = ";
    for (size_t i = 0; i < cfg.sweep.values.size(); ++i) {
      if (i > 0) s += ',';
      append_double_shortest(s, cfg.sweep.values[i]);
    }
    s += '\n';
  }
  put_i("runs", cfg.sweep.runs);
  s += "master_seed = " + std::to_string(cfg.sweep.master_seed) + '\n';
  return s;
}

SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& sweep,
                      const std::vector<Mode>& modes, int workers, bool collect_traces) {
  base.validate();
  validate_sweep(sweep);
  if (modes.empty()) throw ConfigError("run_sweep: no modes selected");

  const std::vector<double> values =
      sweep.variable == SweepVariable::kNone ? std::vector<double>{0.0} : sweep.values;
  const size_t n_runs = size_t(sweep.runs);
  const size_t per_mode = values.size() * n_runs;
  const size_t n_tasks = modes.size() * per_mode;

  // Every (mode, value, run) task is independent; results land in a
  // pre-sized slot table so completion order cannot influence the output.
  std::vector<std::vector<SlotOutcome>> results(n_tasks);
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    for (;;) {
      const size_t task = next.fetch_add(1);
      if (task >= n_tasks || failed.load()) return;
      try {
        const size_t mi = task / per_mode;
        const size_t vi = (task % per_mode) / n_runs;
        const size_t run = task % n_runs;
        ScenarioConfig cfg = base;
        if (sweep.variable == SweepVariable::kUlPower) cfg.p_u_dbm = values[vi];
        if (sweep.variable == SweepVariable::kDlPower) cfg.p_b_dbm = values[vi];
        RunStreams streams = RunStreams::make(sweep.master_seed, std::uint64_t(run));
        results[task] = run_protocol(cfg, modes[mi], streams);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  size_t n_workers = workers <= 0 ? std::max(1u, std::thread::hardware_concurrency())
                                  : size_t(workers);
  n_workers = std::min(n_workers, n_tasks);
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult out;
  out.aggregates.reserve(modes.size() * values.size());
  for (size_t mi = 0; mi < modes.size(); ++mi) {
    for (size_t vi = 0; vi < values.size(); ++vi) {
      AggregateRow row;
      row.mode = modes[mi];
      row.variable = sweep.variable;
      row.sweep_value = sweep.variable == SweepVariable::kNone ? 0.0 : values[vi];
      row.runs = sweep.runs;
      double sq_sum = 0.0;
      double rate_sum = 0.0;
      size_t saturated = 0;
      size_t n_slots = 0;
      std::vector<double> per_run_mse;
      per_run_mse.reserve(n_runs);
      for (size_t run = 0; run < n_runs; ++run) {
        const std::vector<SlotOutcome>& slots = results[mi * per_mode + vi * n_runs + run];
        double run_sq = 0.0;
        for (const SlotOutcome& o : slots) {
          run_sq += o.doa_error * o.doa_error;
          rate_sum += o.effective_rate;
          saturated += o.saturated ? 1 : 0;
          ++n_slots;
        }
        per_run_mse.push_back(slots.empty() ? 0.0 : run_sq / double(slots.size()));
        sq_sum += run_sq;
      }
      row.doa_mse = n_slots ? sq_sum / double(n_slots) : 0.0;
      row.mean_effective_rate = n_slots ? rate_sum / double(n_slots) : 0.0;
      row.saturation_rate = n_slots ? double(saturated) / double(n_slots) : 0.0;
      std::sort(per_run_mse.begin(), per_run_mse.end());
      const size_t h = per_run_mse.size() / 2;
      row.doa_mse_median = per_run_mse.size() % 2 == 1
                               ? per_run_mse[h]
                               : 0.5 * (per_run_mse[h - 1] + per_run_mse[h]);
      out.aggregates.push_back(row);
    }
  }

  if (collect_traces) {
    out.trace_values = values;
    out.traces.resize(values.size());
    for (size_t vi = 0; vi < values.size(); ++vi) {
      std::vector<TraceRow>& rows = out.traces[vi];
      rows.reserve(modes.size() * n_runs * size_t(base.slots));
      for (size_t mi = 0; mi < modes.size(); ++mi) {
        for (size_t run = 0; run < n_runs; ++run) {
          for (const SlotOutcome& o : results[mi * per_mode + vi * n_runs + run]) {
            rows.push_back(TraceRow{modes[mi], int(run), o});
          }
        }
      }
    }
  }
  return out;
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError(path + ": cannot open for writing");
  const size_t written = std::fwrite(content.data(), 1, content.size(), f);
  const bool bad = written != content.size() || std::ferror(f);
  if (std::fclose(f) != 0 || bad) throw IoError(path + ": write failure");
}

}  // namespace

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path) {
  std::string s = "mode,sweep_variable,sweep_value,doa_mse_rad2,mean_effective_rate,"
                  "saturation_rate,runs\n";
  for (const AggregateRow& r : rows) {
    s += mode_name(r.mode);
    s += ',';
    s += sweep_name(r.variable);
    s += ',';
    append_double(s, r.sweep_value);
    s += ',';
    append_double(s, r.doa_mse);
    s += ',';
    append_double(s, r.mean_effective_rate);
    s += ',';
    append_double(s, r.saturation_rate);
    s += ',';
    s += std::to_string(r.runs);
    s += '\n';
  }
  write_text_file(path, s);
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
  std::string s = "mode,run,slot,theta_true_rad,theta_hat_rad,doa_error_rad,beam_index,"
                  "rate_estimated,rate_realized,effective_rate,residual_si_ue_mw,"
                  "saturated,doa_updated\n";
  for (const TraceRow& r : rows) {
    const SlotOutcome& o = r.outcome;
    s += mode_name(r.mode);
    s += ',';
    s += std::to_string(r.run);
    s += ',';
    s += std::to_string(o.slot);
    s += ',';
    append_double(s, o.theta_true);
    s += ',';
    append_double(s, o.theta_hat);
    s += ',';
    append_double(s, o.doa_error);
    s += ',';
    s += std::to_string(o.beam_index);
    s += ',';
    append_double(s, o.rate_estimated);
    s += ',';
    append_double(s, o.rate_realized);
    s += ',';
    append_double(s, o.effective_rate);
    s += ',';
    append_double(s, o.residual_si_ue_mw);
    s += ',';
    s += o.saturated ? '1' : '0';
    s += ',';
    s += o.doa_updated ? '1' : '0';
    s += '\n';
  }
  write_text_file(path, s);
}

std::string trace_filename(SweepVariable variable, double value) {
  if (variable == SweepVariable::kNone) return "trace.csv";
  char buf[64];
  std::snprintf(buf, sizeof buf, "trace_%g.csv", value);
  return buf;
}

}  // namespace fdbeam
