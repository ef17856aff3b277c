// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdbeam/errors.hpp"
#include "fdbeam/protocol.hpp"

#include <string>
#include <vector>

namespace fdbeam {

enum class SweepVariable { kNone, kUlPower, kDlPower };

const char* sweep_name(SweepVariable v);
std::optional<SweepVariable> parse_sweep(std::string_view name);

/// Monte Carlo campaign description: which scalar to sweep (UL or DL
/// transmit power in dBm), the grid, and the replication setup.
struct SweepSpec {
  SweepVariable variable = SweepVariable::kNone;
  std::vector<double> values;  // strictly ascending when a sweep is active
  int runs = 100;
  std::uint64_t master_seed = 1;
};

/// One aggregate CSV row: per (mode, sweep point) statistics over all runs
/// and slots.
struct AggregateRow {
  Mode mode = Mode::kFdSddt;
  SweepVariable variable = SweepVariable::kNone;
  double sweep_value = 0.0;
  double doa_mse = 0.0;         // mean squared direction error, rad^2
  double doa_mse_median = 0.0;  // median over runs of per-run MSE (not serialized)
  double mean_effective_rate = 0.0;
  double saturation_rate = 0.0;  // fraction of saturated slots
  int runs = 0;
};

struct TraceRow {
  Mode mode = Mode::kFdSddt;
  int run = 0;
  SlotOutcome outcome;
};

struct SweepResult {
  std::vector<AggregateRow> aggregates;  // ordered (mode, sweep value)
  // One trace group per sweep value (single group when no sweep is active),
  // rows ordered (mode, run, slot). Empty unless traces were requested.
  std::vector<double> trace_values;
  std::vector<std::vector<TraceRow>> traces;
};

struct LoadedConfig {
  ScenarioConfig scenario;
  SweepSpec sweep;
};

/// Parses `key = value` configuration text ('#' comments, blank lines
/// allowed) on top of the built-in defaults, then validates. Unknown keys
/// and malformed values raise ConfigError with the line number.
LoadedConfig parse_config_text(const std::string& text);

/// Reads and parses a configuration file; missing/unreadable file raises
/// IoError.
LoadedConfig load_config(const std::string& path);

/// Canonical re-parseable dump of a configuration (all keys, fixed order).
std::string format_config(const LoadedConfig& cfg);

/// Comma-separated doubles, e.g. "0,5,10".
std::vector<double> parse_value_list(const std::string& text);

void validate_sweep(const SweepSpec& sweep);

/// Runs the full campaign: every (mode, sweep value, run) task on a small
/// thread pool, then a sequential reduction so results are identical for any
/// worker count. workers <= 0 selects the hardware concurrency.
SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& sweep,
                      const std::vector<Mode>& modes, int workers, bool collect_traces);

/// CSV writers; floating point uses 17 significant digits so files
/// round-trip bit-exactly. Failures raise IoError.
void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path);
void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path);

/// "trace.csv" without a sweep, otherwise "trace_<value>.csv".
std::string trace_filename(SweepVariable variable, double value);

}  // namespace fdbeam
