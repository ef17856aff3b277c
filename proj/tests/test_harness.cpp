// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fdbeam/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace fdbeam;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int comma_count(const std::string& line) {
  int n = 0;
  for (char c : line) n += (c == ',') ? 1 : 0;
  return n;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Small, fast campaign used by most aggregation tests.
ScenarioConfig tiny_scenario() {
  ScenarioConfig cfg;
  cfg.slots = 6;
  cfg.symbols_per_slot = 50;
  return cfg;
}

}  // namespace

TEST_CASE("empty configuration text yields the built-in defaults") {
  const LoadedConfig cfg = parse_config_text("");
  CHECK(cfg.scenario.n_b == 64);
  CHECK(cfg.scenario.m_b == 2);
  CHECK(cfg.scenario.slots == 100);
  CHECK(cfg.scenario.mode == Mode::kFdSddt);
  CHECK(std::isnan(cfg.scenario.initial_doa_rad));
  CHECK(cfg.sweep.variable == SweepVariable::kNone);
  CHECK(cfg.sweep.runs == 100);
  CHECK(cfg.sweep.master_seed == 1);
}

TEST_CASE("configuration errors carry the field name and line number") {
  CHECK_THROWS_WITH_AS(parse_config_text("slots = 0\n"), doctest::Contains("slots"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("bogus_key = 1\n"),
                       doctest::Contains("bogus_key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n_b = 32\nbogus_key = 1\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n_b 32\n"), doctest::Contains("line 1"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n_b = twelve\n"), doctest::Contains("n_b"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config_text("mode = simplex\n"), ConfigError);
}

TEST_CASE("comments, blank lines and spacing are accepted") {
  const LoadedConfig cfg = parse_config_text(
      "# campaign setup\n"
      "\n"
      "  n_b = 32   # antennas\n"
      "codebook_bits = 5\n"
      "mode=hd-initial\n"
      "initial_doa_rad = random\n"
      "sweep = ul-power\n"
      "sweep_values = 0,5,10\n"
      "runs = 7\n");
  CHECK(cfg.scenario.n_b == 32);
  CHECK(cfg.scenario.mode == Mode::kHdInitial);
  CHECK(std::isnan(cfg.scenario.initial_doa_rad));
  CHECK(cfg.sweep.variable == SweepVariable::kUlPower);
  CHECK(cfg.sweep.values == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(cfg.sweep.runs == 7);
}

TEST_CASE("format_config round-trips through the parser") {
  LoadedConfig cfg;
  cfg.scenario.n_b = 48;
  cfg.scenario.codebook_bits = 5;
  cfg.scenario.p_u_dbm = 12.5;
  cfg.scenario.gain_correlation = 0.97;
  cfg.scenario.mode = Mode::kHdUpdate;
  cfg.scenario.initial_doa_rad = -0.321;
  cfg.sweep.variable = SweepVariable::kDlPower;
  cfg.sweep.values = {0.0, 10.0, 20.5};
  cfg.sweep.runs = 11;
  cfg.sweep.master_seed = 42;

  const std::string text = format_config(cfg);
  const LoadedConfig parsed = parse_config_text(text);
  CHECK(parsed.scenario.n_b == 48);
  CHECK(parsed.scenario.p_u_dbm == 12.5);
  CHECK(parsed.scenario.gain_correlation == 0.97);
  CHECK(parsed.scenario.mode == Mode::kHdUpdate);
  CHECK(parsed.scenario.initial_doa_rad == -0.321);
  CHECK(parsed.sweep.variable == SweepVariable::kDlPower);
  CHECK(parsed.sweep.values == cfg.sweep.values);
  CHECK(parsed.sweep.runs == 11);
  CHECK(parsed.sweep.master_seed == 42);
  // Canonical form is a fixed point.
  CHECK(format_config(parsed) == text);

  // The 'random' spelling survives as well.
  LoadedConfig rnd;
  const std::string rnd_text = format_config(rnd);
  CHECK(rnd_text.find("initial_doa_rad = random") != std::string::npos);
  CHECK(format_config(parse_config_text(rnd_text)) == rnd_text);
}

TEST_CASE("value list parsing") {
  CHECK(parse_value_list("0,5,10") == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(parse_value_list("-3.5") == std::vector<double>{-3.5});
  CHECK_THROWS_AS(parse_value_list(""), ConfigError);
  CHECK_THROWS_AS(parse_value_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_value_list("1,x"), ConfigError);
}

TEST_CASE("sweep validation") {
  SweepSpec sw;
  CHECK_NOTHROW(validate_sweep(sw));
  sw.runs = 0;
  CHECK_THROWS_AS(validate_sweep(sw), ConfigError);
  sw.runs = 1;
  sw.variable = SweepVariable::kUlPower;
  CHECK_THROWS_AS(validate_sweep(sw), ConfigError);  // no values
  sw.values = {0.0, 5.0, 5.0};
  CHECK_THROWS_AS(validate_sweep(sw), ConfigError);  // not strictly ascending
  sw.values = {0.0, 5.0, 10.0};
  CHECK_NOTHROW(validate_sweep(sw));

  CHECK(parse_sweep("none") == SweepVariable::kNone);
  CHECK(parse_sweep("ul-power") == SweepVariable::kUlPower);
  CHECK(parse_sweep("dl-power") == SweepVariable::kDlPower);
  CHECK_FALSE(parse_sweep("frequency").has_value());
  CHECK(sweep_name(SweepVariable::kDlPower) == std::string("dl-power"));
}

TEST_CASE("load_config raises IoError for a missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/fdbeam.cfg"), IoError);
}

TEST_CASE("aggregates are the exact reduction of the traces") {
  const ScenarioConfig cfg = tiny_scenario();
  SweepSpec sw;
  sw.runs = 3;
  sw.master_seed = 21;
  const std::vector<Mode> modes{Mode::kFdSddt, Mode::kHdInitial};
  const SweepResult res = run_sweep(cfg, sw, modes, 1, true);
  REQUIRE(res.aggregates.size() == 2);
  REQUIRE(res.traces.size() == 1);
  REQUIRE(res.traces[0].size() == size_t(2 * 3 * cfg.slots));

  for (size_t mi = 0; mi < modes.size(); ++mi) {
    double sq = 0.0, rate = 0.0;
    int saturated = 0, n = 0;
    for (const TraceRow& r : res.traces[0]) {
      if (r.mode != modes[mi]) continue;
      sq += r.outcome.doa_error * r.outcome.doa_error;
      rate += r.outcome.effective_rate;
      saturated += r.outcome.saturated ? 1 : 0;
      ++n;
    }
    REQUIRE(n == 3 * cfg.slots);
    const AggregateRow& row = res.aggregates[mi];
    CHECK(row.mode == modes[mi]);
    CHECK(row.runs == 3);
    CHECK(row.doa_mse == doctest::Approx(sq / n).epsilon(1e-12));
    CHECK(row.mean_effective_rate == doctest::Approx(rate / n).epsilon(1e-12));
    CHECK(row.saturation_rate == doctest::Approx(double(saturated) / n).epsilon(1e-12));
  }
}

TEST_CASE("traces arrive ordered by mode, run and slot") {
  const ScenarioConfig cfg = tiny_scenario();
  SweepSpec sw;
  sw.runs = 2;
  sw.master_seed = 22;
  const std::vector<Mode> modes{Mode::kFdSddt, Mode::kHdEachSlot};
  const SweepResult res = run_sweep(cfg, sw, modes, 1, true);
  size_t idx = 0;
  for (Mode m : modes) {
    for (int run = 0; run < 2; ++run) {
      for (int slot = 0; slot < cfg.slots; ++slot) {
        const TraceRow& r = res.traces[0][idx++];
        CHECK(r.mode == m);
        CHECK(r.run == run);
        CHECK(r.outcome.slot == slot);
      }
    }
  }
}

TEST_CASE("adding runs leaves earlier runs untouched") {
  const ScenarioConfig cfg = tiny_scenario();
  SweepSpec one;
  one.runs = 1;
  one.master_seed = 23;
  SweepSpec three = one;
  three.runs = 3;
  const std::vector<Mode> modes{Mode::kFdSddt};
  const SweepResult small = run_sweep(cfg, one, modes, 1, true);
  const SweepResult big = run_sweep(cfg, three, modes, 1, true);
  REQUIRE(small.traces[0].size() == size_t(cfg.slots));
  for (size_t i = 0; i < small.traces[0].size(); ++i) {
    const SlotOutcome& a = small.traces[0][i].outcome;
    const SlotOutcome& b = big.traces[0][i].outcome;  // run 0 comes first
    CHECK(big.traces[0][i].run == 0);
    CHECK(a.theta_true == b.theta_true);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.rate_realized == b.rate_realized);
    CHECK(a.beam_index == b.beam_index);
  }
}

TEST_CASE("sweep points override the configured transmit power per axis") {
  ScenarioConfig cfg = tiny_scenario();
  cfg.slots = 3;
  SweepSpec sw;
  sw.variable = SweepVariable::kUlPower;
  sw.values = {0.0, 20.0};
  sw.runs = 2;
  sw.master_seed = 24;
  const SweepResult res = run_sweep(cfg, sw, {Mode::kFdSddt}, 1, true);
  REQUIRE(res.aggregates.size() == 2);
  CHECK(res.aggregates[0].sweep_value == 0.0);
  CHECK(res.aggregates[1].sweep_value == 20.0);
  CHECK(res.trace_values == std::vector<double>{0.0, 20.0});
  REQUIRE(res.traces.size() == 2);
  // More uplink pilot power cannot hurt the direction estimate on average.
  CHECK(res.aggregates[1].doa_mse <= res.aggregates[0].doa_mse);
}

TEST_CASE("direction error ordering: continuous estimation beats one-shot training") {
  ScenarioConfig cfg;
  cfg.slots = 60;
  // Pin the user away from endfire so the comparison probes the tracking
  // mechanism, not the heavy-tailed estimator behaviour near +-pi/2.
  cfg.initial_doa_rad = 0.2;
  SweepSpec sw;
  sw.runs = 12;
  sw.master_seed = 25;
  const SweepResult res =
      run_sweep(cfg, sw, {Mode::kFdSddt, Mode::kHdInitial}, 0, false);
  REQUIRE(res.aggregates.size() == 2);
  CHECK(res.aggregates[0].doa_mse < res.aggregates[1].doa_mse);
}

TEST_CASE("worker count does not change any result") {
  const ScenarioConfig cfg = tiny_scenario();
  SweepSpec sw;
  sw.variable = SweepVariable::kDlPower;
  sw.values = {10.0, 30.0};
  sw.runs = 3;
  sw.master_seed = 26;
  const std::vector<Mode> modes{Mode::kFdSddt, Mode::kHdUpdate};
  const SweepResult serial = run_sweep(cfg, sw, modes, 1, true);
  const SweepResult parallel = run_sweep(cfg, sw, modes, 8, true);
  REQUIRE(serial.aggregates.size() == parallel.aggregates.size());
  for (size_t i = 0; i < serial.aggregates.size(); ++i) {
    CHECK(serial.aggregates[i].doa_mse == parallel.aggregates[i].doa_mse);
    CHECK(serial.aggregates[i].mean_effective_rate ==
          parallel.aggregates[i].mean_effective_rate);
    CHECK(serial.aggregates[i].saturation_rate == parallel.aggregates[i].saturation_rate);
  }
  REQUIRE(serial.traces.size() == parallel.traces.size());
  for (size_t vi = 0; vi < serial.traces.size(); ++vi) {
    REQUIRE(serial.traces[vi].size() == parallel.traces[vi].size());
    for (size_t i = 0; i < serial.traces[vi].size(); ++i) {
      CHECK(serial.traces[vi][i].outcome.theta_hat ==
            parallel.traces[vi][i].outcome.theta_hat);
      CHECK(serial.traces[vi][i].outcome.rate_realized ==
            parallel.traces[vi][i].outcome.rate_realized);
    }
  }
}

TEST_CASE("csv files: headers, shapes and reproducibility") {
  const std::string agg_path = "test_agg.csv";
  const std::string trace_path = "test_trace.csv";

  write_aggregate_csv({}, agg_path);
  const std::string empty_agg = slurp(agg_path);
  CHECK(empty_agg ==
        "mode,sweep_variable,sweep_value,doa_mse_rad2,mean_effective_rate,"
        "saturation_rate,runs\n");

  write_trace_csv({}, trace_path);
  const auto empty_trace_lines = split_lines(slurp(trace_path));
  REQUIRE(empty_trace_lines.size() == 1);
  CHECK(comma_count(empty_trace_lines[0]) == 12);  // 13 columns

  const ScenarioConfig cfg = tiny_scenario();
  SweepSpec sw;
  sw.runs = 2;
  sw.master_seed = 27;
  const std::vector<Mode> modes{Mode::kFdSddt, Mode::kHdInitial};
  const SweepResult res = run_sweep(cfg, sw, modes, 1, true);

  write_aggregate_csv(res.aggregates, agg_path);
  const auto agg_lines = split_lines(slurp(agg_path));
  REQUIRE(agg_lines.size() == 1 + res.aggregates.size());
  for (const std::string& line : agg_lines) CHECK(comma_count(line) == 6);
  CHECK(agg_lines[1].rfind("fd-sddt,none,", 0) == 0);
  CHECK(agg_lines[2].rfind("hd-initial,none,", 0) == 0);

  write_trace_csv(res.traces[0], trace_path);
  const std::string first = slurp(trace_path);
  const auto trace_lines = split_lines(first);
  REQUIRE(trace_lines.size() == 1 + res.traces[0].size());
  for (const std::string& line : trace_lines) CHECK(comma_count(line) == 12);

  // Same campaign, same bytes.
  const SweepResult res2 = run_sweep(cfg, sw, modes, 4, true);
  write_trace_csv(res2.traces[0], trace_path);
  CHECK(slurp(trace_path) == first);

  std::remove(agg_path.c_str());
  std::remove(trace_path.c_str());
}

TEST_CASE("trace file naming") {
  CHECK(trace_filename(SweepVariable::kNone, 0.0) == "trace.csv");
  CHECK(trace_filename(SweepVariable::kUlPower, 5.0) == "trace_5.csv");
  CHECK(trace_filename(SweepVariable::kDlPower, 2.5) == "trace_2.5.csv");
  CHECK(trace_filename(SweepVariable::kUlPower, -10.0) == "trace_-10.csv");
}

TEST_CASE("run_sweep validates its campaign") {
  const ScenarioConfig cfg = tiny_scenario();
  SweepSpec sw;
  CHECK_THROWS_AS(run_sweep(cfg, sw, {}, 1, false), ConfigError);
  sw.runs = 0;
  CHECK_THROWS_AS(run_sweep(cfg, sw, {Mode::kFdSddt}, 1, false), ConfigError);
  ScenarioConfig bad = cfg;
  bad.slots = -1;
  SweepSpec ok;
  ok.runs = 1;
  CHECK_THROWS_AS(run_sweep(bad, ok, {Mode::kFdSddt}, 1, false), ConfigError);
}
