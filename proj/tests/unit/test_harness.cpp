// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "isac/config.hpp"
#include "isac/errors.hpp"
#include "isac/experiment.hpp"
#include "isac/outputs.hpp"
#include "test_support.hpp"

namespace isac {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("isac_harness_" + name);
  fs::remove_all(p);
  return p;
}

/// The CI scenario cut down to a few frames and trials.
ScenarioConfig small_config(int frames = 3, int trials = 2) {
  auto cfg = fixtures::ci_config();
  cfg.num_frames = frames;
  cfg.trials = trials;
  return cfg;
}

std::optional<ErrorCode> parse_error_code(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

TEST(Config, ReferenceScenarioLoadsExpectedDimensions) {
  const auto cfg = fixtures::reference_config();
  EXPECT_EQ(cfg.waveform.num_bs_elements, 6);
  EXPECT_EQ(cfg.waveform.num_ris_elements, 64);
  EXPECT_EQ(cfg.num_users, 3);
  EXPECT_DOUBLE_EQ(cfg.frame_interval, 0.02);
  EXPECT_EQ(cfg.ris.size(), 2u);
  EXPECT_EQ(cfg.ris[0].position, Vec2(20.0, 40.0));
  EXPECT_EQ(cfg.ris[1].position, Vec2(45.0, 30.0));
  EXPECT_EQ(cfg.bs.position, Vec2::Zero());
  EXPECT_DOUBLE_EQ(cfg.waveform.subcarrier_spacing * cfg.waveform.num_subcarriers, 10e6);
}

TEST(Config, EmptyTextIsAParseError) {
  EXPECT_EQ(parse_error_code(""), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("{"), ErrorCode::ParseError);
}

TEST(Config, StrideOverflowNamesTheField) {
  auto text = config_to_json(fixtures::reference_config());
  const auto pos = text.find("\"subcarrier_stride\"");
  ASSERT_NE(pos, std::string::npos);
  const auto colon = text.find(':', pos);
  const auto end = text.find_first_of(",}", colon);
  text.replace(colon + 1, end - colon - 1, " 2");
  try {
    parse_config(text);
    FAIL() << "expected ValidationError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationError);
    EXPECT_NE(std::string(e.what()).find("waveform.subcarrier_stride"), std::string::npos);
  }
}

TEST(Config, UnknownKeyIsRejectedWithItsPath) {
  auto text = config_to_json(fixtures::reference_config());
  const auto pos = text.find("\"hvmp\"");
  ASSERT_NE(pos, std::string::npos);
  const auto brace = text.find('{', pos);
  text.insert(brace + 1, "\"dampnig\": 0.5,");
  try {
    parse_config(text);
    FAIL() << "expected ValidationError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationError);
    EXPECT_NE(std::string(e.what()).find("hvmp.dampnig"), std::string::npos);
  }
}

TEST(Config, CanonicalJsonRoundTrips) {
  const auto cfg = fixtures::reference_config();
  const auto text = config_to_json(cfg);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(Config, MissingFileIsAnIoError) {
  try {
    load_config("/nonexistent/isac.json");
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Seeds, TrialSeedsAreDistinctAndStable) {
  EXPECT_EQ(trial_seed(7, 3), trial_seed(7, 3));
  EXPECT_NE(trial_seed(7, 3), trial_seed(7, 4));
  EXPECT_NE(trial_seed(7, 3), trial_seed(8, 3));
}

TEST(Algorithms, Names) {
  EXPECT_EQ(parse_algorithm("pos-only"), Algorithm::PositionOnly);
  EXPECT_EQ(parse_algorithm("position_only"), Algorithm::PositionOnly);
  EXPECT_EQ(algorithm_name(Algorithm::Ekf), "ekf");
  EXPECT_EQ(parse_algorithm_list("hvmp,ekf,hvmp").size(), 2u);
  EXPECT_THROW(parse_algorithm("music"), Error);
}

TEST(Rounding, NineSignificantDigits) {
  EXPECT_EQ(round_sig9(0.1234567891234), 0.123456789);
  EXPECT_EQ(round_sig9(0.0), 0.0);
  EXPECT_EQ(format_number(round_sig9(1.0 / 3.0)), "0.333333333");
}

TEST(Experiment, DeterministicAcrossRunsAndWorkers) {
  const auto cfg = small_config();
  ExperimentOptions one;
  one.workers = 1;
  ExperimentOptions two;
  two.workers = 2;
  const auto a = run_experiment(cfg, one);
  const auto b = run_experiment(cfg, two);
  const auto da = scratch("det_a"), db = scratch("det_b");
  emit_outputs(a, da);
  emit_outputs(b, db);
  for (const char* f : {"metrics.csv", "summary.csv", "tracks.csv", "trajectories.csv", "truth.csv"}) {
    EXPECT_EQ(read_file(da / f), read_file(db / f)) << f;
  }
  fs::remove_all(da);
  fs::remove_all(db);
}

TEST(Experiment, AlgorithmsShareTheSynthesizedData) {
  const auto cfg = small_config();
  const auto ctx = cfg.context();
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.checksums.size(), 2u);
  for (const auto& c : r.checksums) {
    EXPECT_EQ(c.checksum, generate_trial(cfg, ctx, c.snr_db, c.trial).checksum);
  }
  std::map<std::tuple<std::string, int>, int> rows;
  for (const auto& m : r.metrics) ++rows[{m.algo, m.trial}];
  EXPECT_EQ(rows.size(), 6u);
  for (const auto& [key, n] : rows) EXPECT_EQ(n, cfg.num_frames);
}

TEST(Experiment, HvmpOnlyEmitsNoBaselineRows) {
  ExperimentOptions opts;
  opts.algorithms = {Algorithm::Hvmp};
  const auto r = run_experiment(small_config(2, 1), opts);
  ASSERT_FALSE(r.metrics.empty());
  for (const auto& m : r.metrics) EXPECT_EQ(m.algo, "hvmp");
  for (const auto& t : r.tracks) EXPECT_EQ(t.algo, "hvmp");
}

TEST(Experiment, NoiselessStaticUserStaysWithinTenCentimetres) {
  auto cfg = small_config(10, 3);
  cfg.num_users = 1;
  cfg.speeds = {0.0};
  cfg.accel_std = 0.0;
  cfg.snr_db = {200.0};
  ExperimentOptions opts;
  opts.algorithms = {Algorithm::Hvmp};
  const auto r = run_experiment(cfg, opts);
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.metrics.size(), 30u);
  for (const auto& m : r.metrics) EXPECT_LT(m.rmse_m, 0.1) << "trial " << m.trial << " frame " << m.frame;
}

TEST(Metrics, RmseMatchesRecomputationFromTracks) {
  const auto r = run_experiment(small_config());
  const auto dir = scratch("rmse");
  emit_outputs(r, dir);
  const auto rows = lines_of(dir / "tracks.csv");
  ASSERT_EQ(rows.front(), "algo,snr_db,trial,frame,user,px_true,py_true,px_est,py_est");
  std::map<std::tuple<std::string, int, int>, std::pair<double, int>> acc;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::vector<std::string> f;
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    ASSERT_EQ(f.size(), 9u);
    const double dx = std::stod(f[5]) - std::stod(f[7]);
    const double dy = std::stod(f[6]) - std::stod(f[8]);
    auto& a = acc[{f[0], std::stoi(f[2]), std::stoi(f[3])}];
    a.first += dx * dx + dy * dy;
    a.second += 1;
  }
  const auto metrics = read_metrics_csv(dir / "metrics.csv");
  ASSERT_EQ(metrics.size(), acc.size());
  for (const auto& m : metrics) {
    const auto& a = acc.at({m.algo, m.trial, m.frame});
    const double rmse = std::sqrt(a.first / a.second);
    EXPECT_NEAR(m.rmse_m, rmse, 1e-7 * std::max(1.0, rmse));
  }
  fs::remove_all(dir);
}

TEST(Metrics, SignalMseIgnoresAGlobalPhase) {
  const auto cfg = small_config(4, 1);
  const auto ctx = cfg.context();
  const auto data = generate_trial(cfg, ctx, -10.0, 0);
  AlgorithmRun run;
  for (int t = 0; t < cfg.num_frames; ++t) {
    std::vector<Vec2> pos;
    std::vector<cd> sym;
    for (int k = 0; k < cfg.num_users; ++k) {
      pos.push_back(data.trajectories[k].states[t].position + Vec2(3.0, 4.0));
      sym.push_back(data.symbols[t][k] * std::polar(1.0, 0.3 * (k + 1)));
    }
    run.positions.push_back(pos);
    run.symbols.push_back(sym);
  }
  const auto m = compute_metrics("hvmp", -10.0, data, run);
  ASSERT_EQ(m.size(), 4u);
  for (const auto& r : m) {
    EXPECT_NEAR(r.rmse_m, 5.0, 1e-12);
    EXPECT_LT(r.signal_mse, 1e-20);
    ASSERT_EQ(r.user_error_m.size(), 3u);
  }
}

TEST(Outputs, ZeroRecordsGiveHeaderOnlyFiles) {
  const auto dir = scratch("empty");
  emit_outputs(ExperimentResult{}, dir);
  EXPECT_EQ(lines_of(dir / "metrics.csv"),
            std::vector<std::string>{"algo,snr_db,trial,frame,rmse_m,signal_mse"});
  EXPECT_EQ(lines_of(dir / "summary.csv").size(), 1u);
  EXPECT_EQ(lines_of(dir / "tracks.csv").size(), 1u);
  EXPECT_EQ(lines_of(dir / "failures.csv").size(), 1u);
  fs::remove_all(dir);
}

TEST(Outputs, MetricsCsvHasSixColumnsAndParsesBackExactly) {
  const auto r = run_experiment(small_config(2, 1));
  const auto dir = scratch("csv");
  emit_outputs(r, dir);
  for (const auto& line : lines_of(dir / "metrics.csv")) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5) << line;
  }
  const auto back = read_metrics_csv(dir / "metrics.csv");
  ASSERT_EQ(back.size(), r.metrics.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].algo, r.metrics[i].algo);
    EXPECT_EQ(back[i].snr_db, r.metrics[i].snr_db);
    EXPECT_EQ(back[i].trial, r.metrics[i].trial);
    EXPECT_EQ(back[i].frame, r.metrics[i].frame);
    EXPECT_EQ(back[i].rmse_m, r.metrics[i].rmse_m);
    EXPECT_EQ(back[i].signal_mse, r.metrics[i].signal_mse);
  }
  fs::remove_all(dir);
}

TEST(Outputs, UnwritableDirectoryIsAnIoError) {
  const auto file = scratch("blocker");
  std::ofstream(file) << "x";
  try {
    emit_outputs(ExperimentResult{}, file / "sub");
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  fs::remove(file);
}

TEST(Sweep, EmptyListGivesEmptyOutput) {
  const auto r = sweep_snr(small_config(), {});
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_TRUE(summarize(r.metrics).empty());
}

TEST(Sweep, SingleSnrEqualsRunExperiment) {
  auto cfg = small_config(2, 2);
  cfg.snr_db = {-5.0};
  const auto a = summarize(run_experiment(cfg).metrics);
  const auto b = summarize(sweep_snr(cfg, {-5.0}).metrics);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].algo, b[i].algo);
    EXPECT_EQ(a[i].rmse_mean, b[i].rmse_mean);
    EXPECT_EQ(a[i].rmse_se, b[i].rmse_se);
    EXPECT_EQ(a[i].signal_mse_mean, b[i].signal_mse_mean);
  }
}

TEST(Summary, MeanAndStandardError) {
  std::vector<MetricsRecord> m;
  for (int t = 0; t < 4; ++t) m.push_back({"hvmp", -10.0, t, 0, 1.0 + t, 0.5, 0, {}});
  const auto s = summarize(m);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].trials, 4);
  EXPECT_DOUBLE_EQ(s[0].rmse_mean, 2.5);
  EXPECT_NEAR(s[0].rmse_se, std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
  EXPECT_DOUBLE_EQ(s[0].signal_mse_se, 0.0);
}

#ifdef ISAC_TRACK_EXE

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISAC_TRACK_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ValidateConfigSucceeds) {
  EXPECT_EQ(run_cli("validate-config " + fixtures::config_path("reference_scenario.json")), 0);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const auto bad = scratch("bad.json");
  std::ofstream(bad) << "{\"waveform\": 3}";
  EXPECT_EQ(run_cli("validate-config " + bad.string()), 2);
  EXPECT_EQ(run_cli("validate-config /nonexistent/file.json"), 2);
  EXPECT_EQ(run_cli("simulate --config " + bad.string() + " --out /tmp/isac_never"), 2);
  EXPECT_EQ(run_cli("simulate --out /tmp/isac_never"), 2);
  EXPECT_EQ(run_cli("sweep-snr --config " + fixtures::config_path("ci_scenario.json") +
                    " --snr -10,abc --out /tmp/isac_never"),
            2);
  fs::remove(bad);
}

TEST(Cli, RuntimeFailureExitsWithThree) {
  const auto file = scratch("not_a_dir");
  std::ofstream(file) << "x";
  EXPECT_EQ(run_cli("simulate --config " + fixtures::config_path("ci_scenario.json") +
                    " --trials 1 --algos hvmp --out " + file.string()),
            3);
  fs::remove(file);
}

TEST(Cli, SimulateWritesOutputs) {
  auto cfg = small_config(2, 1);
  const auto cfg_path = scratch("cli_cfg.json");
  std::ofstream(cfg_path) << config_to_json(cfg);
  const auto out = scratch("cli_out");
  EXPECT_EQ(run_cli("simulate --config " + cfg_path.string() + " --seed 5 --algos hvmp,ekf --out " +
                    out.string()),
            0);
  const auto rows = lines_of(out / "metrics.csv");
  EXPECT_EQ(rows.size(), 1u + 2u * 2u);
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
  EXPECT_TRUE(fs::exists(out / "trajectories.csv"));
  const auto empty = scratch("cli_empty");
  EXPECT_EQ(run_cli("sweep-snr --config " + cfg_path.string() + " --snr '' --out " + empty.string()), 0);
  EXPECT_EQ(lines_of(empty / "metrics.csv").size(), 1u);
  fs::remove(cfg_path);
  fs::remove_all(out);
  fs::remove_all(empty);
}

#endif

}  // namespace
}  // namespace isac
