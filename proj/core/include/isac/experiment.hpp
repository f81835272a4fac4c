// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "isac/config.hpp"
#include "isac/mobility.hpp"
#include "isac/tensor.hpp"

namespace isac {

enum class Algorithm { Hvmp, Ekf, PositionOnly };

/// "hvmp", "ekf", "pos-only".
std::string_view algorithm_name(Algorithm a);
/// Accepts the names above (and "position_only"); throws ValidationError.
Algorithm parse_algorithm(std::string_view name);
/// Comma-separated list, duplicates removed, order kept.
std::vector<Algorithm> parse_algorithm_list(std::string_view list);

/// Per-trial seed: splitmix64 of the master seed advanced by the trial index.
/// Independent of the SNR so that a sweep reuses trajectories and noise shapes.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// Synthesized data of one trial, shared by every algorithm.
struct TrialData {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<cd>> symbols;      // [frame][user]
  std::vector<std::vector<int>> blockage;    // [frame][user * links + link]
  std::vector<ReceivedTensor> tensors;
  std::vector<double> noise_power;           // per frame
  /// 4D priors of the first frame, centred on the true initial states.
  std::vector<GaussianBelief> priors;
  std::uint64_t checksum = 0;
};

TrialData generate_trial(const ScenarioConfig& cfg, const ScenarioContext& ctx, double snr_db,
                         int trial);

/// Estimates of one algorithm on one trial.
struct AlgorithmRun {
  std::vector<std::vector<Vec2>> positions;  // [frame][user]
  std::vector<std::vector<cd>> symbols;      // [frame][user]
};

AlgorithmRun run_algorithm(Algorithm algo, const ScenarioConfig& cfg, const ScenarioContext& ctx,
                           const TrialData& data,
                           const std::function<void(const std::string&)>& diagnostics = {});

struct MetricsRecord {
  std::string algo;
  double snr_db = 0.0;
  int trial = 0;
  int frame = 0;
  double rmse_m = 0.0;
  double signal_mse = 0.0;
  std::uint64_t seed = 0;
  /// Position error of every user (m); not part of metrics.csv.
  std::vector<double> user_error_m;
};

struct TrackRecord {
  std::string algo;
  double snr_db = 0.0;
  int trial = 0;
  int frame = 0;
  int user = 0;
  Vec2 truth = Vec2::Zero();
  Vec2 estimate = Vec2::Zero();
};

struct FailureRecord {
  std::string algo;
  double snr_db = 0.0;
  int trial = 0;
  std::string message;
};

struct ChecksumRecord {
  double snr_db = 0.0;
  int trial = 0;
  std::uint64_t checksum = 0;
};

/// Per-frame RMSE across users and signal MSE after removing one global
/// phase per user (the least-squares rotation over all frames).
std::vector<MetricsRecord> compute_metrics(std::string_view algo, double snr_db,
                                           const TrialData& data, const AlgorithmRun& run);

struct ExperimentOptions {
  std::vector<Algorithm> algorithms{Algorithm::Hvmp, Algorithm::Ekf, Algorithm::PositionOnly};
  /// Worker threads; 0 uses the config value.
  int workers = 0;
  /// Receives HVMP iteration diagnostics (JSON lines) of trial 0 and one
  /// checksum line per trial.
  std::function<void(const std::string&)> diagnostics;
};

struct ExperimentResult {
  std::vector<MetricsRecord> metrics;
  std::vector<TrackRecord> tracks;
  std::vector<FailureRecord> failures;
  std::vector<ChecksumRecord> checksums;
  /// True trajectories of trial 0.
  std::vector<Trajectory> first_truth;
};

/// Runs every trial at every SNR of cfg.snr_db.  Records are sorted by
/// (snr, trial, algorithm, frame) whatever the number of workers.
ExperimentResult run_experiment(const ScenarioConfig& cfg, const ExperimentOptions& options = {});

struct SummaryRow {
  std::string algo;
  double snr_db = 0.0;
  int frame = 0;
  int trials = 0;
  double rmse_mean = 0.0;
  double rmse_se = 0.0;
  double signal_mse_mean = 0.0;
  double signal_mse_se = 0.0;
};

/// Cross-trial mean and standard error per (algo, snr, frame).
std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& metrics);

/// run_experiment with the SNR list replaced.
ExperimentResult sweep_snr(const ScenarioConfig& cfg, const std::vector<double>& snr_db,
                           const ExperimentOptions& options = {});

/// Rounds to 9 significant digits, the precision of every CSV file.
double round_sig9(double x);

}  // namespace isac
