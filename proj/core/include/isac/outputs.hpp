// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "isac/experiment.hpp"

namespace isac {

/// %.9g rendering used by every CSV file.
std::string format_number(double x);

/// algo,snr_db,trial,frame,rmse_m,signal_mse
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows);
/// Parses a file written by write_metrics_csv (seed and per-user errors are
/// not stored and come back empty).
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// algo,snr_db,frame,trials,rmse_mean,rmse_se,signal_mse_mean,signal_mse_se
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

/// frame,user,algo,px_true,py_true,px_est,py_est for one (snr, trial).
void write_estimated_tracks_csv(const std::filesystem::path& path,
                                const std::vector<TrackRecord>& rows, double snr_db, int trial);

/// algo,snr_db,trial,frame,user,px_true,py_true,px_est,py_est for every run.
void write_tracks_csv(const std::filesystem::path& path, const std::vector<TrackRecord>& rows);

/// algo,snr_db,trial,message
void write_failures_csv(const std::filesystem::path& path, const std::vector<FailureRecord>& rows);

/// Writes metrics.csv, summary.csv, trajectories.csv (first trial at the
/// first SNR), tracks.csv, truth.csv (first trial, frame,user,px,py,vx,vy)
/// and failures.csv into `out_dir`, creating it if needed.
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir);

}  // namespace isac
