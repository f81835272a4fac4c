// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "isac/errors.hpp"
#include "isac/mobility.hpp"

namespace isac {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void check(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows) {
  auto out = open_out(path);
  out << "algo,snr_db,trial,frame,rmse_m,signal_mse\n";
  for (const auto& r : rows) {
    out << r.algo << ',' << format_number(r.snr_db) << ',' << r.trial << ',' << r.frame << ','
        << format_number(r.rmse_m) << ',' << format_number(r.signal_mse) << '\n';
  }
  check(out, path);
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "algo,snr_db,trial,frame,rmse_m,signal_mse") {
    throw Error(ErrorCode::ParseError, path.string() + ": unexpected metrics header");
  }
  std::vector<MetricsRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(lineno) + ": expected 6 columns");
    }
    try {
      MetricsRecord r;
      r.algo = f[0];
      r.snr_db = std::stod(f[1]);
      r.trial = std::stoi(f[2]);
      r.frame = std::stoi(f[3]);
      r.rmse_m = std::stod(f[4]);
      r.signal_mse = std::stod(f[5]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  auto out = open_out(path);
  out << "algo,snr_db,frame,trials,rmse_mean,rmse_se,signal_mse_mean,signal_mse_se\n";
  for (const auto& r : rows) {
    out << r.algo << ',' << format_number(r.snr_db) << ',' << r.frame << ',' << r.trials << ','
        << format_number(r.rmse_mean) << ',' << format_number(r.rmse_se) << ','
        << format_number(r.signal_mse_mean) << ',' << format_number(r.signal_mse_se) << '\n';
  }
  check(out, path);
}

void write_estimated_tracks_csv(const std::filesystem::path& path,
                                const std::vector<TrackRecord>& rows, double snr_db, int trial) {
  auto out = open_out(path);
  out << "frame,user,algo,px_true,py_true,px_est,py_est\n";
  for (const auto& r : rows) {
    if (r.snr_db != snr_db || r.trial != trial) continue;
    out << r.frame << ',' << r.user << ',' << r.algo << ',' << format_number(r.truth.x()) << ','
        << format_number(r.truth.y()) << ',' << format_number(r.estimate.x()) << ','
        << format_number(r.estimate.y()) << '\n';
  }
  check(out, path);
}

void write_tracks_csv(const std::filesystem::path& path, const std::vector<TrackRecord>& rows) {
  auto out = open_out(path);
  out << "algo,snr_db,trial,frame,user,px_true,py_true,px_est,py_est\n";
  for (const auto& r : rows) {
    out << r.algo << ',' << format_number(r.snr_db) << ',' << r.trial << ',' << r.frame << ','
        << r.user << ',' << format_number(r.truth.x()) << ',' << format_number(r.truth.y()) << ','
        << format_number(r.estimate.x()) << ',' << format_number(r.estimate.y()) << '\n';
  }
  check(out, path);
}

void write_failures_csv(const std::filesystem::path& path, const std::vector<FailureRecord>& rows) {
  auto out = open_out(path);
  out << "algo,snr_db,trial,message\n";
  for (const auto& r : rows) {
    out << r.algo << ',' << format_number(r.snr_db) << ',' << r.trial << ',' << quote(r.message)
        << '\n';
  }
  check(out, path);
}

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  write_metrics_csv(out_dir / "metrics.csv", result.metrics);
  write_summary_csv(out_dir / "summary.csv", summarize(result.metrics));
  const double snr0 = result.tracks.empty() ? 0.0 : result.tracks.front().snr_db;
  write_estimated_tracks_csv(out_dir / "trajectories.csv", result.tracks, snr0, 0);
  write_tracks_csv(out_dir / "tracks.csv", result.tracks);
  write_trajectories_csv(out_dir / "truth.csv", result.first_truth);
  write_failures_csv(out_dir / "failures.csv", result.failures);
}

}  // namespace isac
