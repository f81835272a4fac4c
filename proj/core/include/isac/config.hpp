// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "isac/ekf.hpp"
#include "isac/geometry.hpp"
#include "isac/hvmp.hpp"
#include "isac/mobility.hpp"
#include "isac/position_only.hpp"
#include "isac/scenario.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct AnchorSpec {
  Vec2 position = Vec2::Zero();
  Vec2 orientation = Vec2(1.0, 0.0);
};

/// Everything needed to reproduce an experiment.  Loaded from JSON; every
/// physical quantity must be given explicitly, while the algorithm sections
/// may omit fields to keep their defaults.
struct ScenarioConfig {
  WaveformConfig waveform;
  double carrier_hz = 28e9;
  double speed_of_light = 299792458.0;
  AnchorSpec bs;
  std::vector<AnchorSpec> ris;
  double tx_power = 1.0;  // W

  int num_users = 3;    // K
  int num_frames = 100; // V
  std::vector<double> speeds;
  Region region;
  Placement placement = Placement::HorizonFeasible;
  double placement_margin = 2.0;
  double initial_position_std = 1.0;  // m
  double initial_velocity_std = 5.0;  // m/s

  double frame_interval = 0.02;  // s
  double accel_std = 5.0;        // m/s^2

  std::vector<double> snr_db;
  double bs_block_prob = 0.95;
  double ris_block_prob = 0.0;

  HvmpConfig hvmp;
  EkfConfig ekf;
  PositionOnlyConfig position_only;

  int trials = 100;
  std::uint64_t master_seed = 1;
  int workers = 1;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  PhysicalConstants constants() const;
  MotionModel motion() const;
  /// Builds the immutable scenario; RIS phase profiles and the static RIS-BS
  /// gains are drawn from the master seed.
  ScenarioContext context() const;
};

/// Parses and validates JSON text.  Unknown keys are rejected; errors carry
/// the field path (e.g. "waveform.subcarrier_stride").
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering (all fields, including defaults).
std::string config_to_json(const ScenarioConfig& cfg);

}  // namespace isac
