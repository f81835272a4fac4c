// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// Constant-velocity transition psi_t = F psi_{t-1} + noise, noise ~ N(0, Q).
struct MotionModel {
  double frame_interval = 0.02;  // Delta T, s
  Mat4 transition = Mat4::Identity();
  Mat4 process_noise = Mat4::Zero();

  /// White-acceleration model with acceleration spectral std `sigma_accel` (m/s^2).
  static MotionModel constant_velocity(double frame_interval, double sigma_accel);
  void validate() const;
};

/// Axis-aligned square region.
struct Region {
  Vec2 center = Vec2::Zero();
  double side = 1.0;

  Vec2 lower() const { return center.array() - side / 2.0; }
  Vec2 upper() const { return center.array() + side / 2.0; }
  bool contains(const Vec2& p, double slack = 0.0) const;
};

enum class Placement {
  /// Uniform over the whole region.
  Uniform,
  /// Uniform over the part of the region from which the noiseless
  /// straight-line path stays inside for the whole horizon (falls back to
  /// uniform when no such start exists).
  HorizonFeasible,
};

struct Trajectory {
  std::vector<UserState> states;
  Region region;
};

UserState transition_mean(const UserState& state, const MotionModel& model);
UserState sample_transition(const UserState& state, const MotionModel& model, Rng& rng);

/// Specular reflection of a state at the region boundary; speed is preserved.
UserState reflect_into(const UserState& state, const Region& region);

struct TrajectoryOptions {
  Placement placement = Placement::Uniform;
  /// Distance kept from the boundary by HorizonFeasible placement.
  double placement_margin = 2.0;
};

std::vector<Trajectory> generate_trajectories(int num_users, int num_frames, const Region& region,
                                              std::span<const double> speeds,
                                              const MotionModel& model, Rng& rng,
                                              const TrajectoryOptions& options = {});

/// CSV with header frame,user,px,py,vx,vy.
void write_trajectories_csv(const std::filesystem::path& path,
                            std::span<const Trajectory> trajectories);

}  // namespace isac
