// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "isac/beliefs.hpp"
#include "isac/hvmp.hpp"
#include "isac/scenario.hpp"
#include "isac/tensor.hpp"

namespace isac {

struct PositionOnlyConfig {
  /// Message-passing settings; use_velocity is forced off.
  HvmpConfig hvmp;
  /// Per-axis random-walk step std per frame, m.
  double random_walk_std = 0.3;
  /// Std of the (never updated) velocity component, m/s.
  double velocity_std = 1000.0;

  void validate() const;
  /// Stationary random walk: identity transition, diag(s^2, s^2, 0, 0) noise.
  MotionModel motion(double frame_interval) const;
};

/// Same scenario with the motion model swapped for the random walk.
ScenarioContext position_only_context(const ScenarioContext& ctx, const PositionOnlyConfig& cfg);

/// 4D priors with the given position beliefs and a zero-mean, very diffuse
/// velocity.
StateBeliefs position_only_priors(std::span<const GaussianBelief> positions,
                                  const PositionOnlyConfig& cfg, std::size_t num_links);

/// HVMP pipeline without velocity messages under the random-walk model.
TrackingOutput position_only_track(std::span<const ReceivedTensor> tensors,
                                   std::span<const GaussianBelief> positions,
                                   const PositionOnlyConfig& cfg, const ScenarioContext& ctx,
                                   const std::function<void(const FrameResult&)>& on_frame = {});

/// Position marginals of every user, per frame.
std::vector<std::vector<GaussianBelief>> position_beliefs(const TrackingOutput& out);

}  // namespace isac
