// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "isac/beliefs.hpp"
#include "isac/hvmp_messages.hpp"
#include "isac/scenario.hpp"
#include "isac/tensor.hpp"

namespace isac {

struct HvmpConfig {
  int outer_iterations = 8;
  int inner_iterations = 3;
  int grid_points = 512;
  int newton_steps = 5;
  int likelihood_newton_steps = 3;
  /// Search window half-width around each parameter prior, in prior
  /// standard deviations.
  double gate_sigmas = 3.0;
  double state_tolerance = 1e-3;      // m
  double activation_threshold = 9.0;  // in units of the noise power
  double damping = 0.7;
  double kappa_min = kKappaMin;
  /// Standard deviation of the carried-over path-gain phase references, rad.
  double reference_phase_std = 0.05;
  /// Relative floor on the noise estimate, as a fraction of the mean power.
  double noise_floor = 1e-8;
  /// When false the velocity messages are not formed (position-only tracking).
  bool use_velocity = true;

  void validate() const;
};

/// Belief about one user: the joint [p; v] Gaussian, the symbol of the
/// current frame and the per-link phase references of the path gains (NaN
/// until the link is first active).
struct UserBelief {
  GaussianBelief state;
  ComplexGaussianBelief symbol{{0.0, 0.0}, 1.0};
  std::vector<double> phase_reference;

  Vec2 position_mean() const;
  Vec2 velocity_mean() const;
  Mat2 position_covariance() const;
  Mat2 velocity_covariance() const;
  GaussianBelief position() const;
  GaussianBelief velocity() const;
};

using StateBeliefs = std::vector<UserBelief>;

/// Initial beliefs with uniform phase references.
StateBeliefs make_initial_beliefs(std::span<const GaussianBelief> priors, std::size_t num_links);

struct LinkDiagnostics {
  int active = 0;
  double kappa_aoa = 0.0;
  double kappa_delay = 0.0;
  double kappa_doppler = 0.0;
  double gain_abs = 0.0;
  double explained_energy = 0.0;
  /// Objective before and after each coordinate update of the last sweep.
  std::vector<std::pair<double, double>> objectives;
};

struct UserDiagnostics {
  Vec2 position = Vec2::Zero();
  double position_trace = 0.0;
  std::vector<LinkDiagnostics> links;
};

/// One record per (frame, outer iteration).
struct IterationDiagnostics {
  int frame = 0;
  int iteration = 0;
  double noise_power = 0.0;
  double residual_energy = 0.0;
  double max_position_step = 0.0;
  int skipped_updates = 0;
  std::vector<UserDiagnostics> users;

  std::string to_json_line() const;
};

struct FrameResult {
  StateBeliefs posterior;
  LinkBeliefSet links;
  std::vector<IterationDiagnostics> diagnostics;
  double noise_power = 0.0;
};

/// Inference for one frame given the predicted beliefs.
FrameResult run_frame(const ReceivedTensor& tensor, const StateBeliefs& predicted,
                      const HvmpConfig& cfg, const ScenarioContext& ctx, int frame_index = 0);

/// Prior for the next frame: joint Gaussian through the motion model, symbol
/// reset to CN(0, 1), phase references carried over.
StateBeliefs forward_predict(const StateBeliefs& posterior, const MotionModel& model);

struct TrackingOutput {
  std::vector<FrameResult> frames;
};

/// run_frame chained with forward_predict; frame t only sees tensors 0..t.
/// `on_frame` (optional) is called after each frame.
TrackingOutput run_tracking(std::span<const ReceivedTensor> tensors, const StateBeliefs& initial,
                            const HvmpConfig& cfg, const ScenarioContext& ctx,
                            const std::function<void(const FrameResult&)>& on_frame = {});

}  // namespace isac
