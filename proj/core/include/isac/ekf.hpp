// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isac/beliefs.hpp"
#include "isac/mobility.hpp"
#include "isac/scenario.hpp"
#include "isac/spectral.hpp"
#include "isac/tensor.hpp"

namespace isac {

struct EkfState {
  Vec4 mean = Vec4::Zero();
  Mat4 covariance = Mat4::Identity();
};

enum class EkfStatus { Updated, SkippedUpdate };

/// One link's (delay, Doppler, AOA) measurement; the delay is user-side
/// (tau^IB already removed).
struct LinkMeasurement {
  std::size_t link = 0;
  Eigen::Vector3d value = Eigen::Vector3d::Zero();
  Eigen::Vector3d variance = Eigen::Vector3d::Ones();
};

struct EkfUpdate {
  EkfState state;
  EkfStatus status = EkfStatus::SkippedUpdate;
  std::vector<std::size_t> used_links;
};

EkfState ekf_predict(const EkfState& state, const MotionModel& model);

/// Joseph-form update x += K (z - h), P = (I - K H) P (I - K H)^T + K R K^T.
EkfState ekf_update_linearized(const EkfState& predicted, const Eigen::VectorXd& innovation,
                               const Eigen::MatrixXd& jacobian,
                               const Eigen::MatrixXd& measurement_cov);

/// Gates every link on its own chi-square statistic, then applies one stacked
/// update with the accepted links.  SkippedUpdate when none is accepted.
EkfUpdate ekf_update(const EkfState& predicted, std::span<const LinkMeasurement> measurements,
                     const ScenarioContext& ctx, double gate_chi2);

/// Predict with the motion model, then update.
EkfUpdate ekf_step(const EkfState& state, std::span<const LinkMeasurement> measurements,
                   const MotionModel& model, const ScenarioContext& ctx, double gate_chi2);

struct EkfConfig {
  SpectralSettings spectral;
  /// Per-link innovation gate (3 degrees of freedom).
  double gate_chi2 = 16.27;
  double noise_floor = 1e-8;

  void validate() const;
};

struct EkfUserFrame {
  EkfState state;
  ComplexGaussianBelief symbol;
  EkfStatus status = EkfStatus::SkippedUpdate;
  std::vector<std::size_t> used_links;
};

struct EkfFrame {
  std::vector<EkfUserFrame> users;
  double noise_power = 0.0;
};

/// Benchmark tracker: per frame, successive-cancellation spectral estimation
/// of every link (RIS links first) gated on the prediction, an EKF update per
/// user and a plug-in symbol detector on the least-squares path weights.
std::vector<EkfFrame> run_ekf_tracking(std::span<const ReceivedTensor> tensors,
                                       std::span<const GaussianBelief> initial,
                                       const EkfConfig& cfg, const ScenarioContext& ctx);

}  // namespace isac
