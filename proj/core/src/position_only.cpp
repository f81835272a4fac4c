// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/position_only.hpp"

#include "isac/errors.hpp"

namespace isac {

void PositionOnlyConfig::validate() const {
  hvmp.validate();
  if (!(random_walk_std > 0.0) || !(velocity_std > 0.0)) {
    throw Error(ErrorCode::ValidationError, "position-only noise levels must be positive");
  }
}

MotionModel PositionOnlyConfig::motion(double frame_interval) const {
  MotionModel m;
  m.frame_interval = frame_interval;
  m.transition = Mat4::Identity();
  m.process_noise = Mat4::Zero();
  m.process_noise(0, 0) = random_walk_std * random_walk_std;
  m.process_noise(1, 1) = random_walk_std * random_walk_std;
  return m;
}

ScenarioContext position_only_context(const ScenarioContext& ctx, const PositionOnlyConfig& cfg) {
  return ScenarioContext(ctx.waveform(), ctx.consts(), ctx.bs(), ctx.ris(), ctx.tx_power(),
                         cfg.motion(ctx.motion().frame_interval));
}

StateBeliefs position_only_priors(std::span<const GaussianBelief> positions,
                                  const PositionOnlyConfig& cfg, std::size_t num_links) {
  std::vector<GaussianBelief> priors;
  priors.reserve(positions.size());
  for (const auto& p : positions) {
    if (p.dim() != 2) throw Error(ErrorCode::ConfigMismatch, "position prior must be 2D");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
    mean.head<2>() = p.mean();
    cov.topLeftCorner<2, 2>() = p.covariance();
    cov(2, 2) = cfg.velocity_std * cfg.velocity_std;
    cov(3, 3) = cfg.velocity_std * cfg.velocity_std;
    priors.push_back(GaussianBelief::from_moments(mean, cov));
  }
  return make_initial_beliefs(priors, num_links);
}

TrackingOutput position_only_track(std::span<const ReceivedTensor> tensors,
                                   std::span<const GaussianBelief> positions,
                                   const PositionOnlyConfig& cfg, const ScenarioContext& ctx,
                                   const std::function<void(const FrameResult&)>& on_frame) {
  cfg.validate();
  if (tensors.empty()) return {};
  HvmpConfig hc = cfg.hvmp;
  hc.use_velocity = false;
  const ScenarioContext rw = position_only_context(ctx, cfg);
  return run_tracking(tensors, position_only_priors(positions, cfg, ctx.num_links()), hc, rw,
                      on_frame);
}

std::vector<std::vector<GaussianBelief>> position_beliefs(const TrackingOutput& out) {
  std::vector<std::vector<GaussianBelief>> res;
  res.reserve(out.frames.size());
  for (const auto& f : out.frames) {
    std::vector<GaussianBelief> users;
    users.reserve(f.posterior.size());
    for (const auto& u : f.posterior) users.push_back(u.position());
    res.push_back(std::move(users));
  }
  return res;
}

}  // namespace isac
