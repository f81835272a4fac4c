// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/mobility.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "isac/errors.hpp"

namespace isac {

MotionModel MotionModel::constant_velocity(double frame_interval, double sigma_accel) {
  MotionModel m;
  m.frame_interval = frame_interval;
  m.transition = Mat4::Identity();
  m.transition.block<2, 2>(0, 2) = frame_interval * Mat2::Identity();
  const double dt = frame_interval;
  const double s2 = sigma_accel * sigma_accel;
  m.process_noise.setZero();
  m.process_noise.block<2, 2>(0, 0) = s2 * dt * dt * dt * dt / 4.0 * Mat2::Identity();
  m.process_noise.block<2, 2>(0, 2) = s2 * dt * dt * dt / 2.0 * Mat2::Identity();
  m.process_noise.block<2, 2>(2, 0) = s2 * dt * dt * dt / 2.0 * Mat2::Identity();
  m.process_noise.block<2, 2>(2, 2) = s2 * dt * dt * Mat2::Identity();
  return m;
}

void MotionModel::validate() const {
  if (!(frame_interval > 0.0)) {
    throw Error(ErrorCode::ValidationError, "frame_interval must be positive");
  }
  if ((process_noise - process_noise.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::ValidationError, "process noise must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat4> eig(process_noise);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw Error(ErrorCode::ValidationError, "process noise must be positive semi-definite");
  }
}

bool Region::contains(const Vec2& p, double slack) const {
  const Vec2 lo = lower();
  const Vec2 hi = upper();
  return p.x() >= lo.x() - slack && p.x() <= hi.x() + slack && p.y() >= lo.y() - slack &&
         p.y() <= hi.y() + slack;
}

UserState transition_mean(const UserState& state, const MotionModel& model) {
  return UserState::from_stacked(model.transition * state.stacked());
}

UserState sample_transition(const UserState& state, const MotionModel& model, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<Mat4> eig(model.process_noise);
  const Vec4 scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec4 z;
  for (int i = 0; i < 4; ++i) z[i] = gauss(rng);
  const Vec4 noise = eig.eigenvectors() * scale.asDiagonal() * z;
  return UserState::from_stacked(model.transition * state.stacked() + noise);
}

UserState reflect_into(const UserState& state, const Region& region) {
  UserState out = state;
  const Vec2 lo = region.lower();
  const Vec2 hi = region.upper();
  for (int axis = 0; axis < 2; ++axis) {
    // A single step can overshoot by more than the region width only for
    // absurd speeds; the loop still terminates because each pass folds once.
    for (int guard = 0; guard < 64; ++guard) {
      if (out.position[axis] < lo[axis]) {
        out.position[axis] = 2.0 * lo[axis] - out.position[axis];
        out.velocity[axis] = -out.velocity[axis];
      } else if (out.position[axis] > hi[axis]) {
        out.position[axis] = 2.0 * hi[axis] - out.position[axis];
        out.velocity[axis] = -out.velocity[axis];
      } else {
        break;
      }
    }
  }
  return out;
}

std::vector<Trajectory> generate_trajectories(int num_users, int num_frames, const Region& region,
                                              std::span<const double> speeds,
                                              const MotionModel& model, Rng& rng,
                                              const TrajectoryOptions& options) {
  if (static_cast<int>(speeds.size()) != num_users) {
    throw Error(ErrorCode::ConfigMismatch, "need one speed per user");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Trajectory> out;
  out.reserve(num_users);
  const double horizon = model.frame_interval * std::max(num_frames - 1, 0);
  for (int k = 0; k < num_users; ++k) {
    const double heading = 2.0 * std::numbers::pi * unit(rng);
    const Vec2 velocity = speeds[k] * Vec2(std::cos(heading), std::sin(heading));

    Vec2 lo = region.lower();
    Vec2 hi = region.upper();
    if (options.placement == Placement::HorizonFeasible) {
      const Vec2 travel = velocity * horizon;
      Vec2 flo = lo.array() + options.placement_margin;
      Vec2 fhi = hi.array() - options.placement_margin;
      for (int axis = 0; axis < 2; ++axis) {
        if (travel[axis] > 0.0) fhi[axis] -= travel[axis];
        else flo[axis] -= travel[axis];
      }
      if (flo.x() <= fhi.x() && flo.y() <= fhi.y()) {
        lo = flo;
        hi = fhi;
      }
    }
    UserState state;
    state.position = Vec2(lo.x() + (hi.x() - lo.x()) * unit(rng),
                          lo.y() + (hi.y() - lo.y()) * unit(rng));
    state.velocity = velocity;

    Trajectory traj;
    traj.region = region;
    traj.states.reserve(num_frames);
    for (int t = 0; t < num_frames; ++t) {
      if (t > 0) state = reflect_into(sample_transition(state, model, rng), region);
      traj.states.push_back(state);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

void write_trajectories_csv(const std::filesystem::path& path,
                            std::span<const Trajectory> trajectories) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << "frame,user,px,py,vx,vy\n";
  std::size_t frames = 0;
  for (const auto& t : trajectories) frames = std::max(frames, t.states.size());
  char buf[256];
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      if (f >= trajectories[k].states.size()) continue;
      const auto& s = trajectories[k].states[f];
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%.9g,%.9g,%.9g\n", f, k, s.position.x(),
                    s.position.y(), s.velocity.x(), s.velocity.y());
      out << buf;
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace isac
