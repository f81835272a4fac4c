// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "isac/errors.hpp"
#include "isac/hvmp.hpp"
#include "test_support.hpp"

namespace isac {
namespace {

const ScenarioContext& reference_ctx() {
  static const ScenarioContext ctx = fixtures::reference_config().context();
  return ctx;
}

struct UserSpec {
  UserState state;
  std::vector<int> blockage;
  cd symbol{0.8, -0.6};
};

/// One frame for the given users; path gains follow the free-space model with
/// link phases 0.4 * (link + 1).
ReceivedTensor frame_tensor(const ScenarioContext& ctx, const std::vector<UserSpec>& users,
                            double snr_db, Rng& rng) {
  FrameTruth truth;
  truth.tx_power = ctx.tx_power();
  for (const auto& u : users) {
    UserTruth t;
    t.state = u.state;
    t.symbol = u.symbol;
    t.blockage = u.blockage;
    for (std::size_t l = 0; l < ctx.num_links(); ++l) {
      const double d = (u.state.position - ctx.anchor(l).position).norm();
      t.path_gain.push_back(free_space_amplitude(d, ctx.consts()) * std::polar(1.0, 0.4 * (l + 1.0)));
    }
    truth.users.push_back(t);
  }
  auto y = synthesize_noiseless(truth, ctx.bs(), ctx.ris(), ctx.waveform(), ctx.consts());
  if (std::isfinite(snr_db)) add_noise(y, noise_power_for_snr(y, snr_db), rng);
  return y;
}

GaussianBelief prior_at(const UserState& s, const Vec2& offset, double pos_std = 1.0,
                        double vel_std = 5.0) {
  Vec4 m = s.stacked();
  m.head<2>() += offset;
  return GaussianBelief::from_moments(
      m, Vec4(pos_std * pos_std, pos_std * pos_std, vel_std * vel_std, vel_std * vel_std)
             .asDiagonal()
             .toDenseMatrix());
}

constexpr double kNoiseless = std::numeric_limits<double>::infinity();

const UserState kStatic{Vec2(40.0, -8.0), Vec2::Zero()};

TEST(RunFrame, HighSnrBsLinkFromOffsetPrior) {
  const auto& ctx = reference_ctx();
  Rng rng(1);
  const auto y = frame_tensor(ctx, {{kStatic, {1, 0, 0}}}, 30.0, rng);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2(2.0, 0.0))};
  const auto out = run_frame(y, make_initial_beliefs(priors, ctx.num_links()), HvmpConfig{}, ctx);
  EXPECT_LT((out.posterior[0].position_mean() - kStatic.position).norm(), 0.1);
}

TEST(RunFrame, FixedPointAtTruth) {
  const auto& ctx = reference_ctx();
  Rng rng(2);
  const UserState s{Vec2(52.0, 4.0), Vec2(10.0, -15.0)};
  const auto y = frame_tensor(ctx, {{s, {1, 1, 1}}}, kNoiseless, rng);
  const std::vector<GaussianBelief> priors{prior_at(s, Vec2::Zero())};
  const auto out = run_frame(y, make_initial_beliefs(priors, ctx.num_links()), HvmpConfig{}, ctx);
  EXPECT_LT((out.posterior[0].position_mean() - s.position).norm(), 1e-3);
  for (const auto& d : out.diagnostics) EXPECT_LE(d.max_position_step, 1e-3);
}

TEST(RunFrame, RisOnlyUserStillCompletes) {
  const auto& ctx = reference_ctx();
  Rng rng(3);
  const auto y = frame_tensor(ctx, {{kStatic, {0, 0, 1}}}, 20.0, rng);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2(0.5, -0.5))};
  const auto out = run_frame(y, make_initial_beliefs(priors, ctx.num_links()), HvmpConfig{}, ctx);
  ASSERT_EQ(out.links[0].size(), 3u);
  EXPECT_TRUE(out.links[0][2].active);
  EXPECT_LT((out.posterior[0].position_mean() - kStatic.position).norm(), 0.5);
}

TEST(RunFrame, InvariantsHoldOnTheReferenceScenario) {
  const auto& ctx = reference_ctx();
  Rng rng(4);
  const std::vector<UserSpec> users{{{Vec2(30.0, -20.0), Vec2(40.0, 0.0)}, {0, 1, 1}},
                                    {{Vec2(55.0, 5.0), Vec2(0.0, -30.0)}, {1, 1, 1}},
                                    {{Vec2(45.0, -10.0), Vec2(-10.0, 11.0)}, {0, 1, 1}}};
  const auto y = frame_tensor(ctx, users, -10.0, rng);
  std::vector<GaussianBelief> priors;
  for (const auto& u : users) priors.push_back(prior_at(u.state, Vec2(0.3, -0.2)));
  const auto out = run_frame(y, make_initial_beliefs(priors, ctx.num_links()), HvmpConfig{}, ctx);
  for (std::size_t k = 0; k < users.size(); ++k) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.posterior[k].state.covariance());
    EXPECT_GE(eig.eigenvalues().minCoeff(), 0.0);
    int active = 0;
    for (const auto& l : out.links[k]) {
      active += l.active ? 1 : 0;
      for (const auto* b : {&l.aoa, &l.delay, &l.doppler}) {
        EXPECT_TRUE(std::isfinite(b->kappa()));
        EXPECT_GE(b->kappa(), 0.0);
      }
    }
    EXPECT_GE(active, 1);
  }
  for (const auto& d : out.diagnostics) {
    for (const auto& u : d.users) {
      for (const auto& l : u.links) {
        for (const auto& [before, after] : l.objectives) EXPECT_GE(after, before);
      }
    }
  }
}

TEST(RunFrame, HugeNoiseLeavesTheSymbolPrior) {
  const auto& ctx = reference_ctx();
  Rng rng(5);
  ReceivedTensor y(ctx.waveform().tensor_shape());
  add_noise(y, 1e10, rng);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2::Zero())};
  const auto out = run_frame(y, make_initial_beliefs(priors, ctx.num_links()), HvmpConfig{}, ctx);
  EXPECT_LT(std::abs(out.posterior[0].symbol.mean), 1e-6);
  EXPECT_NEAR(out.posterior[0].symbol.variance, 1.0, 1e-6);
}

TEST(ForwardPredict, ZeroNoiseZeroVelocity) {
  const UserState s{Vec2(3.0, 4.0), Vec2::Zero()};
  const std::vector<GaussianBelief> priors{prior_at(s, Vec2::Zero())};
  const auto b = make_initial_beliefs(priors, 3);
  const auto p = forward_predict(b, MotionModel::constant_velocity(0.02, 0.0));
  EXPECT_EQ(p[0].position_mean(), s.position);
}

TEST(ForwardPredict, MeanAndCovariance) {
  const UserState s{Vec2::Zero(), Vec2(1.0, 2.0)};
  std::vector<GaussianBelief> priors{prior_at(s, Vec2::Zero())};
  auto b = make_initial_beliefs(priors, 3);
  b[0].symbol = {{0.5, 0.5}, 0.01};
  b[0].phase_reference = {0.1, 0.2, 0.3};
  const auto m0 = MotionModel::constant_velocity(0.02, 0.0);
  const auto p0 = forward_predict(b, m0);
  EXPECT_LT((p0[0].state.mean() - Vec4(0.02, 0.04, 1.0, 2.0)).norm(), 1e-15);
  EXPECT_EQ(p0[0].symbol.mean, cd(0.0, 0.0));
  EXPECT_EQ(p0[0].symbol.variance, 1.0);
  EXPECT_EQ(p0[0].phase_reference, b[0].phase_reference);
  const auto m = MotionModel::constant_velocity(0.02, 5.0);
  const auto p = forward_predict(b, m);
  const Eigen::MatrixXd base =
      m.transition * b[0].state.covariance() * m.transition.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p[0].state.covariance() - base);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-15);
}

std::vector<ReceivedTensor> track_tensors(const ScenarioContext& ctx, const UserState& start,
                                          const std::vector<int>& blockage, int frames,
                                          double snr_db, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ReceivedTensor> out;
  UserState s = start;
  for (int t = 0; t < frames; ++t) {
    out.push_back(frame_tensor(ctx, {{s, blockage}}, snr_db, rng));
    s = transition_mean(s, ctx.motion());
  }
  return out;
}

TEST(RunTracking, SingleFrameEqualsRunFrame) {
  const auto& ctx = reference_ctx();
  const auto tensors = track_tensors(ctx, kStatic, {1, 1, 0}, 1, 0.0, 6);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2(0.4, 0.1))};
  const auto init = make_initial_beliefs(priors, ctx.num_links());
  const auto a = run_tracking(tensors, init, HvmpConfig{}, ctx);
  const auto b = run_frame(tensors[0], init, HvmpConfig{}, ctx);
  ASSERT_EQ(a.frames.size(), 1u);
  EXPECT_EQ(a.frames[0].posterior[0].state.mean(), b.posterior[0].state.mean());
  EXPECT_EQ(a.frames[0].posterior[0].symbol.mean, b.posterior[0].symbol.mean);
}

TEST(RunTracking, TruncationIsBitIdentical) {
  const auto& ctx = reference_ctx();
  const UserState s{Vec2(35.0, -15.0), Vec2(20.0, 10.0)};
  const auto tensors = track_tensors(ctx, s, {0, 1, 1}, 10, -5.0, 7);
  const std::vector<GaussianBelief> priors{prior_at(s, Vec2(0.5, 0.5))};
  const auto init = make_initial_beliefs(priors, ctx.num_links());
  const auto full = run_tracking(tensors, init, HvmpConfig{}, ctx);
  const std::vector<ReceivedTensor> head(tensors.begin(), tensors.begin() + 5);
  const auto part = run_tracking(head, init, HvmpConfig{}, ctx);
  ASSERT_EQ(part.frames.size(), 5u);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(full.frames[t].posterior[0].state.mean(), part.frames[t].posterior[0].state.mean());
    EXPECT_EQ(full.frames[t].posterior[0].state.covariance(),
              part.frames[t].posterior[0].state.covariance());
    EXPECT_EQ(full.frames[t].posterior[0].symbol.mean, part.frames[t].posterior[0].symbol.mean);
  }
}

TEST(RunTracking, StaticNoiselessErrorDoesNotGrow) {
  const auto& ctx = reference_ctx();
  const auto tensors = track_tensors(ctx, kStatic, {1, 1, 1}, 6, kNoiseless, 8);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2(1.0, -1.0))};
  const auto out = run_tracking(tensors, make_initial_beliefs(priors, ctx.num_links()),
                                HvmpConfig{}, ctx);
  double previous = 1e300;
  for (const auto& f : out.frames) {
    const double err = (f.posterior[0].position_mean() - kStatic.position).norm();
    EXPECT_LE(err, previous + HvmpConfig{}.state_tolerance);
    previous = err;
  }
  EXPECT_LT(previous, 0.01);
}

TEST(RunTracking, CallbackSeesEveryFrame) {
  const auto& ctx = reference_ctx();
  const auto tensors = track_tensors(ctx, kStatic, {1, 1, 1}, 3, 10.0, 9);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2::Zero())};
  int calls = 0;
  run_tracking(tensors, make_initial_beliefs(priors, ctx.num_links()), HvmpConfig{}, ctx,
               [&](const FrameResult&) { ++calls; });
  EXPECT_EQ(calls, 3);
}

TEST(HvmpConfig, Validation) {
  HvmpConfig c;
  EXPECT_NO_THROW(c.validate());
  c.damping = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.outer_iterations = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Diagnostics, JsonLineIsOneLine) {
  const auto& ctx = reference_ctx();
  const auto tensors = track_tensors(ctx, kStatic, {1, 1, 1}, 1, 10.0, 10);
  const std::vector<GaussianBelief> priors{prior_at(kStatic, Vec2::Zero())};
  const auto out = run_tracking(tensors, make_initial_beliefs(priors, ctx.num_links()),
                                HvmpConfig{}, ctx);
  ASSERT_FALSE(out.frames[0].diagnostics.empty());
  const auto line = out.frames[0].diagnostics[0].to_json_line();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(line.front(), '{');
}

}  // namespace
}  // namespace isac
