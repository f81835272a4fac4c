// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "isac/errors.hpp"
#include "isac/geometry.hpp"
#include "geometry_oracle.hpp"
#include "test_support.hpp"

namespace isac {
namespace {

constexpr double kC0 = 299792458.0;

PhysicalConstants consts28() { return PhysicalConstants::from_carrier(28e9, kC0); }

AnchorGeometry anchor_at(Vec2 p, Vec2 axis = Vec2(1.0, 0.0)) {
  AnchorGeometry a;
  a.position = p;
  a.orientation = axis.normalized();
  return a;
}

UserState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-60.0, 60.0);
  std::uniform_real_distribution<double> vel(-40.0, 40.0);
  return {Vec2(pos(rng), pos(rng)), Vec2(vel(rng), vel(rng))};
}

TEST(Delay, ThreeFourFive) {
  const UserState s{Vec2(3.0, 4.0), Vec2::Zero()};
  EXPECT_DOUBLE_EQ(delay_from_state(s, anchor_at(Vec2::Zero()), consts28()), 5.0 / kC0);
}

TEST(Delay, AxisAligned) {
  const UserState s{Vec2(0.0, 10.0), Vec2::Zero()};
  EXPECT_DOUBLE_EQ(delay_from_state(s, anchor_at(Vec2::Zero()), consts28()), 10.0 / kC0);
}

TEST(Delay, MatchesElementwiseNorm) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    const auto a = anchor_at(Vec2(rng() % 50 * 1.0, -(rng() % 30 * 1.0)));
    const double dx = s.position.x() - a.position.x();
    const double dy = s.position.y() - a.position.y();
    const double want = std::sqrt(dx * dx + dy * dy) / kC0;
    if (std::sqrt(dx * dx + dy * dy) < 1e-3) continue;
    EXPECT_NEAR(delay_from_state(s, a, consts28()), want, 1e-15 * want + 1e-22);
  }
}

TEST(Delay, ScalesLinearlyWithDistance) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  const auto a = anchor_at(Vec2(20.0, 40.0));
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    const double k = scale(rng);
    UserState t = s;
    t.position = a.position + k * (s.position - a.position);
    EXPECT_LT(fixtures::rel_err(delay_from_state(t, a, consts28()),
                            k * delay_from_state(s, a, consts28())),
              1e-12);
  }
}

TEST(Delay, CoincidentUserIsDegenerate) {
  const UserState s{Vec2(1.0, 2.0), Vec2::Zero()};
  try {
    delay_from_state(s, anchor_at(Vec2(1.0, 2.0)), consts28());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGeometry);
  }
}

TEST(Doppler, OrthogonalVelocityIsZero) {
  const UserState s{Vec2(10.0, 0.0), Vec2(0.0, 30.0)};
  EXPECT_DOUBLE_EQ(doppler_from_state(s, anchor_at(Vec2::Zero()), consts28()), 0.0);
}

TEST(Doppler, RecedingUserGivesVOverLambda) {
  const auto c = consts28();
  const UserState s{Vec2(6.0, 8.0), Vec2(0.6, 0.8) * 25.0};
  EXPECT_NEAR(doppler_from_state(s, anchor_at(Vec2::Zero()), c), 25.0 / c.wavelength, 1e-9);
}

TEST(Doppler, MatchesDotProductOracle) {
  std::mt19937_64 rng(13);
  const auto c = consts28();
  const auto a = anchor_at(Vec2(45.0, 30.0));
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    const double dx = s.position.x() - 45.0, dy = s.position.y() - 30.0;
    const double d = std::hypot(dx, dy);
    const double want = (s.velocity.x() * dx / d + s.velocity.y() * dy / d) / c.wavelength;
    EXPECT_NEAR(doppler_from_state(s, a, c), want, 1e-9 * (1.0 + std::abs(want)));
  }
}

TEST(Doppler, LinearInVelocity) {
  std::mt19937_64 rng(14);
  const auto c = consts28();
  const auto a = anchor_at(Vec2::Zero());
  for (int i = 0; i < 100; ++i) {
    auto s1 = random_state(rng);
    auto s2 = random_state(rng);
    s2.position = s1.position;
    UserState mix{s1.position, 2.5 * s1.velocity - 0.75 * s2.velocity};
    const double want = 2.5 * doppler_from_state(s1, a, c) - 0.75 * doppler_from_state(s2, a, c);
    EXPECT_NEAR(doppler_from_state(mix, a, c), want, 1e-9 * (1.0 + std::abs(want)));
  }
}

TEST(Aoa, AlongAxisIsZero) {
  const UserState s{Vec2(7.0, 0.0), Vec2::Zero()};
  EXPECT_DOUBLE_EQ(aoa_from_state(s, anchor_at(Vec2::Zero())), 0.0);
}

TEST(Aoa, PerpendicularIsHalfPi) {
  const UserState s{Vec2(0.0, 7.0), Vec2::Zero()};
  EXPECT_NEAR(aoa_from_state(s, anchor_at(Vec2::Zero())), std::numbers::pi / 2, 1e-15);
}

TEST(Aoa, MatchesArccosOracleAndIgnoresRange) {
  std::mt19937_64 rng(15);
  const Vec2 axis = Vec2(1.0, -1.0).normalized();
  const auto a = anchor_at(Vec2(20.0, 40.0), axis);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    const Vec2 d = s.position - a.position;
    const double want = std::acos((axis.x() * d.x() + axis.y() * d.y()) / d.norm());
    const double got = aoa_from_state(s, a);
    EXPECT_NEAR(got, want, 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, std::numbers::pi);
    UserState far = s;
    far.position = a.position + 3.7 * d;
    EXPECT_NEAR(aoa_from_state(far, a), got, 1e-12);
  }
}

TEST(LinkParams, ConstructedOnAxis) {
  const PhysicalConstants c{kC0 / 28e9, 3e8};
  const UserState s{Vec2(3e8 * 1e-7, 0.0), Vec2::Zero()};
  const auto p = link_params(s, anchor_at(Vec2::Zero()), c);
  EXPECT_NEAR(p.delay, 1e-7, 1e-20);
  EXPECT_DOUBLE_EQ(p.doppler, 0.0);
  EXPECT_DOUBLE_EQ(p.aoa, 0.0);
}

TEST(LinkParams, ReferenceUserMatchesComponents) {
  const auto c = consts28();
  const auto bs = anchor_at(Vec2::Zero());
  const UserState s{Vec2(45.0, -5.0), Vec2(-30.0, 12.0)};
  const auto p = link_params(s, bs, c);
  EXPECT_DOUBLE_EQ(p.delay, delay_from_state(s, bs, c));
  EXPECT_DOUBLE_EQ(p.doppler, doppler_from_state(s, bs, c));
  EXPECT_DOUBLE_EQ(p.aoa, aoa_from_state(s, bs));
  const auto again = link_params(s, bs, c);
  EXPECT_EQ(p.delay, again.delay);
  EXPECT_EQ(p.doppler, again.doppler);
  EXPECT_EQ(p.aoa, again.aoa);
}

TEST(Jacobian, DelayIgnoresVelocity) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_state(rng);
    const auto j = link_params_jacobian(s, anchor_at(Vec2(0.0, 0.0), Vec2(1.0, 0.3)), consts28());
    EXPECT_EQ(j(0, 2), 0.0);
    EXPECT_EQ(j(0, 3), 0.0);
  }
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  const auto c = consts28();
  const auto a = anchor_at(Vec2(45.0, 30.0), Vec2(-1.0, 0.2));
  int checked = 0;
  while (checked < 300) {
    const auto s = random_state(rng);
    const double aoa = aoa_from_state(s, a);
    if ((s.position - a.position).norm() < 1.0 || aoa < 0.05 || aoa > std::numbers::pi - 0.05) {
      continue;
    }
    const auto j = link_params_jacobian(s, a, c);
    EXPECT_LT(fixtures::jacobian_rel_error(j, fixtures::finite_difference(s, a, c, 1e-3)), 1e-5);
    ++checked;
  }
}

TEST(Jacobian, DoublingDistanceHalvesAoaGradient) {
  const auto c = consts28();
  const auto a = anchor_at(Vec2::Zero());
  const Vec2 dir = Vec2(0.6, 0.8);
  const UserState near{10.0 * dir, Vec2(1.0, 2.0)};
  const UserState far{20.0 * dir, Vec2(1.0, 2.0)};
  const auto jn = fixtures::finite_difference(near, a, c, 1e-6);
  const auto jf = fixtures::finite_difference(far, a, c, 1e-6);
  EXPECT_NEAR(jf(2, 0), 0.5 * jn(2, 0), 1e-7);
  EXPECT_NEAR(jf(2, 1), 0.5 * jn(2, 1), 1e-7);
  const auto an = link_params_jacobian(near, a, c);
  const auto af = link_params_jacobian(far, a, c);
  EXPECT_NEAR(af(2, 0), 0.5 * an(2, 0), 1e-12);
  EXPECT_NEAR(af(2, 1), 0.5 * an(2, 1), 1e-12);
}

TEST(Jacobian, EndfireIsRefused) {
  const UserState s{Vec2(5.0, 0.0), Vec2::Zero()};
  try {
    link_params_jacobian(s, anchor_at(Vec2::Zero()), consts28());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AngularSingularity);
  }
}

TEST(Direction, InvertsAoaOnLeftSide) {
  const auto a = anchor_at(Vec2(20.0, 40.0), Vec2(1.0, 1.0));
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> ang(0.01, std::numbers::pi - 0.01);
  for (int i = 0; i < 50; ++i) {
    const double th = ang(rng);
    const Vec2 p = a.position + 12.0 * direction_from_aoa(a, th);
    EXPECT_NEAR(aoa_from_state({p, Vec2::Zero()}, a), th, 1e-12);
    EXPECT_GT((p - a.position).dot(a.left_normal()), 0.0);
  }
}

}  // namespace
}  // namespace isac
