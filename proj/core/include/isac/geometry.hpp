// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <Eigen/Core>

namespace isac {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

/// Kinematic state of one user in one frame.
struct UserState {
  Vec2 position = Vec2::Zero();  // m
  Vec2 velocity = Vec2::Zero();  // m/s

  Vec4 stacked() const;
  static UserState from_stacked(const Vec4& psi);
};

/// A ULA anchor (the BS or one RIS).
///
/// `orientation` is the unit array axis.  Arrays only resolve cos(aoa), so the
/// side of the axis a user lies on is fixed by convention: users are on the
/// left of the axis, i.e. along `left_normal()`.
struct AnchorGeometry {
  Vec2 position = Vec2::Zero();
  Vec2 orientation = Vec2(1.0, 0.0);
  int num_elements = 1;

  Vec2 left_normal() const { return Vec2(-orientation.y(), orientation.x()); }
  void validate() const;
};

struct PhysicalConstants {
  double wavelength = 299792458.0 / 28e9;  // m
  double speed_of_light = 299792458.0;     // m/s

  static PhysicalConstants from_carrier(double carrier_hz, double c0 = 299792458.0);
  void validate() const;
};

struct LinkParams {
  double delay = 0.0;    // s
  double doppler = 0.0;  // Hz
  double aoa = 0.0;      // rad in [0, pi]
};

/// Minimum anchor distance below which link parameters are undefined.
inline constexpr double kMinAnchorDistance = 1e-6;
/// Distance from endfire (0 or pi) below which the AOA Jacobian is refused.
inline constexpr double kEndfireGuard = 1e-4;

double delay_from_state(const UserState& state, const AnchorGeometry& anchor,
                        const PhysicalConstants& consts);
double doppler_from_state(const UserState& state, const AnchorGeometry& anchor,
                          const PhysicalConstants& consts);
double aoa_from_state(const UserState& state, const AnchorGeometry& anchor);
LinkParams link_params(const UserState& state, const AnchorGeometry& anchor,
                       const PhysicalConstants& consts);

/// d(delay, doppler, aoa) / d(px, py, vx, vy).
Eigen::Matrix<double, 3, 4> link_params_jacobian(const UserState& state,
                                                 const AnchorGeometry& anchor,
                                                 const PhysicalConstants& consts);

/// Unit vector from the anchor towards a user seen at `aoa`, using the
/// left-side convention of AnchorGeometry.
Vec2 direction_from_aoa(const AnchorGeometry& anchor, double aoa);

}  // namespace isac
