// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "isac/errors.hpp"

namespace isac {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::AngularSingularity: return "AngularSingularity";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::AllNonInformative: return "AllNonInformative";
    case ErrorCode::UniformBelief: return "UniformBelief";
    case ErrorCode::TooDiffuse: return "TooDiffuse";
    case ErrorCode::NoInformativeData: return "NoInformativeData";
    case ErrorCode::NoActiveLinks: return "NoActiveLinks";
    case ErrorCode::NoPeak: return "NoPeak";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Vec4 UserState::stacked() const {
  Vec4 psi;
  psi << position, velocity;
  return psi;
}

UserState UserState::from_stacked(const Vec4& psi) {
  return UserState{psi.head<2>(), psi.tail<2>()};
}

void AnchorGeometry::validate() const {
  if (!position.allFinite()) {
    throw Error(ErrorCode::ValidationError, "anchor position must be finite");
  }
  if (std::abs(orientation.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::ValidationError, "anchor orientation must be a unit vector");
  }
  if (num_elements < 1) {
    throw Error(ErrorCode::ValidationError, "anchor needs at least one element");
  }
}

PhysicalConstants PhysicalConstants::from_carrier(double carrier_hz, double c0) {
  PhysicalConstants out;
  out.speed_of_light = c0;
  out.wavelength = c0 / carrier_hz;
  out.validate();
  return out;
}

void PhysicalConstants::validate() const {
  if (!(wavelength > 0.0) || !(speed_of_light > 0.0)) {
    throw Error(ErrorCode::ValidationError, "wavelength and speed of light must be positive");
  }
}

namespace {

struct LineOfSight {
  Vec2 unit;
  double distance;
};

LineOfSight line_of_sight(const UserState& state, const AnchorGeometry& anchor) {
  if (!state.position.allFinite() || !state.velocity.allFinite()) {
    throw Error(ErrorCode::DegenerateGeometry, "non-finite user state");
  }
  const Vec2 diff = state.position - anchor.position;
  const double d = diff.norm();
  if (!(d > kMinAnchorDistance)) {
    throw Error(ErrorCode::DegenerateGeometry, "user coincides with anchor");
  }
  return {diff / d, d};
}

}  // namespace

double delay_from_state(const UserState& state, const AnchorGeometry& anchor,
                        const PhysicalConstants& consts) {
  return line_of_sight(state, anchor).distance / consts.speed_of_light;
}

double doppler_from_state(const UserState& state, const AnchorGeometry& anchor,
                          const PhysicalConstants& consts) {
  const auto los = line_of_sight(state, anchor);
  return state.velocity.dot(los.unit) / consts.wavelength;
}

double aoa_from_state(const UserState& state, const AnchorGeometry& anchor) {
  const auto los = line_of_sight(state, anchor);
  const double c = std::clamp(anchor.orientation.dot(los.unit), -1.0, 1.0);
  return std::acos(c);
}

LinkParams link_params(const UserState& state, const AnchorGeometry& anchor,
                       const PhysicalConstants& consts) {
  const auto los = line_of_sight(state, anchor);
  LinkParams out;
  out.delay = los.distance / consts.speed_of_light;
  out.doppler = state.velocity.dot(los.unit) / consts.wavelength;
  out.aoa = std::acos(std::clamp(anchor.orientation.dot(los.unit), -1.0, 1.0));
  return out;
}

Eigen::Matrix<double, 3, 4> link_params_jacobian(const UserState& state,
                                                 const AnchorGeometry& anchor,
                                                 const PhysicalConstants& consts) {
  const auto los = line_of_sight(state, anchor);
  const double cos_aoa = std::clamp(anchor.orientation.dot(los.unit), -1.0, 1.0);
  const double aoa = std::acos(cos_aoa);
  if (aoa < kEndfireGuard || aoa > std::numbers::pi - kEndfireGuard) {
    throw Error(ErrorCode::AngularSingularity, "AOA within endfire guard");
  }
  const Vec2& r = los.unit;
  const double d = los.distance;
  // Derivative of the unit line-of-sight vector: (I - r r^T) / d.
  const Mat2 proj = (Mat2::Identity() - r * r.transpose()) / d;

  Eigen::Matrix<double, 3, 4> jac = Eigen::Matrix<double, 3, 4>::Zero();
  jac.block<1, 2>(0, 0) = r.transpose() / consts.speed_of_light;
  jac.block<1, 2>(1, 0) = (proj * state.velocity).transpose() / consts.wavelength;
  jac.block<1, 2>(1, 2) = r.transpose() / consts.wavelength;
  const double sin_aoa = std::sin(aoa);
  jac.block<1, 2>(2, 0) = -(proj * anchor.orientation).transpose() / sin_aoa;
  return jac;
}

Vec2 direction_from_aoa(const AnchorGeometry& anchor, double aoa) {
  return std::cos(aoa) * anchor.orientation + std::sin(aoa) * anchor.left_normal();
}

}  // namespace isac
