// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <Eigen/Dense>

#include "isac/geometry.hpp"

namespace isac::fixtures {

/// Five-point central differences of link_params in (delay, doppler, aoa) rows.
inline Eigen::Matrix<double, 3, 4> finite_difference(const UserState& s, const AnchorGeometry& a,
                                                     const PhysicalConstants& c, double h) {
  auto at = [&](int i, double step) {
    Vec4 psi = s.stacked();
    psi[i] += step;
    const auto p = link_params(UserState::from_stacked(psi), a, c);
    return Eigen::Vector3d(p.delay, p.doppler, p.aoa);
  };
  Eigen::Matrix<double, 3, 4> j;
  for (int i = 0; i < 4; ++i) {
    j.col(i) = (8 * (at(i, h) - at(i, -h)) - (at(i, 2 * h) - at(i, -2 * h))) / (12 * h);
  }
  return j;
}

/// Largest entry-wise relative error, each entry floored at 1e-6 of its
/// row's largest magnitude.
inline double jacobian_rel_error(const Eigen::Matrix<double, 3, 4>& j,
                                 const Eigen::Matrix<double, 3, 4>& fd) {
  double worst = 0.0;
  for (int r = 0; r < 3; ++r) {
    const double scale = fd.row(r).cwiseAbs().maxCoeff();
    for (int k = 0; k < 4; ++k) {
      worst = std::max(worst, std::abs(j(r, k) - fd(r, k)) / std::max(std::abs(fd(r, k)), 1e-6 * scale));
    }
  }
  return worst;
}

}  // namespace isac::fixtures
