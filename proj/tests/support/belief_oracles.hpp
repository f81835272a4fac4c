// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "isac/beliefs.hpp"

namespace isac::fixtures {

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

inline GaussianBelief random_gaussian(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g(0.0, 3.0);
  Eigen::VectorXd m(d);
  for (int i = 0; i < d; ++i) m[i] = g(rng);
  return GaussianBelief::from_moments(m, random_spd(rng, d));
}

/// Largest relative error of gaussian_fuse against the normal equations
/// (sum of inverse covariances, solved with a fresh LU factorization).
inline double gaussian_fusion_error(std::mt19937_64& rng, int count, int dim) {
  std::vector<GaussianBelief> in;
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < count; ++i) {
    in.push_back(random_gaussian(rng, dim));
    const Eigen::MatrixXd inv = in.back().covariance().partialPivLu().inverse();
    lambda += inv;
    eta += inv * in.back().mean();
  }
  const Eigen::MatrixXd cov = lambda.partialPivLu().inverse();
  const Eigen::VectorXd mean = cov * eta;
  const auto fused = gaussian_fuse(in);
  const double em = (fused.mean() - mean).norm() / std::max(mean.norm(), 1e-12);
  const double ec = (fused.covariance() - cov).norm() / cov.norm();
  return std::max(em, ec);
}

/// Spread over a grid of log(prod inputs) - log(output); zero for an exact
/// product up to normalization.
inline double vm_product_spread(std::mt19937_64& rng, int count, int grid = 720) {
  std::uniform_real_distribution<double> mu(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> kap(0.0, 60.0);
  std::vector<VonMisesBelief> in;
  for (int i = 0; i < count; ++i) in.push_back(VonMisesBelief::from_mean_concentration(mu(rng), kap(rng)));
  const auto out = vm_fuse(in);
  double lo = 1e300, hi = -1e300;
  for (int g = 0; g < grid; ++g) {
    const double phi = mu(rng);
    double lhs = 0.0;
    for (const auto& b : in) lhs += b.log_density(phi);
    const double diff = lhs - out.log_density(phi);
    lo = std::min(lo, diff);
    hi = std::max(hi, diff);
  }
  return hi - lo;
}

/// |mu error| and |kappa relative error| of gaussian_to_vm(vm_to_gaussian(b)).
inline double vm_round_trip_error(std::mt19937_64& rng, double omega) {
  std::uniform_real_distribution<double> mu(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> lk(std::log(2.0), std::log(1e6));
  const auto b = VonMisesBelief::from_mean_concentration(mu(rng), std::exp(lk(rng)));
  const auto back = gaussian_to_vm(vm_to_gaussian(b, omega, 0.0), omega);
  double dmu = std::abs(back.mu() - b.mu());
  dmu = std::min(dmu, 2.0 * std::numbers::pi - dmu);
  return std::max(dmu, std::abs(back.kappa() - b.kappa()) / b.kappa());
}

/// I1(k) / I0(k) by direct power series.
inline double bessel_ratio_series(double k) {
  double i0 = 0.0, i1 = 0.0, term0 = 1.0, term1 = k / 2.0;
  for (int m = 0; m < 200; ++m) {
    i0 += term0;
    i1 += term1;
    term0 *= (k * k / 4.0) / ((m + 1.0) * (m + 1.0));
    term1 *= (k * k / 4.0) / ((m + 1.0) * (m + 2.0));
  }
  return i1 / i0;
}

}  // namespace isac::fixtures
