// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <complex>
#include <limits>
#include <span>

#include <Eigen/Core>

namespace isac {

/// Multivariate Gaussian kept in information form (precision, shift =
/// precision * mean) so that rank-deficient messages and the non-informative
/// belief are representable.  Moment accessors invert on demand.
class GaussianBelief {
 public:
  GaussianBelief() = default;

  static GaussianBelief from_moments(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance);
  static GaussianBelief from_information(const Eigen::MatrixXd& precision,
                                         const Eigen::VectorXd& shift);
  static GaussianBelief non_informative(int dim);

  int dim() const { return static_cast<int>(shift_.size()); }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& shift() const { return shift_; }

  /// True when the precision is positive definite.
  bool is_proper() const;
  /// Throws AllNonInformative when the precision is singular.
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

 private:
  Eigen::MatrixXd precision_;
  Eigen::VectorXd shift_;
  // Exact moments when constructed from them, so round trips do not drift.
  bool has_moments_ = false;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
};

/// Inverse of a symmetric matrix; adds 1e-12 * trace / d * I first when the
/// condition number exceeds 1e12.
Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& m);

GaussianBelief gaussian_fuse(std::span<const GaussianBelief> beliefs);

/// Von Mises belief stored by its natural parameter eta = kappa * exp(j mu).
class VonMisesBelief {
 public:
  VonMisesBelief() = default;
  explicit VonMisesBelief(std::complex<double> eta) : eta_(eta) {}
  static VonMisesBelief from_mean_concentration(double mu, double kappa);
  static VonMisesBelief uniform() { return VonMisesBelief{}; }

  std::complex<double> eta() const { return eta_; }
  /// Mean direction in [0, 2 pi).
  double mu() const;
  double kappa() const { return std::abs(eta_); }
  bool is_uniform() const { return kappa() == 0.0; }

  /// Normalized log-density at angle phi.
  double log_density(double phi) const;

 private:
  std::complex<double> eta_{0.0, 0.0};
};

VonMisesBelief vm_fuse(std::span<const VonMisesBelief> beliefs);

/// I1(kappa) / I0(kappa): continued fraction below kappa = 20, asymptotic
/// series above.
double bessel_ratio_i1_i0(double kappa);
double log_bessel_i0(double kappa);

struct ModeAndSpread {
  double mode;
  double circular_variance;
};

double vm_circular_variance(const VonMisesBelief& belief);
/// Throws UniformBelief when kappa == 0.
ModeAndSpread vm_mode_and_spread(const VonMisesBelief& belief);

/// Concentration below which the Laplace approximation is refused.
inline constexpr double kKappaMin = 2.0;

/// Laplace approximation of a VM belief over phi = omega * x as a 1D Gaussian
/// over x.  Among the aliases (mu + 2 pi n) / omega the one nearest `center`
/// is returned.  Throws TooDiffuse when kappa < kappa_min.
GaussianBelief vm_to_gaussian(const VonMisesBelief& belief, double omega, double center = 0.0,
                              double kappa_min = kKappaMin);
/// Inverse bridge: mu = omega * mean (mod 2 pi), kappa = 1 / (omega^2 var).
VonMisesBelief gaussian_to_vm(const GaussianBelief& belief, double omega);
VonMisesBelief gaussian_to_vm(double mean, double variance, double omega);

/// Nearest representative of phi + 2 pi n to `reference`.
double unwrap_near(double phi, double reference);
/// Wrap to [0, 2 pi).
double wrap_2pi(double phi);

/// Scalar circular complex Gaussian; infinite variance is non-informative.
struct ComplexGaussianBelief {
  std::complex<double> mean{0.0, 0.0};
  double variance = std::numeric_limits<double>::infinity();

  static ComplexGaussianBelief non_informative() { return {}; }
  bool is_informative() const { return std::isfinite(variance); }
};

ComplexGaussianBelief cgaussian_fuse(std::span<const ComplexGaussianBelief> beliefs);

}  // namespace isac
