// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/beliefs.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "isac/errors.hpp"

namespace isac {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kConditionLimit = 1e12;
}  // namespace

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const auto& ev = eig.eigenvalues();
  const double max_abs = ev.cwiseAbs().maxCoeff();
  const double min_abs = ev.cwiseAbs().minCoeff();
  if (max_abs == 0.0) {
    throw Error(ErrorCode::AllNonInformative, "cannot invert a zero matrix");
  }
  if (min_abs == 0.0 || max_abs / min_abs > kConditionLimit) {
    const double bump = 1e-12 * sym.trace() / static_cast<double>(sym.rows());
    Eigen::MatrixXd reg = sym;
    reg.diagonal().array() += bump;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(reg);
    if (eig2.eigenvalues().minCoeff() <= 0.0) {
      throw Error(ErrorCode::AllNonInformative, "matrix is singular");
    }
    return eig2.eigenvectors() * eig2.eigenvalues().cwiseInverse().asDiagonal() *
           eig2.eigenvectors().transpose();
  }
  return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

GaussianBelief GaussianBelief::from_moments(const Eigen::VectorXd& mean,
                                            const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw Error(ErrorCode::ConfigMismatch, "mean/covariance size mismatch");
  }
  GaussianBelief g;
  g.covariance_ = 0.5 * (covariance + covariance.transpose());
  g.mean_ = mean;
  g.has_moments_ = true;
  g.precision_ = regularized_inverse(g.covariance_);
  g.shift_ = g.precision_ * mean;
  return g;
}

GaussianBelief GaussianBelief::from_information(const Eigen::MatrixXd& precision,
                                                const Eigen::VectorXd& shift) {
  if (precision.rows() != shift.size() || precision.cols() != shift.size()) {
    throw Error(ErrorCode::ConfigMismatch, "precision/shift size mismatch");
  }
  GaussianBelief g;
  g.precision_ = 0.5 * (precision + precision.transpose());
  g.shift_ = shift;
  return g;
}

GaussianBelief GaussianBelief::non_informative(int dim) {
  return from_information(Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim));
}

bool GaussianBelief::is_proper() const {
  if (has_moments_) return true;
  if (dim() == 0) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(precision_);
  const auto& ev = eig.eigenvalues();
  return ev.minCoeff() > 0.0 && ev.maxCoeff() / ev.minCoeff() < 1e15;
}

Eigen::VectorXd GaussianBelief::mean() const {
  if (has_moments_) return mean_;
  if (!is_proper()) throw Error(ErrorCode::AllNonInformative, "belief has singular precision");
  return regularized_inverse(precision_) * shift_;
}

Eigen::MatrixXd GaussianBelief::covariance() const {
  if (has_moments_) return covariance_;
  if (!is_proper()) throw Error(ErrorCode::AllNonInformative, "belief has singular precision");
  return regularized_inverse(precision_);
}

GaussianBelief gaussian_fuse(std::span<const GaussianBelief> beliefs) {
  if (beliefs.empty()) throw Error(ErrorCode::AllNonInformative, "nothing to fuse");
  const int d = beliefs.front().dim();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
  for (const auto& b : beliefs) {
    if (b.dim() != d) throw Error(ErrorCode::ConfigMismatch, "fusing beliefs of different size");
    precision += b.precision();
    shift += b.shift();
  }
  if (precision.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::AllNonInformative, "every input has zero precision");
  }
  auto fused = GaussianBelief::from_information(precision, shift);
  if (fused.is_proper()) return GaussianBelief::from_moments(fused.mean(), fused.covariance());
  return fused;
}

VonMisesBelief VonMisesBelief::from_mean_concentration(double mu, double kappa) {
  if (!(kappa >= 0.0)) throw Error(ErrorCode::ValidationError, "kappa must be non-negative");
  return VonMisesBelief(std::polar(kappa, mu));
}

double VonMisesBelief::mu() const { return kappa() == 0.0 ? 0.0 : wrap_2pi(std::arg(eta_)); }

double VonMisesBelief::log_density(double phi) const {
  const double k = kappa();
  return k * std::cos(phi - mu()) - std::log(kTwoPi) - log_bessel_i0(k);
}

VonMisesBelief vm_fuse(std::span<const VonMisesBelief> beliefs) {
  std::complex<double> eta{0.0, 0.0};
  for (const auto& b : beliefs) eta += b.eta();
  return VonMisesBelief(eta);
}

double bessel_ratio_i1_i0(double kappa) {
  if (!(kappa >= 0.0)) throw Error(ErrorCode::ValidationError, "kappa must be non-negative");
  if (kappa == 0.0) return 0.0;
  if (kappa >= 20.0) {
    static constexpr double c[] = {1.0,
                                   -0.5,
                                   -0.125,
                                   -0.125,
                                   -0.1953125,
                                   -0.40625,
                                   -1.0478515625,
                                   -3.21875,
                                   -11.466461181640625,
                                   -46.478515625,
                                   -211.27614974975586,
                                   -1064.67822265625,
                                   -5892.0457146167755,
                                   -35528.87744140625};
    const double x = 1.0 / kappa;
    double acc = 0.0;
    for (int i = 13; i >= 0; --i) acc = acc * x + c[i];
    return acc;
  }
  // I1/I0 = 1 / (2/k + 1 / (4/k + 1 / (6/k + ...))), evaluated with the
  // modified Lentz algorithm.
  constexpr double tiny = 1e-300;
  double f = tiny;
  double C = f;
  double D = 0.0;
  for (int n = 1; n < 10000; ++n) {
    const double b = 2.0 * n / kappa;
    D = b + D;
    if (D == 0.0) D = tiny;
    C = b + 1.0 / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

double log_bessel_i0(double kappa) {
  if (kappa < 500.0) return std::log(std::cyl_bessel_i(0.0, kappa));
  const double x = 1.0 / kappa;
  const double series = 1.0 + x / 8.0 + 9.0 * x * x / 128.0 + 225.0 * x * x * x / 3072.0;
  return kappa - 0.5 * std::log(kTwoPi * kappa) + std::log(series);
}

double vm_circular_variance(const VonMisesBelief& belief) {
  return 1.0 - bessel_ratio_i1_i0(belief.kappa());
}

ModeAndSpread vm_mode_and_spread(const VonMisesBelief& belief) {
  if (belief.is_uniform()) {
    throw Error(ErrorCode::UniformBelief, "uniform belief has no mode");
  }
  return {belief.mu(), vm_circular_variance(belief)};
}

double wrap_2pi(double phi) {
  double out = std::fmod(phi, kTwoPi);
  if (out < 0.0) out += kTwoPi;
  if (out >= kTwoPi) out -= kTwoPi;
  return out;
}

double unwrap_near(double phi, double reference) {
  return phi + kTwoPi * std::round((reference - phi) / kTwoPi);
}

GaussianBelief vm_to_gaussian(const VonMisesBelief& belief, double omega, double center,
                              double kappa_min) {
  if (omega == 0.0) throw Error(ErrorCode::ValidationError, "mapping frequency must be non-zero");
  if (belief.kappa() < kappa_min) {
    throw Error(ErrorCode::TooDiffuse, "concentration below the Laplace threshold");
  }
  const double phase = unwrap_near(belief.mu(), omega * center);
  Eigen::VectorXd mean(1);
  mean[0] = phase / omega;
  Eigen::MatrixXd var(1, 1);
  var(0, 0) = 1.0 / (belief.kappa() * omega * omega);
  return GaussianBelief::from_moments(mean, var);
}

VonMisesBelief gaussian_to_vm(double mean, double variance, double omega) {
  if (!(variance > 0.0)) throw Error(ErrorCode::ValidationError, "variance must be positive");
  const double kappa = std::isinf(variance) ? 0.0 : 1.0 / (omega * omega * variance);
  return VonMisesBelief::from_mean_concentration(wrap_2pi(omega * mean), kappa);
}

VonMisesBelief gaussian_to_vm(const GaussianBelief& belief, double omega) {
  if (belief.dim() != 1) throw Error(ErrorCode::ConfigMismatch, "expected a 1D Gaussian");
  if (belief.precision()(0, 0) == 0.0) return VonMisesBelief::uniform();
  return gaussian_to_vm(belief.mean()[0], belief.covariance()(0, 0), omega);
}

ComplexGaussianBelief cgaussian_fuse(std::span<const ComplexGaussianBelief> beliefs) {
  double precision = 0.0;
  std::complex<double> shift{0.0, 0.0};
  for (const auto& b : beliefs) {
    if (!b.is_informative()) continue;
    if (!(b.variance > 0.0)) throw Error(ErrorCode::ValidationError, "variance must be positive");
    precision += 1.0 / b.variance;
    shift += b.mean / b.variance;
  }
  if (precision == 0.0) throw Error(ErrorCode::AllNonInformative, "no informative input");
  return {shift / precision, 1.0 / precision};
}

}  // namespace isac
