// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <complex>
#include <vector>

#include "isac/beliefs.hpp"

namespace isac {

/// H(phi) = sum_k c_k exp(j f_k phi) with real, not necessarily integer,
/// frequencies.  Every per-variable objective of the estimators is the real
/// part (or the squared modulus) of such a sum.
class HarmonicSum {
 public:
  struct Term {
    double freq;
    std::complex<double> coeff;
  };

  void add(double freq, std::complex<double> coeff) { terms_.push_back({freq, coeff}); }
  void append(const HarmonicSum& other);
  void scale(std::complex<double> factor);
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// Largest |c_k| among terms with non-zero frequency.
  double max_varying_coeff() const;

  std::complex<double> value(double phi) const;
  /// d^order H / d phi^order at phi, order in 0..2.
  std::complex<double> derivative(double phi, int order) const;
  /// H at lo + g * step for g = 0 .. count - 1, by phasor recursion.
  std::vector<std::complex<double>> grid(double lo, double step, int count) const;

 private:
  std::vector<Term> terms_;
};

struct Maximum {
  double phi = 0.0;
  double value = 0.0;
  /// Second derivative of the objective at phi.
  double curvature = 0.0;
};

/// Search settings shared by every circular variable.
struct SearchSettings {
  int grid_points = 512;
  int newton_steps = 5;
  /// Half-width of the search window around the prior mean, in prior
  /// standard deviations (1 / sqrt(kappa)); the whole interval when the
  /// window would cover it.
  double gate_sigmas = 3.0;
  /// Smallest half-width, as a fraction of the interval length.
  double min_gate_fraction = 0.05;
  /// Rotate the gain phase with the variable, w(phi) = w0 exp(j c (phi - phi0)),
  /// c being the phase slope of the link's own steering at phi0.  Only valid
  /// when w0 was fitted at phi0.
  bool track_gain_phase = false;
};

/// f(phi) = Re H(phi) + kappa cos(phi - mu) on the interval [lo, hi].
class CircularObjective {
 public:
  CircularObjective(HarmonicSum likelihood, VonMisesBelief prior, double lo, double hi);

  const HarmonicSum& likelihood() const { return likelihood_; }
  const VonMisesBelief& prior() const { return prior_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double value(double phi) const;
  double likelihood_value(double phi) const;
  double derivative(double phi, int order) const;
  double likelihood_derivative(double phi, int order) const;

  /// Grid search followed by safeguarded Newton steps.  A step is only kept
  /// when it does not decrease the objective.
  Maximum maximize(const SearchSettings& settings) const;
  /// Newton ascent of the likelihood alone starting at `start`.
  Maximum maximize_likelihood_from(double start, int steps) const;

 private:
  double clamp(double phi) const;

  HarmonicSum likelihood_;
  HarmonicSum total_;
  VonMisesBelief prior_;
  double lo_;
  double hi_;
};

/// Quadratic interpolation of a sampled peak; returns the sub-sample offset in
/// [-0.5, 0.5] and the interpolated second difference (per sample^2).
struct PeakFit {
  double offset = 0.0;
  double value = 0.0;
  double second_difference = 0.0;
};
PeakFit fit_parabola(double left, double centre, double right);

}  // namespace isac
