// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/circular_objective.hpp"

#include <algorithm>
#include <cmath>

#include "isac/errors.hpp"

namespace isac {

using cd = std::complex<double>;

void HarmonicSum::append(const HarmonicSum& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
}

void HarmonicSum::scale(cd factor) {
  for (auto& t : terms_) t.coeff *= factor;
}

double HarmonicSum::max_varying_coeff() const {
  double out = 0.0;
  for (const auto& t : terms_) {
    if (t.freq != 0.0) out = std::max(out, std::abs(t.coeff));
  }
  return out;
}

cd HarmonicSum::value(double phi) const { return derivative(phi, 0); }

cd HarmonicSum::derivative(double phi, int order) const {
  cd acc{0.0, 0.0};
  for (const auto& t : terms_) {
    cd term = t.coeff * std::polar(1.0, t.freq * phi);
    for (int i = 0; i < order; ++i) term *= cd{0.0, t.freq};
    acc += term;
  }
  return acc;
}

std::vector<cd> HarmonicSum::grid(double lo, double step, int count) const {
  std::vector<cd> out(static_cast<std::size_t>(std::max(count, 0)), cd{0.0, 0.0});
  for (const auto& t : terms_) {
    cd z = t.coeff * std::polar(1.0, t.freq * lo);
    const cd r = std::polar(1.0, t.freq * step);
    for (auto& v : out) {
      v += z;
      z *= r;
    }
  }
  return out;
}

CircularObjective::CircularObjective(HarmonicSum likelihood, VonMisesBelief prior, double lo,
                                     double hi)
    : likelihood_(std::move(likelihood)), prior_(prior), lo_(lo), hi_(hi) {
  if (!(hi > lo)) throw Error(ErrorCode::ValidationError, "empty search interval");
  total_ = likelihood_;
  // kappa cos(phi - mu) = Re(conj(eta) e^{j phi}).
  if (!prior_.is_uniform()) total_.add(1.0, std::conj(prior_.eta()));
}

double CircularObjective::clamp(double phi) const { return std::clamp(phi, lo_, hi_); }

double CircularObjective::value(double phi) const { return total_.value(phi).real(); }
double CircularObjective::likelihood_value(double phi) const {
  return likelihood_.value(phi).real();
}
double CircularObjective::derivative(double phi, int order) const {
  return total_.derivative(phi, order).real();
}
double CircularObjective::likelihood_derivative(double phi, int order) const {
  return likelihood_.derivative(phi, order).real();
}

namespace {

template <class F, class D>
Maximum newton_ascent(double start, double start_value, int steps, double max_step, F&& value,
                      D&& deriv, double lo, double hi) {
  Maximum best{start, start_value, deriv(start, 2)};
  for (int it = 0; it < steps; ++it) {
    const double g = deriv(best.phi, 1);
    const double h = best.curvature;
    double step = h < 0.0 ? -g / h : (g > 0.0 ? max_step : -max_step) * 0.25;
    step = std::clamp(step, -max_step, max_step);
    bool moved = false;
    for (int halving = 0; halving < 6; ++halving) {
      const double cand = std::clamp(best.phi + step, lo, hi);
      const double v = value(cand);
      if (v >= best.value) {
        moved = cand != best.phi;
        best = {cand, v, deriv(cand, 2)};
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return best;
}

}  // namespace

Maximum CircularObjective::maximize(const SearchSettings& settings) const {
  const int count = std::max(settings.grid_points, 3);
  const double step = (hi_ - lo_) / static_cast<double>(count - 1);
  const auto values = total_.grid(lo_, step, count);
  int best = 0;
  for (int g = 1; g < count; ++g) {
    if (values[g].real() > values[best].real()) best = g;
  }
  const double phi0 = lo_ + step * best;
  return newton_ascent(
      phi0, value(phi0), settings.newton_steps, step,
      [this](double p) { return value(p); },
      [this](double p, int o) { return derivative(p, o); }, lo_, hi_);
}

Maximum CircularObjective::maximize_likelihood_from(double start, int steps) const {
  const double s = clamp(start);
  return newton_ascent(
      s, likelihood_value(s), steps, (hi_ - lo_) / 64.0,
      [this](double p) { return likelihood_value(p); },
      [this](double p, int o) { return likelihood_derivative(p, o); }, lo_, hi_);
}

PeakFit fit_parabola(double left, double centre, double right) {
  PeakFit fit;
  const double denom = left - 2.0 * centre + right;
  fit.second_difference = denom;
  if (denom >= 0.0) {
    fit.value = centre;
    return fit;
  }
  fit.offset = std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
  fit.value = centre - 0.25 * (left - right) * fit.offset;
  return fit;
}

}  // namespace isac
