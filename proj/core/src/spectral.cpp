// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "isac/errors.hpp"

namespace isac {

void SpectralSettings::validate() const {
  if (grid_points < 8 || alternations < 1 || min_gate_cells < 1 || !(gate_sigmas > 0.0)) {
    throw Error(ErrorCode::ValidationError, "spectral settings out of range");
  }
}

double PeakEstimate::variance(double noise_power) const {
  const double floor = cell * cell / 12.0;
  if (!(neg_curvature > 0.0)) return std::max(floor, half_window * half_window / 3.0);
  return std::max(noise_power / neg_curvature, floor);
}

Eigen::Vector3d SpectralEstimate::variances(const ScenarioContext& ctx, double noise_power) const {
  const auto& wf = ctx.waveform();
  const double s = std::max(std::sin(aoa), 1e-6);
  return {aoa_peak.variance(noise_power) / (wf.omega_s() * wf.omega_s() * s * s),
          delay_peak.variance(noise_power) / (wf.omega_f() * wf.omega_f()),
          doppler_peak.variance(noise_power) / (wf.omega_t2() * wf.omega_t2())};
}

Rank1Factors SpectralEstimate::factors(const ScenarioContext& ctx) const {
  return ctx.path_factors(link, aoa, delay, doppler);
}

namespace {

std::vector<double> periodogram(const VariableCorrelation& vc, double lo, double cell, int count) {
  const auto c = vc.correlation.grid(lo, cell, count);
  const auto n = vc.norm.grid(lo, cell, count);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int g = 0; g < count; ++g) out[g] = std::norm(c[g]) / std::max(n[g].real(), 1e-300);
  return out;
}

PeakEstimate search_variable(const ReceivedTensor& residual, std::size_t link,
                             const LinkBeliefs& current, LinkVariable which, double center,
                             double sd, const ScenarioContext& ctx,
                             const SpectralSettings& settings) {
  const auto vc = variable_correlation(residual, link, current, which, center, ctx);
  const double span = vc.hi - vc.lo;
  PeakEstimate out;
  out.cell = span / settings.grid_points;
  double hw = std::max(settings.gate_sigmas * sd, settings.min_gate_cells * out.cell);
  hw = std::min(hw, span / 2.0);
  const double lo = std::max(vc.lo, center - hw);
  const double hi = std::min(vc.hi, center + hw);
  out.half_window = 0.5 * (hi - lo);
  const int count = std::max(3, static_cast<int>(std::floor((hi - lo) / out.cell)) + 1);
  const auto s = periodogram(vc, lo, out.cell, count);
  const int best = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
  double offset = 0.0;
  if (best > 0 && best + 1 < count) {
    const auto fit = fit_parabola(s[best - 1], s[best], s[best + 1]);
    offset = fit.offset;
    out.neg_curvature = -fit.second_difference / (out.cell * out.cell);
  }
  out.phi = std::clamp(lo + (best + offset) * out.cell, vc.lo, vc.hi);
  return out;
}

}  // namespace

SpectralEstimate spectral_estimate_link(const ReceivedTensor& residual, std::size_t link,
                                        const SpectralGate& gate, const ScenarioContext& ctx,
                                        const SpectralSettings& settings) {
  settings.validate();
  LinkBeliefs cur;
  cur.aoa_phi = gate.aoa_phi;
  cur.delay_phi = wrap_2pi(gate.delay_phi);
  cur.doppler_phi = gate.doppler_phi;

  SpectralEstimate out;
  out.link = link;
  {
    const auto vc =
        variable_correlation(residual, link, cur, LinkVariable::Delay, gate.doppler_phi, ctx);
    const int count = settings.grid_points;
    auto s = periodogram(vc, vc.lo, (vc.hi - vc.lo) / count, count);
    const double peak = *std::max_element(s.begin(), s.end());
    std::nth_element(s.begin(), s.begin() + count / 2, s.end());
    const double median = s[count / 2];
    out.peak_to_median = median > 0.0 ? peak / median : 0.0;
    if (!(out.peak_to_median >= std::pow(10.0, settings.nopeak_ratio_db / 10.0))) {
      throw Error(ErrorCode::NoPeak, "delay spectrum has no dominant peak");
    }
  }

  for (int a = 0; a < settings.alternations; ++a) {
    out.delay_peak = search_variable(residual, link, cur, LinkVariable::Delay, cur.delay_phi,
                                     gate.delay_sd, ctx, settings);
    cur.delay_phi = out.delay_peak.phi;
    out.aoa_peak = search_variable(residual, link, cur, LinkVariable::Aoa, cur.aoa_phi,
                                   gate.aoa_sd, ctx, settings);
    cur.aoa_phi = out.aoa_peak.phi;
    // The Doppler window stays centred on the prediction so that the alias
    // cannot drift across alternations.
    auto dp = search_variable(residual, link, cur, LinkVariable::Doppler, gate.doppler_phi,
                              gate.doppler_sd, ctx, settings);
    out.doppler_peak = dp;
    cur.doppler_phi = dp.phi;
  }

  out.aoa = cur.aoa_rad(ctx);
  out.delay = cur.total_delay(ctx);
  out.doppler = cur.doppler_hz(ctx);
  const auto f = cur.factors(link, ctx);
  out.steering_norm_sq = f.norm_sq();
  const cd h = residual.inner(f);
  out.gain = h / out.steering_norm_sq;
  out.explained_energy = std::norm(h) / out.steering_norm_sq;
  return out;
}

}  // namespace isac
