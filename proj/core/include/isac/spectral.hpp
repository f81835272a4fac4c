// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstddef>

#include "isac/hvmp_messages.hpp"
#include "isac/scenario.hpp"
#include "isac/tensor.hpp"

namespace isac {

struct SpectralSettings {
  /// Grid points per full span of each mapped phase.
  int grid_points = 512;
  /// Rounds of delay / AOA / Doppler peak searches.
  int alternations = 2;
  /// Half-width of the search window in predicted standard deviations.
  double gate_sigmas = 4.0;
  /// Minimum half-width of the search window in grid cells.
  int min_gate_cells = 8;
  /// Peak-to-median ratio of the full-span delay spectrum below which a link
  /// is declared empty.
  double nopeak_ratio_db = 10.0;

  void validate() const;
};

/// Where to look for a path: predicted mapped phases and their standard
/// deviations (same conventions as LinkBeliefs).
struct SpectralGate {
  double aoa_phi = 0.0;
  double delay_phi = 0.0;
  double doppler_phi = 0.0;
  double aoa_sd = 0.0;
  double delay_sd = 0.0;
  double doppler_sd = 0.0;
};

/// Peak of one mapped phase.
struct PeakEstimate {
  double phi = 0.0;
  /// -d^2 S / d phi^2 at the peak, S being the explained energy.
  double neg_curvature = 0.0;
  double cell = 0.0;
  double half_window = 0.0;

  /// sigma^2 / (-S''), floored at cell^2 / 12; the window variance when the
  /// spectrum is not concave at the peak.
  double variance(double noise_power) const;
};

struct SpectralEstimate {
  std::size_t link = 0;
  PeakEstimate aoa_peak, delay_peak, doppler_peak;
  double aoa = 0.0;      // rad
  double delay = 0.0;    // total delay, s
  double doppler = 0.0;  // Hz
  cd gain{0.0, 0.0};
  double steering_norm_sq = 0.0;
  double explained_energy = 0.0;
  double peak_to_median = 0.0;

  /// Variances of (aoa, total delay, doppler) in physical units.
  Eigen::Vector3d variances(const ScenarioContext& ctx, double noise_power) const;
  Rank1Factors factors(const ScenarioContext& ctx) const;
};

/// Gated per-mode periodogram search for one path on `residual`, with
/// quadratic peak interpolation.  Throws NoPeak when the full-span delay
/// spectrum at the predicted angle and Doppler is flat.
SpectralEstimate spectral_estimate_link(const ReceivedTensor& residual, std::size_t link,
                                        const SpectralGate& gate, const ScenarioContext& ctx,
                                        const SpectralSettings& settings);

}  // namespace isac
