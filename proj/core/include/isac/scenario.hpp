// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstddef>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/mobility.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// Everything an estimator may assume known about the deployment: the
/// waveform, both anchor kinds, the static RIS-to-BS legs and the motion model.
/// Link index 0 is the direct link, index r + 1 goes through RIS r.
class ScenarioContext {
 public:
  ScenarioContext() = default;
  ScenarioContext(WaveformConfig waveform, PhysicalConstants consts, AnchorGeometry bs,
                  std::vector<RisDeployment> ris, double tx_power, MotionModel motion);

  const WaveformConfig& waveform() const { return waveform_; }
  const PhysicalConstants& consts() const { return consts_; }
  const AnchorGeometry& bs() const { return bs_; }
  const std::vector<RisDeployment>& ris() const { return ris_; }
  double tx_power() const { return tx_power_; }
  const MotionModel& motion() const { return motion_; }

  std::size_t num_links() const { return 1 + ris_.size(); }
  bool is_ris(std::size_t link) const { return link > 0; }
  /// Anchor whose geometry the user-side parameters refer to.
  const AnchorGeometry& anchor(std::size_t link) const;
  /// tau^IB of the link (0 for the direct link).
  double static_delay(std::size_t link) const;
  /// beta^IB of the link (1 for the direct link).
  cd static_gain(std::size_t link) const;

  /// Tensor factors of a path on `link`; `total_delay` includes tau^IB.
  Rank1Factors path_factors(std::size_t link, double aoa, double total_delay,
                            double doppler) const;

  /// RIS r combining weights B[m, q] = Psi[m, q] * a_I(aod)[m], so that the
  /// projected steering is B^T a_I(aoa).
  const CMat& ris_weights(std::size_t r) const { return ris_weights_[r]; }
  /// Autocorrelation R_d = sum_{m - m' = d} sum_q B[m, q] conj(B[m', q]) for
  /// d = 0 .. M_I - 1, giving ||B^T a_I||^2 = R_0 + 2 Re sum_d R_d e^{j d phi}.
  const CVec& ris_autocorrelation(std::size_t r) const { return ris_autocorr_[r]; }

  void validate() const;

 private:
  WaveformConfig waveform_;
  PhysicalConstants consts_;
  AnchorGeometry bs_;
  std::vector<RisDeployment> ris_;
  double tx_power_ = 1.0;
  MotionModel motion_;
  std::vector<CMat> ris_weights_;
  std::vector<CVec> ris_autocorr_;
};

}  // namespace isac
