// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/scenario.hpp"

#include <cmath>

#include "isac/errors.hpp"

namespace isac {

ScenarioContext::ScenarioContext(WaveformConfig waveform, PhysicalConstants consts,
                                 AnchorGeometry bs, std::vector<RisDeployment> ris,
                                 double tx_power, MotionModel motion)
    : waveform_(waveform),
      consts_(consts),
      bs_(bs),
      ris_(std::move(ris)),
      tx_power_(tx_power),
      motion_(motion) {
  validate();
  const int mi = waveform_.num_ris_elements;
  for (const auto& dep : ris_) {
    const CVec aod = steering_ula(dep.link.aod, mi, waveform_.omega_s());
    CMat b = aod.asDiagonal() * dep.link.phase_profile;
    CVec r = CVec::Zero(mi);
    for (int d = 0; d < mi; ++d) {
      for (int m = d; m < mi; ++m) r[d] += b.row(m).dot(b.row(m - d));
    }
    // dot() conjugates its left argument; R_d needs B[m] conj(B[m-d]).
    ris_autocorr_.push_back(r.conjugate());
    ris_weights_.push_back(std::move(b));
  }
}

const AnchorGeometry& ScenarioContext::anchor(std::size_t link) const {
  return link == 0 ? bs_ : ris_.at(link - 1).anchor;
}

double ScenarioContext::static_delay(std::size_t link) const {
  return link == 0 ? 0.0 : ris_.at(link - 1).link.delay;
}

cd ScenarioContext::static_gain(std::size_t link) const {
  return link == 0 ? cd{1.0, 0.0} : ris_.at(link - 1).link.gain;
}

Rank1Factors ScenarioContext::path_factors(std::size_t link, double aoa, double total_delay,
                                           double doppler) const {
  if (link == 0) return bs_path_factors(aoa, total_delay, doppler, waveform_);
  return ris_path_factors(aoa, total_delay, doppler, ris_.at(link - 1).link, waveform_);
}

void ScenarioContext::validate() const {
  waveform_.validate();
  consts_.validate();
  bs_.validate();
  if (bs_.num_elements != waveform_.num_bs_elements) {
    throw Error(ErrorCode::ConfigMismatch, "BS element count differs from the waveform M_B");
  }
  for (const auto& dep : ris_) {
    dep.anchor.validate();
    if (dep.anchor.num_elements != waveform_.num_ris_elements) {
      throw Error(ErrorCode::ConfigMismatch, "RIS element count differs from the waveform M_I");
    }
    dep.link.validate(waveform_);
  }
  if (!(tx_power_ > 0.0)) throw Error(ErrorCode::ValidationError, "tx_power must be positive");
  motion_.validate();
}

}  // namespace isac
