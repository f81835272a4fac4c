// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/tensor.hpp"

namespace isac {

using Rng = std::mt19937_64;

/// OFDM/array dimensions of the ISAC sub-block.
struct WaveformConfig {
  int num_bs_elements = 6;     // M_B
  int num_ris_elements = 64;   // M_I
  int num_subcarriers = 12;    // N
  int isac_subcarriers = 12;   // N0
  int subcarrier_stride = 1;   // delta N
  double subcarrier_spacing = 10e6 / 12.0;  // delta f, Hz
  int symbols_per_group = 12;  // Q1
  int num_groups = 12;         // Q2
  int group_stride = 200;      // delta Q, in symbols
  int cyclic_prefix = 3;       // J, samples
  double element_spacing = 0.5;  // d / lambda

  /// OFDM symbol period (N + J) / (N delta f).
  double symbol_period() const;
  double omega_s() const;   // 2 pi d / lambda
  double omega_f() const;   // 2 pi delta N delta f
  double omega_t1() const;  // 2 pi delta t
  double omega_t2() const;  // 2 pi delta Q delta t
  /// Unambiguous delay span 1 / (delta N delta f).
  double max_delay() const;
  /// Doppler alias spacing 1 / (delta Q delta t).
  double doppler_period() const;

  ReceivedTensor::Shape tensor_shape() const;
  void validate() const;
};

/// Static RIS-to-BS leg of a cascaded path.
struct RisLink {
  cd gain{1.0, 0.0};   // beta^IB
  double delay = 0.0;  // tau^IB, s
  double aoa_at_bs = 0.0;  // xi, rad
  double aod = 0.0;        // varphi, rad
  CMat phase_profile;      // M_I x Q1, unit modulus

  void validate(const WaveformConfig& cfg) const;
};

struct RisDeployment {
  AnchorGeometry anchor;
  RisLink link;
};

/// Ground truth of one user in one frame.  Link index 0 is the direct
/// user-BS link and index r + 1 the user-RIS r link.
struct UserTruth {
  UserState state;
  cd symbol{1.0, 0.0};
  std::vector<int> blockage;   // alpha per link, 0 or 1
  std::vector<cd> path_gain;   // beta per link
};

struct FrameTruth {
  std::vector<UserTruth> users;
  double tx_power = 1.0;  // P, W

  void validate(std::size_t num_ris) const;
};

CVec steering_ula(double angle, int length, double omega_s);
/// Entry m is exp(-j omega m param); shared by the frequency and both time
/// steering vectors.
CVec steering_progression(double param, int length, double omega);
CVec steering_freq(double delay, int length, double omega_f);
CVec steering_time1(double doppler, int length, double omega_t1);
CVec steering_time2(double doppler, int length, double omega_t2);

/// Psi^T (a_I(aod) .* a_I(aoa)), without the within-group Doppler factor.
CVec ris_projection(double aoa, const RisLink& link, const WaveformConfig& cfg);
/// Full RIS steering vector of length Q1.
CVec ris_steering(double aoa, double doppler, const RisLink& link, const WaveformConfig& cfg);

CMat random_phase_profile(int num_elements, int symbols_per_group, std::uint64_t seed);

/// Builds the static RIS-to-BS leg from the deployment geometry.
RisLink make_ris_link(const AnchorGeometry& bs, const AnchorGeometry& ris, CMat phase_profile,
                      cd gain, const PhysicalConstants& consts);

/// Mode factors of the direct path with the given parameters.
Rank1Factors bs_path_factors(double aoa, double delay, double doppler, const WaveformConfig& cfg);
/// Mode factors of a cascaded path; `total_delay` already includes tau^IB.
Rank1Factors ris_path_factors(double aoa, double total_delay, double doppler,
                              const RisLink& link, const WaveformConfig& cfg);

/// Free-space amplitude lambda / (4 pi d).
double free_space_amplitude(double distance, const PhysicalConstants& consts);

ReceivedTensor synthesize_noiseless(const FrameTruth& truth, const AnchorGeometry& bs,
                                    std::span<const RisDeployment> ris,
                                    const WaveformConfig& cfg, const PhysicalConstants& consts);
void add_noise(ReceivedTensor& tensor, double noise_power, Rng& rng);
ReceivedTensor synthesize_tensor(const FrameTruth& truth, const AnchorGeometry& bs,
                                 std::span<const RisDeployment> ris, const WaveformConfig& cfg,
                                 const PhysicalConstants& consts, double noise_power, Rng& rng);

/// Per-entry noise variance giving ||signal||^2 / E||noise||^2 = 10^(snr/10).
double noise_power_for_snr(const ReceivedTensor& signal, double target_snr_db);

/// Draws blockage indicators for 1 + num_ris links, redrawing until at least
/// one link is unblocked.
std::vector<int> sample_blockage(std::size_t num_ris, double bs_block_prob, double ris_block_prob,
                                 Rng& rng);

/// Circularly-symmetric standard complex Gaussian sample.
cd sample_cn(Rng& rng, double variance = 1.0);

}  // namespace isac
