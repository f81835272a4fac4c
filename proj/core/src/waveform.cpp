// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/waveform.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "isac/errors.hpp"

namespace isac {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double WaveformConfig::symbol_period() const {
  return static_cast<double>(num_subcarriers + cyclic_prefix) /
         (static_cast<double>(num_subcarriers) * subcarrier_spacing);
}
double WaveformConfig::omega_s() const { return kTwoPi * element_spacing; }
double WaveformConfig::omega_f() const { return kTwoPi * subcarrier_stride * subcarrier_spacing; }
double WaveformConfig::omega_t1() const { return kTwoPi * symbol_period(); }
double WaveformConfig::omega_t2() const { return kTwoPi * group_stride * symbol_period(); }
double WaveformConfig::max_delay() const { return 1.0 / (subcarrier_stride * subcarrier_spacing); }
double WaveformConfig::doppler_period() const { return 1.0 / (group_stride * symbol_period()); }

ReceivedTensor::Shape WaveformConfig::tensor_shape() const {
  return {static_cast<std::size_t>(num_bs_elements), static_cast<std::size_t>(symbols_per_group),
          static_cast<std::size_t>(isac_subcarriers), static_cast<std::size_t>(num_groups)};
}

void WaveformConfig::validate() const {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::ValidationError, std::string(what) + " must be positive");
  };
  positive(num_bs_elements > 0, "num_bs_elements");
  positive(num_ris_elements > 0, "num_ris_elements");
  positive(num_subcarriers > 0, "num_subcarriers");
  positive(isac_subcarriers > 0, "isac_subcarriers");
  positive(subcarrier_stride > 0, "subcarrier_stride");
  positive(subcarrier_spacing > 0.0, "subcarrier_spacing");
  positive(symbols_per_group > 0, "symbols_per_group");
  positive(num_groups > 0, "num_groups");
  positive(group_stride > 0, "group_stride");
  positive(cyclic_prefix >= 0, "cyclic_prefix");
  positive(element_spacing > 0.0, "element_spacing");
  if (1 + (isac_subcarriers - 1) * subcarrier_stride > num_subcarriers) {
    throw Error(ErrorCode::ValidationError,
                "isac_subcarriers: 1 + (N0 - 1) * subcarrier_stride exceeds num_subcarriers");
  }
  if (group_stride < symbols_per_group) {
    throw Error(ErrorCode::ValidationError,
                "group_stride: symbol groups overlap (group_stride < symbols_per_group)");
  }
}

void RisLink::validate(const WaveformConfig& cfg) const {
  if (phase_profile.rows() != cfg.num_ris_elements ||
      phase_profile.cols() != cfg.symbols_per_group) {
    throw Error(ErrorCode::ConfigMismatch, "RIS phase profile must be M_I x Q1");
  }
  for (Eigen::Index i = 0; i < phase_profile.size(); ++i) {
    if (std::abs(std::abs(phase_profile.data()[i]) - 1.0) > 1e-12) {
      throw Error(ErrorCode::ValidationError, "RIS phase profile entries must be unit modulus");
    }
  }
}

void FrameTruth::validate(std::size_t num_ris) const {
  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto& u = users[k];
    if (u.blockage.size() != num_ris + 1 || u.path_gain.size() != num_ris + 1) {
      throw Error(ErrorCode::ConfigMismatch,
                  "user " + std::to_string(k) + " needs one blockage flag and gain per link");
    }
    int active = 0;
    for (int a : u.blockage) {
      if (a != 0 && a != 1) throw Error(ErrorCode::ValidationError, "blockage must be 0 or 1");
      active += a;
    }
    if (active < 1) {
      throw Error(ErrorCode::ValidationError,
                  "user " + std::to_string(k) + " has every link blocked");
    }
  }
  if (!(tx_power > 0.0)) throw Error(ErrorCode::ValidationError, "tx_power must be positive");
}

CVec steering_ula(double angle, int length, double omega_s) {
  CVec out(length);
  const double phase = omega_s * std::cos(angle);
  for (int m = 0; m < length; ++m) out[m] = std::polar(1.0, phase * m);
  return out;
}

CVec steering_progression(double param, int length, double omega) {
  CVec out(length);
  const double phase = -omega * param;
  for (int m = 0; m < length; ++m) out[m] = std::polar(1.0, phase * m);
  return out;
}

CVec steering_freq(double delay, int length, double omega_f) {
  return steering_progression(delay, length, omega_f);
}
CVec steering_time1(double doppler, int length, double omega_t1) {
  return steering_progression(doppler, length, omega_t1);
}
CVec steering_time2(double doppler, int length, double omega_t2) {
  return steering_progression(doppler, length, omega_t2);
}

CVec ris_projection(double aoa, const RisLink& link, const WaveformConfig& cfg) {
  const int mi = cfg.num_ris_elements;
  const CVec combined = steering_ula(link.aod, mi, cfg.omega_s())
                            .cwiseProduct(steering_ula(aoa, mi, cfg.omega_s()));
  return link.phase_profile.transpose() * combined;
}

CVec ris_steering(double aoa, double doppler, const RisLink& link, const WaveformConfig& cfg) {
  return ris_projection(aoa, link, cfg)
      .cwiseProduct(steering_time1(doppler, cfg.symbols_per_group, cfg.omega_t1()));
}

CMat random_phase_profile(int num_elements, int symbols_per_group, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  CMat out(num_elements, symbols_per_group);
  for (int q = 0; q < symbols_per_group; ++q) {
    for (int m = 0; m < num_elements; ++m) out(m, q) = std::polar(1.0, phase(rng));
  }
  return out;
}

RisLink make_ris_link(const AnchorGeometry& bs, const AnchorGeometry& ris, CMat phase_profile,
                      cd gain, const PhysicalConstants& consts) {
  RisLink link;
  link.gain = gain;
  const UserState ris_as_point{ris.position, Vec2::Zero()};
  const UserState bs_as_point{bs.position, Vec2::Zero()};
  link.delay = delay_from_state(ris_as_point, bs, consts);
  link.aoa_at_bs = aoa_from_state(ris_as_point, bs);
  link.aod = aoa_from_state(bs_as_point, ris);
  link.phase_profile = std::move(phase_profile);
  return link;
}

Rank1Factors bs_path_factors(double aoa, double delay, double doppler, const WaveformConfig& cfg) {
  Rank1Factors f;
  f.mode[0] = steering_ula(aoa, cfg.num_bs_elements, cfg.omega_s());
  f.mode[1] = steering_time1(doppler, cfg.symbols_per_group, cfg.omega_t1());
  f.mode[2] = steering_freq(delay, cfg.isac_subcarriers, cfg.omega_f());
  f.mode[3] = steering_time2(doppler, cfg.num_groups, cfg.omega_t2());
  return f;
}

Rank1Factors ris_path_factors(double aoa, double total_delay, double doppler,
                              const RisLink& link, const WaveformConfig& cfg) {
  Rank1Factors f;
  f.mode[0] = steering_ula(link.aoa_at_bs, cfg.num_bs_elements, cfg.omega_s());
  f.mode[1] = ris_steering(aoa, doppler, link, cfg);
  f.mode[2] = steering_freq(total_delay, cfg.isac_subcarriers, cfg.omega_f());
  f.mode[3] = steering_time2(doppler, cfg.num_groups, cfg.omega_t2());
  return f;
}

double free_space_amplitude(double distance, const PhysicalConstants& consts) {
  return consts.wavelength / (4.0 * std::numbers::pi * distance);
}

ReceivedTensor synthesize_noiseless(const FrameTruth& truth, const AnchorGeometry& bs,
                                    std::span<const RisDeployment> ris,
                                    const WaveformConfig& cfg, const PhysicalConstants& consts) {
  truth.validate(ris.size());
  for (const auto& dep : ris) dep.link.validate(cfg);
  ReceivedTensor out(cfg.tensor_shape());
  const double amp = std::sqrt(truth.tx_power);
  for (const auto& user : truth.users) {
    if (user.blockage[0] != 0) {
      const auto p = link_params(user.state, bs, consts);
      out.add_rank1(amp * user.symbol * user.path_gain[0],
                    bs_path_factors(p.aoa, p.delay, p.doppler, cfg));
    }
    for (std::size_t r = 0; r < ris.size(); ++r) {
      if (user.blockage[r + 1] == 0) continue;
      const auto p = link_params(user.state, ris[r].anchor, consts);
      out.add_rank1(amp * user.symbol * user.path_gain[r + 1] * ris[r].link.gain,
                    ris_path_factors(p.aoa, p.delay + ris[r].link.delay, p.doppler, ris[r].link,
                                     cfg));
    }
  }
  return out;
}

cd sample_cn(Rng& rng, double variance) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

void add_noise(ReceivedTensor& tensor, double noise_power, Rng& rng) {
  if (!(noise_power > 0.0)) return;
  for (auto& x : tensor.data()) x += sample_cn(rng, noise_power);
}

ReceivedTensor synthesize_tensor(const FrameTruth& truth, const AnchorGeometry& bs,
                                 std::span<const RisDeployment> ris, const WaveformConfig& cfg,
                                 const PhysicalConstants& consts, double noise_power, Rng& rng) {
  auto out = synthesize_noiseless(truth, bs, ris, cfg, consts);
  add_noise(out, noise_power, rng);
  return out;
}

double noise_power_for_snr(const ReceivedTensor& signal, double target_snr_db) {
  const double energy = signal.frobenius_sq();
  if (!(energy > 0.0)) throw Error(ErrorCode::ZeroSignal, "signal tensor has zero energy");
  return energy / (static_cast<double>(signal.size()) * std::pow(10.0, target_snr_db / 10.0));
}

std::vector<int> sample_blockage(std::size_t num_ris, double bs_block_prob, double ris_block_prob,
                                 Rng& rng) {
  std::bernoulli_distribution bs_blocked(bs_block_prob);
  std::bernoulli_distribution ris_blocked(ris_block_prob);
  std::vector<int> alpha(num_ris + 1, 1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    alpha[0] = bs_blocked(rng) ? 0 : 1;
    int active = alpha[0];
    for (std::size_t r = 0; r < num_ris; ++r) {
      alpha[r + 1] = ris_blocked(rng) ? 0 : 1;
      active += alpha[r + 1];
    }
    if (active > 0) return alpha;
  }
  // Both probabilities at one: keep the direct link so the frame stays usable.
  std::fill(alpha.begin(), alpha.end(), 0);
  alpha[0] = 1;
  return alpha;
}

}  // namespace isac
