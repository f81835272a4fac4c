// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isac/beliefs.hpp"
#include "isac/circular_objective.hpp"
#include "isac/scenario.hpp"
#include "isac/tensor.hpp"

namespace isac {

enum class LinkVariable { Aoa, Delay, Doppler };

/// Beliefs about the parameters of one link of one user.
///
/// Each circular variable lives on its mapped phase:
///   aoa:     phi = omega_S cos(theta), searched on [-omega_S, omega_S]
///   delay:   phi = omega_F (tau + tau^IB), searched on [0, 2 pi]
///   doppler: phi = omega_T2 nu, searched on a 2 pi window around the prior
/// The *_phi members hold the unwrapped point estimates; the VM posteriors
/// include the prior and the *_msg members are the likelihood-only messages
/// passed on to the state layer.
struct LinkBeliefs {
  double aoa_phi = 0.0;
  double delay_phi = 0.0;
  double doppler_phi = 0.0;
  VonMisesBelief aoa, delay, doppler;
  VonMisesBelief aoa_msg, delay_msg, doppler_msg;
  ComplexGaussianBelief gain;
  ComplexGaussianBelief gain_msg;
  bool active = true;
  bool fitted = false;

  double aoa_rad(const ScenarioContext& ctx) const;
  double total_delay(const ScenarioContext& ctx) const;
  double doppler_hz(const ScenarioContext& ctx) const;
  Rank1Factors factors(std::size_t link, const ScenarioContext& ctx) const;
};

/// Per user, per link.
using LinkBeliefSet = std::vector<std::vector<LinkBeliefs>>;

struct VmpUpdate {
  double phi = 0.0;
  VonMisesBelief posterior;
  VonMisesBelief message;
  double objective_before = 0.0;
  double objective_after = 0.0;
  /// Factor to apply to the gain mean after the update (1 unless the gain
  /// phase is tracked).
  std::complex<double> gain_rotation{1.0, 0.0};
};

/// d/dphi arg(f(phi)^H f(phi0)) at phi0 for the link's steering tensor.
double steering_phase_slope(std::size_t link, const LinkBeliefs& current, LinkVariable which,
                            const ScenarioContext& ctx);

/// Coordinate update of one circular variable of one link.
///
/// `residual` must already exclude every other path.  The objective is the
/// expected log-likelihood under the current gain belief plus the VM prior;
/// its argmax becomes the new point estimate unless it would score below the
/// current one.  Throws NoInformativeData when the data term vanishes.
VmpUpdate vmp_update_parameter(const ReceivedTensor& residual, std::size_t link,
                               const LinkBeliefs& current, LinkVariable which,
                               const VonMisesBelief& prior, double prior_center,
                               double noise_power, const ScenarioContext& ctx,
                               const SearchSettings& search, int likelihood_newton_steps = 3);

/// f(phi)^H residual and ||f(phi)||^2 as harmonic sums in the mapped phase of
/// one variable, all other parameters held at their current values, together
/// with the admissible search interval.
struct VariableCorrelation {
  HarmonicSum correlation;
  HarmonicSum norm;  // its real part is the squared norm
  double lo = 0.0;
  double hi = 0.0;
};
VariableCorrelation variable_correlation(const ReceivedTensor& residual, std::size_t link,
                                         const LinkBeliefs& current, LinkVariable which,
                                         double prior_center, const ScenarioContext& ctx);

/// Likelihood of the mapped phase as a harmonic sum, without the prior, and
/// the admissible search interval.
struct VariableLikelihood {
  HarmonicSum likelihood;
  double lo = 0.0;
  double hi = 0.0;
  double linear_scale = 0.0;
};
VariableLikelihood variable_likelihood(const ReceivedTensor& residual, std::size_t link,
                                       const LinkBeliefs& current, LinkVariable which,
                                       double prior_center, double noise_power,
                                       const ScenarioContext& ctx);

struct GainUpdate {
  ComplexGaussianBelief posterior;
  /// Least-squares message a^H r / ||a||^2 with variance sigma^2 / ||a||^2.
  ComplexGaussianBelief message;
};

/// Linear-Gaussian MMSE estimate of the path weight for fixed steering.
GainUpdate mmse_gain_update(const ReceivedTensor& residual, const Rank1Factors& factors,
                            const ComplexGaussianBelief& prior, double noise_power);

/// Energy removed from `residual` by the best-fitting multiple of `factors`.
double explained_energy(const ReceivedTensor& residual, const Rank1Factors& factors);

/// One greedy blockage decision for the links of one user: links whose
/// explained energy exceeds `threshold` are active, the others are not, and
/// when none qualifies the strongest link stays active.
std::vector<int> update_blockage(std::span<const double> explained, double threshold);

struct DopplerObservation {
  std::size_t link = 0;
  VonMisesBelief message;
  /// Used to pick the alias of the mapped phase.
  double predicted_doppler = 0.0;
};

/// Gaussian message on the velocity from radial Doppler constraints, with the
/// directions evaluated at `position`.  Links with kappa < kappa_min are
/// ignored; the result is rank deficient with fewer than two directions.
GaussianBelief velocity_message_from_dopplers(std::span<const DopplerObservation> observations,
                                              const Vec2& position, const ScenarioContext& ctx,
                                              double kappa_min = kKappaMin);

struct RangeBearingObservation {
  std::size_t link = 0;
  VonMisesBelief aoa_message;
  VonMisesBelief delay_message;
  /// Used to pick the alias of the delay phase (user-side delay, s).
  double predicted_delay = 0.0;
};

/// Position message of a single link by polar-to-Cartesian propagation.
/// Throws TooDiffuse when either message is below kappa_min.
GaussianBelief position_message_for_link(const RangeBearingObservation& obs,
                                         const ScenarioContext& ctx,
                                         double kappa_min = kKappaMin);
/// Fusion of the per-link messages that qualify.  Throws AllNonInformative
/// when none does.
GaussianBelief position_message_from_links(std::span<const RangeBearingObservation> observations,
                                           const ScenarioContext& ctx,
                                           double kappa_min = kKappaMin);

struct SymbolObservation {
  ComplexGaussianBelief gain_message;
  /// Full path gain estimate beta^UB or beta^UI beta^IB including its phase.
  cd path_gain{1.0, 0.0};
};

/// Pseudo-observation of the symbol carried by one link.
ComplexGaussianBelief symbol_pseudo_observation(const SymbolObservation& obs, double tx_power);
/// Symbol posterior from all links combined with the CN(0, 1) prior.
/// Throws NoActiveLinks when `observations` is empty.
ComplexGaussianBelief symbol_message(std::span<const SymbolObservation> observations,
                                     double tx_power);

/// Phase references chi_hat of the random path-gain phases of one user.
/// Links without a reference carry NaN.  The strongest active link that
/// already has a reference keeps it; when there is none, the strongest active
/// link is anchored to a zero symbol phase.  Every other active link is
/// re-referenced to the symbol estimated from the anchor.
struct ReferenceInput {
  bool active = false;
  ComplexGaussianBelief gain_message;
  double amplitude = 0.0;  // |beta_hat| from the free-space model
  cd static_gain{1.0, 0.0};
  double strength = 0.0;
};
std::vector<double> resolve_phase_references(std::span<const double> persisted,
                                             std::span<const ReferenceInput> links,
                                             double tx_power);

}  // namespace isac
