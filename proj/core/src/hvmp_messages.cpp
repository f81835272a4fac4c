// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/hvmp_messages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "isac/errors.hpp"

namespace isac {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNoInformativeData = 1e-12;
}  // namespace

double LinkBeliefs::aoa_rad(const ScenarioContext& ctx) const {
  return std::acos(std::clamp(aoa_phi / ctx.waveform().omega_s(), -1.0, 1.0));
}

double LinkBeliefs::total_delay(const ScenarioContext& ctx) const {
  return delay_phi / ctx.waveform().omega_f();
}

double LinkBeliefs::doppler_hz(const ScenarioContext& ctx) const {
  return doppler_phi / ctx.waveform().omega_t2();
}

Rank1Factors LinkBeliefs::factors(std::size_t link, const ScenarioContext& ctx) const {
  return ctx.path_factors(link, aoa_rad(ctx), total_delay(ctx), doppler_hz(ctx));
}

VariableCorrelation variable_correlation(const ReceivedTensor& residual, std::size_t link,
                                         const LinkBeliefs& current, LinkVariable which,
                                         double prior_center, const ScenarioContext& ctx) {
  const auto& wf = ctx.waveform();
  const Rank1Factors f = current.factors(link, ctx);
  VariableCorrelation out;

  switch (which) {
    case LinkVariable::Aoa: {
      out.lo = -wf.omega_s();
      out.hi = wf.omega_s();
      if (!ctx.is_ris(link)) {
        const CVec b = residual.project_mode(0, f);
        for (Eigen::Index m = 0; m < b.size(); ++m) out.correlation.add(-static_cast<double>(m), b[m]);
        out.norm.add(0.0, f.norm_sq());
        break;
      }
      const std::size_t r = link - 1;
      const CVec b = residual.project_mode(1, f);
      const CVec t1 = steering_time1(current.doppler_hz(ctx), wf.symbols_per_group, wf.omega_t1());
      const CVec coeff = ctx.ris_weights(r).conjugate() * t1.conjugate().cwiseProduct(b);
      for (Eigen::Index m = 0; m < coeff.size(); ++m) {
        out.correlation.add(-static_cast<double>(m), coeff[m]);
      }
      const double others =
          f.mode[0].squaredNorm() * f.mode[2].squaredNorm() * f.mode[3].squaredNorm();
      const CVec& rd = ctx.ris_autocorrelation(r);
      out.norm.add(0.0, others * rd[0]);
      for (Eigen::Index d = 1; d < rd.size(); ++d) {
        out.norm.add(static_cast<double>(d), 2.0 * others * rd[d]);
      }
      break;
    }
    case LinkVariable::Delay: {
      out.lo = 0.0;
      out.hi = 2.0 * kPi;
      const CVec b = residual.project_mode(2, f);
      for (Eigen::Index n = 0; n < b.size(); ++n) out.correlation.add(static_cast<double>(n), b[n]);
      out.norm.add(0.0, f.norm_sq());
      break;
    }
    case LinkVariable::Doppler: {
      out.lo = prior_center - kPi;
      out.hi = prior_center + kPi;
      const CMat m = residual.project_time_modes(f);
      const double ratio = wf.omega_t1() / wf.omega_t2();
      CVec g = CVec::Ones(wf.symbols_per_group);
      if (ctx.is_ris(link)) g = ris_projection(current.aoa_rad(ctx), ctx.ris()[link - 1].link, wf);
      for (Eigen::Index q1 = 0; q1 < m.rows(); ++q1) {
        for (Eigen::Index q2 = 0; q2 < m.cols(); ++q2) {
          out.correlation.add(static_cast<double>(q1) * ratio + static_cast<double>(q2),
                              std::conj(g[q1]) * m(q1, q2));
        }
      }
      out.norm.add(0.0, f.norm_sq());
      break;
    }
  }
  return out;
}

namespace {

/// Scales the correlation by the gain and appends the varying norm terms.  A
/// non-zero `slope` rotates the correlation so the gain phase follows phi.
VariableLikelihood assemble_likelihood(VariableCorrelation corr, const LinkBeliefs& current,
                                       double noise_power, double slope, double phi0) {
  const double second_moment =
      std::norm(current.gain.mean) +
      (current.gain.is_informative() ? current.gain.variance : 0.0);
  VariableLikelihood out;
  out.lo = corr.lo;
  out.hi = corr.hi;
  corr.correlation.scale(2.0 / noise_power * std::conj(current.gain.mean));
  out.linear_scale = corr.correlation.max_varying_coeff();
  if (slope == 0.0) {
    out.likelihood = std::move(corr.correlation);
  } else {
    for (const auto& t : corr.correlation.terms()) {
      out.likelihood.add(t.freq - slope, t.coeff * std::polar(1.0, slope * phi0));
    }
  }
  // Only the varying part of the norm shapes the objective.
  for (const auto& t : corr.norm.terms()) {
    if (t.freq != 0.0) out.likelihood.add(t.freq, -second_moment / noise_power * t.coeff);
  }
  return out;
}

}  // namespace

VariableLikelihood variable_likelihood(const ReceivedTensor& residual, std::size_t link,
                                       const LinkBeliefs& current, LinkVariable which,
                                       double prior_center, double noise_power,
                                       const ScenarioContext& ctx) {
  return assemble_likelihood(
      variable_correlation(residual, link, current, which, prior_center, ctx), current,
      noise_power, 0.0, 0.0);
}

double steering_phase_slope(std::size_t link, const LinkBeliefs& current, LinkVariable which,
                            const ScenarioContext& ctx) {
  double h = 1e-4;
  LinkBeliefs moved = current;
  switch (which) {
    case LinkVariable::Aoa:
      if (current.aoa_phi + h > ctx.waveform().omega_s()) h = -h;
      moved.aoa_phi += h;
      break;
    case LinkVariable::Delay:
      moved.delay_phi += h;
      break;
    case LinkVariable::Doppler:
      moved.doppler_phi += h;
      break;
  }
  const auto a = current.factors(link, ctx);
  const auto b = moved.factors(link, ctx);
  cd z{1.0, 0.0};
  for (std::size_t m = 0; m < a.mode.size(); ++m) z *= b.mode[m].dot(a.mode[m]);
  return std::arg(z) / h;
}

VmpUpdate vmp_update_parameter(const ReceivedTensor& residual, std::size_t link,
                               const LinkBeliefs& current, LinkVariable which,
                               const VonMisesBelief& prior, double prior_center,
                               double noise_power, const ScenarioContext& ctx,
                               const SearchSettings& search, int likelihood_newton_steps) {
  double old_phi = which == LinkVariable::Aoa     ? current.aoa_phi
                   : which == LinkVariable::Delay ? wrap_2pi(current.delay_phi)
                                                  : current.doppler_phi;
  // Tracking is a local refinement: it is used only once the prior confines
  // the variable to the main lobe around the current value.
  double slope = 0.0;
  double lobe = 0.0;
  if (search.track_gain_phase && prior.kappa() > 0.0) {
    const double c = steering_phase_slope(link, current, which, ctx);
    lobe = kPi / (2.0 * std::abs(c) + 1.0);
    if (search.gate_sigmas / std::sqrt(prior.kappa()) <= lobe) slope = c;
  }
  auto vl = assemble_likelihood(
      variable_correlation(residual, link, current, which, prior_center, ctx), current,
      noise_power, slope, old_phi);
  if (vl.linear_scale < kNoInformativeData) {
    throw Error(ErrorCode::NoInformativeData, "residual carries no information on this link");
  }
  if (slope != 0.0 && which == LinkVariable::Delay) {
    vl.lo = old_phi - kPi;
    vl.hi = old_phi + kPi;
  }
  double lo = vl.lo;
  double hi = vl.hi;
  if (prior.kappa() > 0.0) {
    const double span = vl.hi - vl.lo;
    const double half = std::max(search.gate_sigmas / std::sqrt(prior.kappa()),
                                 search.min_gate_fraction * span);
    if (2.0 * half < span) {
      const double mu = unwrap_near(prior.mu(), 0.5 * (vl.lo + vl.hi));
      lo = std::max(vl.lo, mu - half);
      hi = std::min(vl.hi, mu + half);
      if (!(hi > lo)) {
        lo = vl.lo;
        hi = vl.hi;
      }
    }
  }
  if (slope != 0.0) {
    const double a = std::max(lo, old_phi - lobe);
    const double b = std::min(hi, old_phi + lobe);
    if (b > a) {
      lo = a;
      hi = b;
    }
  }
  const CircularObjective objective(std::move(vl.likelihood), prior, lo, hi);

  const double start_phi = old_phi;
  old_phi = std::clamp(old_phi, lo, hi);

  VmpUpdate out;
  out.objective_before = objective.value(old_phi);
  Maximum best = objective.maximize(search);
  if (best.value < out.objective_before) {
    best = {old_phi, out.objective_before, objective.derivative(old_phi, 2)};
  }
  out.phi = best.phi;
  if (slope != 0.0) {
    out.gain_rotation = std::polar(1.0, slope * (best.phi - start_phi));
    if (which == LinkVariable::Delay) out.phi = wrap_2pi(best.phi);
  }
  out.objective_after = best.value;
  out.posterior = VonMisesBelief::from_mean_concentration(best.phi, std::max(-best.curvature, 0.0));

  const Maximum lik = objective.maximize_likelihood_from(best.phi, likelihood_newton_steps);
  out.message = lik.curvature < 0.0
                    ? VonMisesBelief::from_mean_concentration(lik.phi, -lik.curvature)
                    : VonMisesBelief::uniform();
  return out;
}

GainUpdate mmse_gain_update(const ReceivedTensor& residual, const Rank1Factors& factors,
                            const ComplexGaussianBelief& prior, double noise_power) {
  const double n2 = factors.norm_sq();
  if (!(n2 > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "steering tensor has zero norm");
  const cd h = residual.inner(factors);
  GainUpdate out;
  out.message = {h / n2, noise_power / n2};
  if (!prior.is_informative()) {
    out.posterior = out.message;
    return out;
  }
  const double precision = n2 / noise_power + 1.0 / prior.variance;
  out.posterior = {(h / noise_power + prior.mean / prior.variance) / precision, 1.0 / precision};
  return out;
}

double explained_energy(const ReceivedTensor& residual, const Rank1Factors& factors) {
  const double n2 = factors.norm_sq();
  if (!(n2 > 0.0)) return 0.0;
  return std::norm(residual.inner(factors)) / n2;
}

std::vector<int> update_blockage(std::span<const double> explained, double threshold) {
  std::vector<int> alpha(explained.size(), 0);
  bool any = false;
  for (std::size_t l = 0; l < explained.size(); ++l) {
    alpha[l] = explained[l] > threshold ? 1 : 0;
    any = any || alpha[l] == 1;
  }
  if (!any && !explained.empty()) {
    const auto best = std::max_element(explained.begin(), explained.end()) - explained.begin();
    alpha[static_cast<std::size_t>(best)] = 1;
  }
  return alpha;
}

GaussianBelief velocity_message_from_dopplers(std::span<const DopplerObservation> observations,
                                              const Vec2& position, const ScenarioContext& ctx,
                                              double kappa_min) {
  const double lambda = ctx.consts().wavelength;
  const double omega = ctx.waveform().omega_t2();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(2);
  int used = 0;
  for (const auto& obs : observations) {
    if (obs.message.kappa() < kappa_min) continue;
    const Vec2 rel = position - ctx.anchor(obs.link).position;
    const double dist = rel.norm();
    if (dist <= kMinAnchorDistance) continue;
    const Vec2 e = rel / dist;
    const auto g = vm_to_gaussian(obs.message, omega, obs.predicted_doppler, kappa_min);
    const double nu = g.mean()[0];
    const double var = g.covariance()(0, 0);
    precision += e * e.transpose() / (lambda * lambda * var);
    shift += e * nu / (lambda * var);
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::NoActiveLinks, "no Doppler belief is concentrated enough");
  return GaussianBelief::from_information(precision, shift);
}

GaussianBelief position_message_for_link(const RangeBearingObservation& obs,
                                         const ScenarioContext& ctx, double kappa_min) {
  if (obs.aoa_message.kappa() < kappa_min || obs.delay_message.kappa() < kappa_min) {
    throw Error(ErrorCode::TooDiffuse, "link beliefs too diffuse for a position message");
  }
  const auto& wf = ctx.waveform();
  const auto& anchor = ctx.anchor(obs.link);
  const double c0 = ctx.consts().speed_of_light;
  const double tau_ib = ctx.static_delay(obs.link);

  const auto delay = vm_to_gaussian(obs.delay_message, wf.omega_f(), obs.predicted_delay + tau_ib,
                                    kappa_min);
  const double range = c0 * (delay.mean()[0] - tau_ib);
  const double range_var = c0 * c0 * delay.covariance()(0, 0);
  if (!(range > kMinAnchorDistance)) {
    throw Error(ErrorCode::DegenerateGeometry, "delay message places the user on the anchor");
  }

  const double phi = unwrap_near(obs.aoa_message.mu(), 0.0);
  const double cos_t = std::clamp(phi / wf.omega_s(), -1.0 + 1e-9, 1.0 - 1e-9);
  const double sin_t = std::sqrt(1.0 - cos_t * cos_t);
  const double cos_var = 1.0 / (obs.aoa_message.kappa() * wf.omega_s() * wf.omega_s());
  const double theta_var = cos_var / (sin_t * sin_t);

  const Vec2 e = anchor.orientation;
  const Vec2 n = anchor.left_normal();
  const Vec2 u = cos_t * e + sin_t * n;
  const Vec2 du = -sin_t * e + cos_t * n;
  Eigen::Matrix2d jac;
  jac.col(0) = u;
  jac.col(1) = range * du;
  const Eigen::Matrix2d cov = jac * Eigen::Vector2d(range_var, theta_var).asDiagonal() *
                              jac.transpose();
  return GaussianBelief::from_moments(anchor.position + range * u, cov);
}

GaussianBelief position_message_from_links(std::span<const RangeBearingObservation> observations,
                                           const ScenarioContext& ctx, double kappa_min) {
  std::vector<GaussianBelief> messages;
  for (const auto& obs : observations) {
    try {
      messages.push_back(position_message_for_link(obs, ctx, kappa_min));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooDiffuse && e.code() != ErrorCode::DegenerateGeometry) throw;
    }
  }
  if (messages.empty()) throw Error(ErrorCode::AllNonInformative, "no link gave a position message");
  return gaussian_fuse(messages);
}

ComplexGaussianBelief symbol_pseudo_observation(const SymbolObservation& obs, double tx_power) {
  if (!obs.gain_message.is_informative()) return ComplexGaussianBelief::non_informative();
  const cd scale = std::sqrt(tx_power) * obs.path_gain;
  if (std::abs(scale) == 0.0) return ComplexGaussianBelief::non_informative();
  return {obs.gain_message.mean / scale, obs.gain_message.variance / std::norm(scale)};
}

ComplexGaussianBelief symbol_message(std::span<const SymbolObservation> observations,
                                     double tx_power) {
  if (observations.empty()) throw Error(ErrorCode::NoActiveLinks, "no link to detect from");
  std::vector<ComplexGaussianBelief> parts{{cd{0.0, 0.0}, 1.0}};
  for (const auto& obs : observations) parts.push_back(symbol_pseudo_observation(obs, tx_power));
  return cgaussian_fuse(parts);
}

std::vector<double> resolve_phase_references(std::span<const double> persisted,
                                             std::span<const ReferenceInput> links,
                                             double tx_power) {
  std::vector<double> refs(persisted.begin(), persisted.end());
  refs.resize(links.size(), std::numeric_limits<double>::quiet_NaN());
  auto usable = [&](std::size_t l) {
    return links[l].active && links[l].gain_message.is_informative() && links[l].amplitude > 0.0;
  };

  std::size_t anchor = links.size();
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (!usable(l) || !std::isfinite(refs[l])) continue;
    if (anchor == links.size() || links[l].strength > links[anchor].strength) anchor = l;
  }
  if (anchor == links.size()) {
    for (std::size_t l = 0; l < links.size(); ++l) {
      if (usable(l) && (anchor == links.size() || links[l].strength > links[anchor].strength)) {
        anchor = l;
      }
    }
    if (anchor == links.size()) return refs;
    refs[anchor] = std::arg(links[anchor].gain_message.mean) - std::arg(links[anchor].static_gain);
  }

  const SymbolObservation obs{links[anchor].gain_message,
                              links[anchor].amplitude * std::polar(1.0, refs[anchor]) *
                                  links[anchor].static_gain};
  const cd s = symbol_message({&obs, 1}, tx_power).mean;
  if (std::abs(s) == 0.0) return refs;
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (!usable(l) || l == anchor) continue;
    refs[l] = std::arg(links[l].gain_message.mean * std::conj(s)) - std::arg(links[l].static_gain);
  }
  return refs;
}

}  // namespace isac
