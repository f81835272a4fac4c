// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/hvmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "isac/errors.hpp"

namespace isac {

void HvmpConfig::validate() const {
  if (outer_iterations < 1 || inner_iterations < 1 || grid_points < 3 || newton_steps < 0 ||
      likelihood_newton_steps < 0) {
    throw Error(ErrorCode::ValidationError, "hvmp: iteration counts must be at least 1");
  }
  if (!(gate_sigmas > 0.0)) throw Error(ErrorCode::ValidationError, "hvmp.gate_sigmas must be positive");
  if (!(state_tolerance > 0.0)) {
    throw Error(ErrorCode::ValidationError, "hvmp.state_tolerance must be positive");
  }
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw Error(ErrorCode::ValidationError, "hvmp.damping must lie in (0, 1]");
  }
  if (!(activation_threshold >= 0.0) || !(kappa_min >= 0.0) || !(noise_floor > 0.0) ||
      !(reference_phase_std >= 0.0)) {
    throw Error(ErrorCode::ValidationError, "hvmp thresholds must be non-negative");
  }
}

Vec2 UserBelief::position_mean() const { return state.mean().head<2>(); }
Vec2 UserBelief::velocity_mean() const { return state.mean().tail<2>(); }
Mat2 UserBelief::position_covariance() const { return state.covariance().topLeftCorner<2, 2>(); }
Mat2 UserBelief::velocity_covariance() const {
  return state.covariance().bottomRightCorner<2, 2>();
}
GaussianBelief UserBelief::position() const {
  return GaussianBelief::from_moments(position_mean(), position_covariance());
}
GaussianBelief UserBelief::velocity() const {
  return GaussianBelief::from_moments(velocity_mean(), velocity_covariance());
}

StateBeliefs make_initial_beliefs(std::span<const GaussianBelief> priors, std::size_t num_links) {
  StateBeliefs out;
  for (const auto& p : priors) {
    if (p.dim() != 4) throw Error(ErrorCode::ConfigMismatch, "user prior must be 4-dimensional");
    UserBelief u;
    u.state = p;
    u.phase_reference.assign(num_links, std::numeric_limits<double>::quiet_NaN());
    out.push_back(std::move(u));
  }
  return out;
}

std::string IterationDiagnostics::to_json_line() const {
  nlohmann::json j;
  j["frame"] = frame;
  j["iteration"] = iteration;
  j["noise_power"] = noise_power;
  j["residual_energy"] = residual_energy;
  j["max_position_step"] = max_position_step;
  j["skipped_updates"] = skipped_updates;
  j["users"] = nlohmann::json::array();
  for (const auto& u : users) {
    nlohmann::json ju;
    ju["position"] = {u.position.x(), u.position.y()};
    ju["position_trace"] = u.position_trace;
    ju["links"] = nlohmann::json::array();
    for (const auto& l : u.links) {
      nlohmann::json jl;
      jl["active"] = l.active;
      jl["kappa"] = {l.kappa_aoa, l.kappa_delay, l.kappa_doppler};
      jl["gain_abs"] = l.gain_abs;
      jl["explained_energy"] = l.explained_energy;
      jl["objectives"] = nlohmann::json::array();
      for (const auto& [before, after] : l.objectives) jl["objectives"].push_back({before, after});
      ju["links"].push_back(std::move(jl));
    }
    j["users"].push_back(std::move(ju));
  }
  return j.dump();
}

namespace {

struct Info4 {
  Mat4 precision = Mat4::Zero();
  Vec4 shift = Vec4::Zero();
  bool present = false;

  Info4& operator+=(const Info4& o) {
    if (!o.present) return *this;
    precision += o.precision;
    shift += o.shift;
    present = true;
    return *this;
  }
};

/// Scalar Gaussian observation of the Doppler shift in information form.
struct RadialInfo {
  double precision = 0.0;
  double shift = 0.0;
  bool present = false;
};

/// Rank-1 velocity message of a Doppler observation along the current
/// anchor-to-user direction.
Info4 velocity_info(const RadialInfo& r, const Vec2& position, const AnchorGeometry& anchor,
                    double wavelength) {
  Info4 out;
  const Vec2 rel = position - anchor.position;
  const double dist = rel.norm();
  if (!r.present || !(dist > kMinAnchorDistance)) return out;
  const Vec2 e = rel / dist;
  out.precision.block<2, 2>(2, 2) = r.precision * e * e.transpose() / (wavelength * wavelength);
  out.shift.segment<2>(2) = r.shift * e / wavelength;
  out.present = true;
  return out;
}

struct Moments4 {
  Vec4 mean;
  Mat4 cov;
};

Moments4 moments(const Info4& info) {
  const Mat4 cov = regularized_inverse(info.precision);
  return {cov * info.shift, cov};
}

Info4 info_of(const GaussianBelief& g) {
  Info4 out;
  out.precision = g.precision();
  out.shift = g.shift();
  out.present = true;
  return out;
}

struct ParamPrior {
  bool valid = false;
  VonMisesBelief aoa, delay, doppler;
  double doppler_center = 0.0;
  double user_delay = 0.0;
  double doppler_hz = 0.0;
  double aoa_phi = 0.0;
  double delay_phi = 0.0;
  double amplitude = 0.0;
};

Eigen::Matrix<double, 3, 4> jacobian_or_numeric(const UserState& s, const AnchorGeometry& anchor,
                                                const PhysicalConstants& consts, bool& aoa_ok) {
  aoa_ok = true;
  try {
    return link_params_jacobian(s, anchor, consts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AngularSingularity) throw;
  }
  aoa_ok = false;
  Eigen::Matrix<double, 3, 4> jac = Eigen::Matrix<double, 3, 4>::Zero();
  const Vec4 x = s.stacked();
  for (int i = 0; i < 4; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vec4 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const auto pp = link_params(UserState::from_stacked(xp), anchor, consts);
    const auto pm = link_params(UserState::from_stacked(xm), anchor, consts);
    jac(0, i) = (pp.delay - pm.delay) / (2.0 * h);
    jac(1, i) = (pp.doppler - pm.doppler) / (2.0 * h);
  }
  return jac;
}

ParamPrior link_prior(const Moments4& m, std::size_t link, const ScenarioContext& ctx) {
  ParamPrior out;
  const auto& wf = ctx.waveform();
  const auto& anchor = ctx.anchor(link);
  const UserState s = UserState::from_stacked(m.mean);
  const double dist = (s.position - anchor.position).norm();
  if (!(dist > kMinAnchorDistance)) return out;
  const auto p = link_params(s, anchor, ctx.consts());
  bool aoa_ok = true;
  const auto jac = jacobian_or_numeric(s, anchor, ctx.consts(), aoa_ok);
  const Eigen::Vector3d var = (jac * m.cov * jac.transpose()).diagonal().cwiseMax(1e-300);

  const double total = p.delay + ctx.static_delay(link);
  out.delay = gaussian_to_vm(total, var[0], wf.omega_f());
  out.delay_phi = wf.omega_f() * total;
  out.doppler = gaussian_to_vm(p.doppler, var[1], wf.omega_t2());
  out.doppler_center = wf.omega_t2() * p.doppler;
  out.aoa_phi = wf.omega_s() * std::cos(p.aoa);
  if (aoa_ok) {
    const double dphi = wf.omega_s() * std::sin(p.aoa);
    out.aoa = gaussian_to_vm(out.aoa_phi, dphi * dphi * var[2], 1.0);
  }
  out.user_delay = p.delay;
  out.doppler_hz = p.doppler;
  out.amplitude = free_space_amplitude(dist, ctx.consts());
  out.valid = true;
  return out;
}

Info4 embed(const GaussianBelief& g, int offset) {
  Info4 out;
  out.precision.block<2, 2>(offset, offset) = g.precision();
  out.shift.segment<2>(offset) = g.shift();
  out.present = true;
  return out;
}

}  // namespace

FrameResult run_frame(const ReceivedTensor& tensor, const StateBeliefs& predicted,
                      const HvmpConfig& cfg, const ScenarioContext& ctx, int frame_index) {
  cfg.validate();
  const std::size_t num_users = predicted.size();
  const std::size_t num_links = ctx.num_links();
  if (tensor.shape() != ctx.waveform().tensor_shape()) {
    throw Error(ErrorCode::ConfigMismatch, "tensor shape does not match the waveform");
  }
  const double size = static_cast<double>(tensor.size());
  const double mean_power = tensor.frobenius_sq() / size;
  if (!(mean_power > 0.0)) throw Error(ErrorCode::ZeroSignal, "received tensor is all zeros");
  const double noise_floor = cfg.noise_floor * mean_power;
  double sigma2 = mean_power;
  const double power = ctx.tx_power();
  SearchSettings search;
  search.grid_points = cfg.grid_points;
  search.newton_steps = cfg.newton_steps;
  search.gate_sigmas = cfg.gate_sigmas;
  search.track_gain_phase = true;

  std::vector<std::size_t> order;
  for (std::size_t l = 1; l < num_links; ++l) order.push_back(l);
  order.push_back(0);

  std::vector<Info4> prior(num_users);
  std::vector<Vec2> position(num_users);
  std::vector<std::vector<double>> refs(num_users);
  for (std::size_t k = 0; k < num_users; ++k) {
    if (!predicted[k].state.is_proper()) {
      throw Error(ErrorCode::AllNonInformative, "predicted belief must be a proper Gaussian");
    }
    prior[k] = info_of(predicted[k].state);
    position[k] = predicted[k].position_mean();
    refs[k] = predicted[k].phase_reference;
    refs[k].resize(num_links, std::numeric_limits<double>::quiet_NaN());
  }

  std::vector<std::vector<Info4>> messages(num_users, std::vector<Info4>(num_links));
  std::vector<std::vector<RadialInfo>> radial(num_users, std::vector<RadialInfo>(num_links));
  auto link_message = [&](std::size_t k, std::size_t l) {
    Info4 out = messages[k][l];
    out += velocity_info(radial[k][l], position[k], ctx.anchor(l), ctx.consts().wavelength);
    return out;
  };
  std::vector<std::vector<ComplexGaussianBelief>> symbol_obs(
      num_users, std::vector<ComplexGaussianBelief>(num_links));
  auto carried_symbol_obs = symbol_obs;
  std::vector<ComplexGaussianBelief> symbols(num_users, ComplexGaussianBelief{{0.0, 0.0}, 1.0});
  std::vector<std::vector<double>> resolved_refs = refs;

  FrameResult result;
  result.links.assign(num_users, std::vector<LinkBeliefs>(num_links));
  auto& links = result.links;
  std::vector<std::vector<ParamPrior>> priors(num_users, std::vector<ParamPrior>(num_links));
  std::vector<Moments4> posterior(num_users);

  for (std::size_t k = 0; k < num_users; ++k) {
    const auto m = moments(prior[k]);
    posterior[k] = m;
    for (std::size_t l = 0; l < num_links; ++l) {
      const auto pp = link_prior(m, l, ctx);
      auto& lb = links[k][l];
      lb.active = pp.valid;
      lb.aoa_phi = pp.aoa_phi;
      lb.delay_phi = pp.delay_phi;
      lb.doppler_phi = pp.doppler_center;
      lb.aoa = pp.aoa;
      lb.delay = pp.delay;
      lb.doppler = pp.doppler;
      lb.gain = {{0.0, 0.0}, power * pp.amplitude * pp.amplitude};
    }
  }

  ReceivedTensor residual = tensor;
  std::vector<std::vector<LinkDiagnostics>> link_diag(num_users,
                                                      std::vector<LinkDiagnostics>(num_links));

  auto gain_prior = [&](std::size_t k, std::size_t l) -> ComplexGaussianBelief {
    const auto& pp = priors[k][l];
    const double var0 = power * pp.amplitude * pp.amplitude;
    if (!(var0 > 0.0)) return ComplexGaussianBelief::non_informative();
    if (!std::isfinite(refs[k][l])) return {{0.0, 0.0}, var0};
    std::vector<ComplexGaussianBelief> parts{{cd{0.0, 0.0}, 1.0}};
    for (std::size_t o = 0; o < num_links; ++o) {
      if (o != l) parts.push_back(carried_symbol_obs[k][o]);
    }
    const auto s = cgaussian_fuse(parts);
    const cd beta = pp.amplitude * std::polar(1.0, refs[k][l]) * ctx.static_gain(l);
    const cd mean = std::sqrt(power) * beta * s.mean;
    const double ref_var = cfg.reference_phase_std * cfg.reference_phase_std;
    return {mean, var0 * s.variance + std::norm(mean) * ref_var};
  };

  for (int it = 0; it < cfg.outer_iterations; ++it) {
    IterationDiagnostics diag;
    diag.frame = frame_index;
    diag.iteration = it;

    for (std::size_t k = 0; k < num_users; ++k) {
      for (std::size_t l = 0; l < num_links; ++l) {
        Info4 ext = prior[k];
        for (std::size_t o = 0; o < num_links; ++o) {
          if (o != l) ext += link_message(k, o);
        }
        priors[k][l] = link_prior(moments(ext), l, ctx);
      }
    }

    for (int inner = 0; inner < cfg.inner_iterations; ++inner) {
      for (std::size_t k = 0; k < num_users; ++k) {
        for (std::size_t l : order) {
          auto& lb = links[k][l];
          const auto& pp = priors[k][l];
          if (!pp.valid) continue;
          auto& ld = link_diag[k][l];
          ld.objectives.clear();
          if (lb.active && lb.fitted) residual.add_rank1(lb.gain.mean, lb.factors(l, ctx));
          const auto gprior = gain_prior(k, l);
          if (!lb.fitted) {
            lb.gain = mmse_gain_update(residual, lb.factors(l, ctx), gprior, sigma2).posterior;
            lb.fitted = true;
          }
          for (LinkVariable which : {LinkVariable::Aoa, LinkVariable::Delay, LinkVariable::Doppler}) {
            const VonMisesBelief& vprior = which == LinkVariable::Aoa     ? pp.aoa
                                           : which == LinkVariable::Delay ? pp.delay
                                                                          : pp.doppler;
            try {
              const auto upd = vmp_update_parameter(residual, l, lb, which, vprior,
                                                    pp.doppler_center, sigma2, ctx, search,
                                                    cfg.likelihood_newton_steps);
              ld.objectives.emplace_back(upd.objective_before, upd.objective_after);
              lb.gain.mean *= upd.gain_rotation;
              switch (which) {
                case LinkVariable::Aoa:
                  lb.aoa_phi = upd.phi;
                  lb.aoa = upd.posterior;
                  lb.aoa_msg = upd.message;
                  break;
                case LinkVariable::Delay:
                  lb.delay_phi = upd.phi;
                  lb.delay = upd.posterior;
                  lb.delay_msg = upd.message;
                  break;
                case LinkVariable::Doppler:
                  lb.doppler_phi = upd.phi;
                  lb.doppler = upd.posterior;
                  lb.doppler_msg = upd.message;
                  break;
              }
            } catch (const Error& e) {
              if (e.code() != ErrorCode::NoInformativeData) throw;
              ++diag.skipped_updates;
              if (which == LinkVariable::Aoa) lb.aoa_msg = VonMisesBelief::uniform();
              if (which == LinkVariable::Delay) lb.delay_msg = VonMisesBelief::uniform();
              if (which == LinkVariable::Doppler) lb.doppler_msg = VonMisesBelief::uniform();
            }
          }
          const auto f = lb.factors(l, ctx);
          const auto g = mmse_gain_update(residual, f, gprior, sigma2);
          lb.gain = g.posterior;
          lb.gain_msg = g.message;
          if (lb.active) residual.add_rank1(-lb.gain.mean, f);
        }
      }
    }
    sigma2 = std::max(residual.frobenius_sq() / size, noise_floor);

    // Blockage: repeat the greedy decision until it settles.
    for (int round = 0; round < 4; ++round) {
      bool changed = false;
      for (std::size_t k = 0; k < num_users; ++k) {
        std::vector<double> energy(num_links, 0.0);
        std::vector<cd> projection(num_links);
        std::vector<double> norms(num_links, 0.0);
        std::vector<Rank1Factors> factors(num_links);
        for (std::size_t l = 0; l < num_links; ++l) {
          if (!priors[k][l].valid || !links[k][l].fitted) continue;
          factors[l] = links[k][l].factors(l, ctx);
          norms[l] = factors[l].norm_sq();
          projection[l] = residual.inner(factors[l]);
          if (links[k][l].active) projection[l] += links[k][l].gain.mean * norms[l];
          energy[l] = std::norm(projection[l]) / norms[l];
        }
        const auto alpha = update_blockage(energy, cfg.activation_threshold * sigma2);
        for (std::size_t l = 0; l < num_links; ++l) {
          auto& lb = links[k][l];
          link_diag[k][l].explained_energy = energy[l];
          if (!priors[k][l].valid || !lb.fitted) continue;
          const bool now = alpha[l] == 1;
          if (now == lb.active) continue;
          changed = true;
          if (now) {
            lb.gain.mean = projection[l] / norms[l];
            residual.add_rank1(-lb.gain.mean, factors[l]);
          } else {
            residual.add_rank1(lb.gain.mean, factors[l]);
          }
          lb.active = now;
        }
      }
      if (!changed) break;
    }
    sigma2 = std::max(residual.frobenius_sq() / size, noise_floor);

    // Backward messages to the states, damped after the first iteration.
    double max_step = 0.0;
    for (std::size_t k = 0; k < num_users; ++k) {
      for (std::size_t l = 0; l < num_links; ++l) {
        const auto& lb = links[k][l];
        Info4 fresh;
        RadialInfo fresh_radial;
        if (lb.active && priors[k][l].valid) {
          try {
            const RangeBearingObservation obs{l, lb.aoa_msg, lb.delay_msg, priors[k][l].user_delay};
            fresh += embed(position_message_for_link(obs, ctx, cfg.kappa_min), 0);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::TooDiffuse && e.code() != ErrorCode::DegenerateGeometry) {
              throw;
            }
          }
          if (cfg.use_velocity && lb.doppler_msg.kappa() >= cfg.kappa_min) {
            const auto g = vm_to_gaussian(lb.doppler_msg, ctx.waveform().omega_t2(),
                                          priors[k][l].doppler_hz, cfg.kappa_min);
            fresh_radial.precision = g.precision()(0, 0);
            fresh_radial.shift = g.shift()[0];
            fresh_radial.present = true;
          }
        }
        auto& msg = messages[k][l];
        if (it > 0 && msg.present && fresh.present) {
          msg.precision = cfg.damping * fresh.precision + (1.0 - cfg.damping) * msg.precision;
          msg.shift = cfg.damping * fresh.shift + (1.0 - cfg.damping) * msg.shift;
        } else {
          msg = fresh;
        }
        auto& rad = radial[k][l];
        if (it > 0 && rad.present && fresh_radial.present) {
          rad.precision = cfg.damping * fresh_radial.precision + (1.0 - cfg.damping) * rad.precision;
          rad.shift = cfg.damping * fresh_radial.shift + (1.0 - cfg.damping) * rad.shift;
        } else {
          rad = fresh_radial;
        }
      }
      Info4 post = prior[k];
      for (std::size_t l = 0; l < num_links; ++l) post += link_message(k, l);
      posterior[k] = moments(post);
      const Vec2 next = posterior[k].mean.head<2>();
      max_step = std::max(max_step, (next - position[k]).norm());
      position[k] = next;
    }

    // Symbols.
    for (std::size_t k = 0; k < num_users; ++k) {
      std::vector<ReferenceInput> inputs(num_links);
      std::vector<double> amplitude(num_links, 0.0);
      for (std::size_t l = 0; l < num_links; ++l) {
        const auto& lb = links[k][l];
        const double dist = (position[k] - ctx.anchor(l).position).norm();
        amplitude[l] = dist > kMinAnchorDistance ? free_space_amplitude(dist, ctx.consts()) : 0.0;
        inputs[l].active = lb.active && lb.fitted;
        inputs[l].gain_message = lb.gain_msg;
        inputs[l].amplitude = amplitude[l];
        inputs[l].static_gain = ctx.static_gain(l);
        inputs[l].strength =
            lb.gain_msg.is_informative() ? std::norm(lb.gain_msg.mean) / lb.gain_msg.variance : 0.0;
      }
      resolved_refs[k] = resolve_phase_references(refs[k], inputs, power);
      std::vector<ComplexGaussianBelief> parts{{cd{0.0, 0.0}, 1.0}};
      for (std::size_t l = 0; l < num_links; ++l) {
        symbol_obs[k][l] = ComplexGaussianBelief::non_informative();
        carried_symbol_obs[k][l] = ComplexGaussianBelief::non_informative();
        if (inputs[l].active && std::isfinite(refs[k][l])) {
          const cd carried = amplitude[l] * std::polar(1.0, refs[k][l]) * ctx.static_gain(l);
          carried_symbol_obs[k][l] =
              symbol_pseudo_observation({links[k][l].gain_msg, carried}, power);
        }
        if (!inputs[l].active || !std::isfinite(resolved_refs[k][l])) continue;
        const cd beta = amplitude[l] * std::polar(1.0, resolved_refs[k][l]) * ctx.static_gain(l);
        symbol_obs[k][l] = symbol_pseudo_observation({links[k][l].gain_msg, beta}, power);
        parts.push_back(symbol_obs[k][l]);
      }
      symbols[k] = cgaussian_fuse(parts);
    }

    diag.noise_power = sigma2;
    diag.residual_energy = residual.frobenius_sq();
    diag.max_position_step = max_step;
    for (std::size_t k = 0; k < num_users; ++k) {
      UserDiagnostics ud;
      ud.position = position[k];
      ud.position_trace = posterior[k].cov.topLeftCorner<2, 2>().trace();
      for (std::size_t l = 0; l < num_links; ++l) {
        auto ld = link_diag[k][l];
        const auto& lb = links[k][l];
        ld.active = lb.active ? 1 : 0;
        ld.kappa_aoa = lb.aoa.kappa();
        ld.kappa_delay = lb.delay.kappa();
        ld.kappa_doppler = lb.doppler.kappa();
        ld.gain_abs = std::abs(lb.gain.mean);
        ud.links.push_back(std::move(ld));
      }
      diag.users.push_back(std::move(ud));
    }
    result.diagnostics.push_back(std::move(diag));
    if (it > 0 && max_step < cfg.state_tolerance) break;
  }

  result.noise_power = sigma2;
  result.posterior.resize(num_users);
  for (std::size_t k = 0; k < num_users; ++k) {
    auto& u = result.posterior[k];
    u.state = GaussianBelief::from_moments(posterior[k].mean, posterior[k].cov);
    u.symbol = symbols[k];
    u.phase_reference = resolved_refs[k];
  }
  return result;
}

StateBeliefs forward_predict(const StateBeliefs& posterior, const MotionModel& model) {
  StateBeliefs out = posterior;
  for (auto& u : out) {
    const Eigen::MatrixXd f = model.transition;
    const Eigen::VectorXd mean = f * u.state.mean();
    const Eigen::MatrixXd cov = f * u.state.covariance() * f.transpose() +
                                Eigen::MatrixXd(model.process_noise);
    u.state = GaussianBelief::from_moments(mean, cov);
    u.symbol = {{0.0, 0.0}, 1.0};
  }
  return out;
}

TrackingOutput run_tracking(std::span<const ReceivedTensor> tensors, const StateBeliefs& initial,
                            const HvmpConfig& cfg, const ScenarioContext& ctx,
                            const std::function<void(const FrameResult&)>& on_frame) {
  TrackingOutput out;
  out.frames.reserve(tensors.size());
  StateBeliefs prior = initial;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto frame = run_frame(tensors[t], prior, cfg, ctx, static_cast<int>(t));
    if (on_frame) on_frame(frame);
    prior = forward_predict(frame.posterior, ctx.motion());
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace isac
