// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/ekf.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>

#include "isac/errors.hpp"
#include "isac/hvmp_messages.hpp"

namespace isac {

EkfState ekf_predict(const EkfState& state, const MotionModel& model) {
  EkfState out;
  out.mean = model.transition * state.mean;
  out.covariance = model.transition * state.covariance * model.transition.transpose() +
                   model.process_noise;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

EkfState ekf_update_linearized(const EkfState& predicted, const Eigen::VectorXd& innovation,
                               const Eigen::MatrixXd& jacobian,
                               const Eigen::MatrixXd& measurement_cov) {
  const Eigen::MatrixXd& h = jacobian;
  const Eigen::MatrixXd p = predicted.covariance;
  const Eigen::MatrixXd s = h * p * h.transpose() + measurement_cov;
  const Eigen::MatrixXd k = s.ldlt().solve(h * p).transpose();
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(4, 4) - k * h;
  EkfState out;
  out.mean = predicted.mean + k * innovation;
  const Eigen::MatrixXd cov = ikh * p * ikh.transpose() + k * measurement_cov * k.transpose();
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

EkfUpdate ekf_update(const EkfState& predicted, std::span<const LinkMeasurement> measurements,
                     const ScenarioContext& ctx, double gate_chi2) {
  const UserState s = UserState::from_stacked(predicted.mean);
  std::vector<Eigen::Matrix<double, 3, 4>> rows;
  std::vector<Eigen::Vector3d> innovations;
  std::vector<Eigen::Vector3d> variances;
  EkfUpdate out;
  out.state = predicted;
  for (const auto& m : measurements) {
    Eigen::Matrix<double, 3, 4> jac;
    LinkParams p;
    try {
      p = link_params(s, ctx.anchor(m.link), ctx.consts());
      jac = link_params_jacobian(s, ctx.anchor(m.link), ctx.consts());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AngularSingularity && e.code() != ErrorCode::DegenerateGeometry) {
        throw;
      }
      continue;
    }
    const Eigen::Vector3d y = m.value - Eigen::Vector3d(p.delay, p.doppler, p.aoa);
    const Eigen::Matrix3d sm =
        jac * predicted.covariance * jac.transpose() + Eigen::Matrix3d(m.variance.asDiagonal());
    const double d2 = y.dot(sm.ldlt().solve(y));
    if (!(d2 <= gate_chi2)) continue;
    rows.push_back(jac);
    innovations.push_back(y);
    variances.push_back(m.variance);
    out.used_links.push_back(m.link);
  }
  if (rows.empty()) return out;

  const auto n = static_cast<Eigen::Index>(3 * rows.size());
  Eigen::MatrixXd h(n, 4);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto o = static_cast<Eigen::Index>(3 * i);
    h.middleRows(o, 3) = rows[i];
    y.segment(o, 3) = innovations[i];
    r.block(o, o, 3, 3) = variances[i].asDiagonal();
  }
  out.state = ekf_update_linearized(predicted, y, h, r);
  out.status = EkfStatus::Updated;
  return out;
}

EkfUpdate ekf_step(const EkfState& state, std::span<const LinkMeasurement> measurements,
                   const MotionModel& model, const ScenarioContext& ctx, double gate_chi2) {
  return ekf_update(ekf_predict(state, model), measurements, ctx, gate_chi2);
}

void EkfConfig::validate() const {
  spectral.validate();
  if (!(gate_chi2 > 0.0) || !(noise_floor > 0.0)) {
    throw Error(ErrorCode::ValidationError, "ekf thresholds must be positive");
  }
}

namespace {

std::optional<SpectralGate> gate_from_state(const EkfState& state, std::size_t link,
                                            const ScenarioContext& ctx) {
  const auto& wf = ctx.waveform();
  const UserState s = UserState::from_stacked(state.mean);
  try {
    const auto p = link_params(s, ctx.anchor(link), ctx.consts());
    const auto jac = link_params_jacobian(s, ctx.anchor(link), ctx.consts());
    const Eigen::Vector3d sd =
        (jac * state.covariance * jac.transpose()).diagonal().cwiseMax(0.0).cwiseSqrt();
    SpectralGate g;
    g.delay_phi = wf.omega_f() * (p.delay + ctx.static_delay(link));
    g.doppler_phi = wf.omega_t2() * p.doppler;
    g.aoa_phi = wf.omega_s() * std::cos(p.aoa);
    g.delay_sd = wf.omega_f() * sd[0];
    g.doppler_sd = wf.omega_t2() * sd[1];
    g.aoa_sd = wf.omega_s() * std::sin(p.aoa) * sd[2];
    return g;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AngularSingularity && e.code() != ErrorCode::DegenerateGeometry) {
      throw;
    }
    return std::nullopt;
  }
}

}  // namespace

std::vector<EkfFrame> run_ekf_tracking(std::span<const ReceivedTensor> tensors,
                                       std::span<const GaussianBelief> initial,
                                       const EkfConfig& cfg, const ScenarioContext& ctx) {
  cfg.validate();
  const std::size_t num_users = initial.size();
  const std::size_t num_links = ctx.num_links();
  const double power = ctx.tx_power();
  std::vector<EkfState> state(num_users);
  std::vector<std::vector<double>> refs(
      num_users, std::vector<double>(num_links, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t k = 0; k < num_users; ++k) {
    if (initial[k].dim() != 4) throw Error(ErrorCode::ConfigMismatch, "user prior must be 4D");
    state[k].mean = initial[k].mean();
    state[k].covariance = initial[k].covariance();
  }

  std::vector<std::size_t> order;
  for (std::size_t l = 1; l < num_links; ++l) order.push_back(l);
  order.push_back(0);

  std::vector<EkfFrame> out;
  out.reserve(tensors.size());
  for (const auto& tensor : tensors) {
    const double size = static_cast<double>(tensor.size());
    const double mean_power = tensor.frobenius_sq() / size;
    ReceivedTensor residual = tensor;
    std::vector<std::vector<std::optional<SpectralEstimate>>> est(
        num_users, std::vector<std::optional<SpectralEstimate>>(num_links));
    for (std::size_t l : order) {
      for (std::size_t k = 0; k < num_users; ++k) {
        const auto gate = gate_from_state(state[k], l, ctx);
        if (!gate) continue;
        try {
          auto e = spectral_estimate_link(residual, l, *gate, ctx, cfg.spectral);
          residual.add_rank1(-e.gain, e.factors(ctx));
          est[k][l] = std::move(e);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoPeak) throw;
        }
      }
    }
    const double sigma2 = std::max(residual.frobenius_sq() / size, cfg.noise_floor * mean_power);

    EkfFrame frame;
    frame.noise_power = sigma2;
    for (std::size_t k = 0; k < num_users; ++k) {
      std::vector<LinkMeasurement> meas;
      for (std::size_t l = 0; l < num_links; ++l) {
        if (!est[k][l]) continue;
        const auto& e = *est[k][l];
        const Eigen::Vector3d var = e.variances(ctx, sigma2);
        meas.push_back({l, Eigen::Vector3d(e.delay - ctx.static_delay(l), e.doppler, e.aoa),
                        Eigen::Vector3d(var[1], var[2], var[0])});
      }
      auto upd = ekf_update(state[k], meas, ctx, cfg.gate_chi2);

      std::vector<ReferenceInput> inputs(num_links);
      std::vector<double> amplitude(num_links, 0.0);
      for (std::size_t l = 0; l < num_links; ++l) {
        const double dist = (upd.state.mean.head<2>() - ctx.anchor(l).position).norm();
        amplitude[l] = dist > kMinAnchorDistance ? free_space_amplitude(dist, ctx.consts()) : 0.0;
        inputs[l].amplitude = amplitude[l];
        inputs[l].static_gain = ctx.static_gain(l);
      }
      for (std::size_t l : upd.used_links) {
        const auto& e = *est[k][l];
        inputs[l].active = true;
        inputs[l].gain_message = {e.gain, sigma2 / e.steering_norm_sq};
        inputs[l].strength = e.explained_energy / sigma2;
      }
      refs[k] = resolve_phase_references(refs[k], inputs, power);
      std::vector<SymbolObservation> obs;
      for (std::size_t l : upd.used_links) {
        if (!std::isfinite(refs[k][l])) continue;
        obs.push_back({inputs[l].gain_message,
                       amplitude[l] * std::polar(1.0, refs[k][l]) * ctx.static_gain(l)});
      }

      EkfUserFrame uf;
      uf.state = upd.state;
      uf.status = upd.status;
      uf.used_links = upd.used_links;
      uf.symbol = obs.empty() ? ComplexGaussianBelief{{0.0, 0.0}, 1.0} : symbol_message(obs, power);
      frame.users.push_back(std::move(uf));
      state[k] = ekf_predict(upd.state, ctx.motion());
    }
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace isac
