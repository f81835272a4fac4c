// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include <benchmark/benchmark.h>

#include "isac/config.hpp"
#include "isac/experiment.hpp"
#include "isac/hvmp.hpp"
#include "isac/spectral.hpp"

namespace isac {
namespace {

ScenarioConfig reference() {
  auto cfg = load_config(std::string(ISAC_CONFIG_DIR) + "/reference_scenario.json");
  cfg.num_frames = 1;
  return cfg;
}

void BM_SynthesizeTensor(benchmark::State& state) {
  auto cfg = reference();
  cfg.num_users = static_cast<int>(state.range(0));
  cfg.speeds.resize(cfg.num_users, 10.0);
  const auto ctx = cfg.context();
  FrameTruth truth;
  truth.tx_power = ctx.tx_power();
  for (int k = 0; k < cfg.num_users; ++k) {
    UserTruth u;
    u.state = {Vec2(30.0 + 10.0 * k, -10.0), Vec2(5.0, 3.0)};
    u.blockage.assign(ctx.num_links(), 1);
    u.path_gain.assign(ctx.num_links(), {1e-4, 0.0});
    truth.users.push_back(u);
  }
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        synthesize_tensor(truth, ctx.bs(), ctx.ris(), ctx.waveform(), ctx.consts(), 1e-12, rng));
  }
}
BENCHMARK(BM_SynthesizeTensor)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_RunFrame(benchmark::State& state) {
  const auto cfg = reference();
  const auto ctx = cfg.context();
  const auto data = generate_trial(cfg, ctx, static_cast<double>(state.range(0)), 0);
  const auto initial = make_initial_beliefs(data.priors, ctx.num_links());
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_frame(data.tensors[0], initial, cfg.hvmp, ctx));
  }
}
BENCHMARK(BM_RunFrame)->Arg(-10)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SpectralEstimate(benchmark::State& state) {
  const auto cfg = reference();
  const auto ctx = cfg.context();
  const auto data = generate_trial(cfg, ctx, 0.0, 0);
  const auto& wf = ctx.waveform();
  const auto link = static_cast<std::size_t>(state.range(0));
  const auto s = data.trajectories[0].states[0];
  const auto p = link_params(s, ctx.anchor(link), ctx.consts());
  SpectralGate gate;
  gate.aoa_phi = wf.omega_s() * std::cos(p.aoa);
  gate.delay_phi = wf.omega_f() * (p.delay + ctx.static_delay(link));
  gate.doppler_phi = wf.omega_t2() * p.doppler;
  gate.aoa_sd = gate.delay_sd = gate.doppler_sd = 0.2;
  const SpectralSettings settings;
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(spectral_estimate_link(data.tensors[0], link, gate, ctx, settings));
    } catch (const std::exception&) {
    }
  }
}
BENCHMARK(BM_SpectralEstimate)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace isac

BENCHMARK_MAIN();
