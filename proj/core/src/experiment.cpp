// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "isac/ekf.hpp"
#include "isac/errors.hpp"
#include "isac/hvmp.hpp"
#include "isac/position_only.hpp"
#include "isac/waveform.hpp"

namespace isac {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix(std::uint64_t x) {
  x += kGamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kTruth = 1, kNoise = 2 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return splitmix(seed ^ (s * kGamma)); }

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Hvmp:
      return "hvmp";
    case Algorithm::Ekf:
      return "ekf";
    case Algorithm::PositionOnly:
      return "pos-only";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "hvmp") return Algorithm::Hvmp;
  if (name == "ekf") return Algorithm::Ekf;
  if (name == "pos-only" || name == "position_only") return Algorithm::PositionOnly;
  throw Error(ErrorCode::ValidationError,
              "algos: unknown algorithm '" + std::string(name) + "' (hvmp, ekf, pos-only)");
}

std::vector<Algorithm> parse_algorithm_list(std::string_view list) {
  std::vector<Algorithm> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const auto item = list.substr(start, comma - start);
    if (!item.empty()) {
      const Algorithm a = parse_algorithm(item);
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorCode::ValidationError, "algos: empty algorithm list");
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return splitmix(master_seed + static_cast<std::uint64_t>(trial) * kGamma);
}

TrialData generate_trial(const ScenarioConfig& cfg, const ScenarioContext& ctx, double snr_db,
                         int trial) {
  TrialData d;
  d.trial = trial;
  d.seed = trial_seed(cfg.master_seed, trial);
  Rng rng(stream_seed(d.seed, kTruth));
  Rng noise_rng(stream_seed(d.seed, kNoise));

  const auto K = static_cast<std::size_t>(cfg.num_users);
  const std::size_t L = ctx.num_links();
  TrajectoryOptions topt;
  topt.placement = cfg.placement;
  topt.placement_margin = cfg.placement_margin;
  d.trajectories = generate_trajectories(cfg.num_users, cfg.num_frames, cfg.region, cfg.speeds,
                                         ctx.motion(), rng, topt);

  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::vector<double>> chi(K, std::vector<double>(L));
  for (auto& row : chi) {
    for (auto& c : row) c = phase(rng);
  }

  std::uint64_t checksum = 1469598103934665603ULL;
  for (int t = 0; t < cfg.num_frames; ++t) {
    FrameTruth truth;
    truth.tx_power = ctx.tx_power();
    std::vector<cd> syms;
    std::vector<int> blocks;
    for (std::size_t k = 0; k < K; ++k) {
      UserTruth u;
      u.state = d.trajectories[k].states[static_cast<std::size_t>(t)];
      u.blockage = sample_blockage(ctx.ris().size(), cfg.bs_block_prob, cfg.ris_block_prob, rng);
      u.symbol = sample_cn(rng);
      for (std::size_t l = 0; l < L; ++l) {
        const double dist = (u.state.position - ctx.anchor(l).position).norm();
        u.path_gain.push_back(free_space_amplitude(std::max(dist, kMinAnchorDistance), ctx.consts()) *
                              std::polar(1.0, chi[k][l]));
      }
      syms.push_back(u.symbol);
      blocks.insert(blocks.end(), u.blockage.begin(), u.blockage.end());
      truth.users.push_back(std::move(u));
    }
    ReceivedTensor y = synthesize_noiseless(truth, ctx.bs(), ctx.ris(), ctx.waveform(), ctx.consts());
    const double sigma2 = noise_power_for_snr(y, snr_db);
    add_noise(y, sigma2, noise_rng);
    checksum = (checksum ^ tensor_checksum(y)) * 1099511628211ULL;
    d.tensors.push_back(std::move(y));
    d.noise_power.push_back(sigma2);
    d.symbols.push_back(std::move(syms));
    d.blockage.push_back(std::move(blocks));
  }
  d.checksum = checksum;

  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::VectorXd mean = d.trajectories[k].states.front().stacked();
    const double ps = std::max(cfg.initial_position_std, 1e-3);
    const double vs = std::max(cfg.initial_velocity_std, 1e-3);
    Eigen::VectorXd var(4);
    var << ps * ps, ps * ps, vs * vs, vs * vs;
    d.priors.push_back(GaussianBelief::from_moments(mean, var.asDiagonal().toDenseMatrix()));
  }
  return d;
}

AlgorithmRun run_algorithm(Algorithm algo, const ScenarioConfig& cfg, const ScenarioContext& ctx,
                           const TrialData& data,
                           const std::function<void(const std::string&)>& diagnostics) {
  AlgorithmRun run;
  auto add_frame = [&](const StateBeliefs& users) {
    std::vector<Vec2> pos;
    std::vector<cd> sym;
    for (const auto& u : users) {
      pos.push_back(u.position_mean());
      sym.push_back(u.symbol.mean);
    }
    run.positions.push_back(std::move(pos));
    run.symbols.push_back(std::move(sym));
  };
  auto on_frame = [&](const FrameResult& f) {
    if (!diagnostics) return;
    for (const auto& d : f.diagnostics) diagnostics(d.to_json_line());
  };

  switch (algo) {
    case Algorithm::Hvmp: {
      const auto out = run_tracking(data.tensors, make_initial_beliefs(data.priors, ctx.num_links()),
                                    cfg.hvmp, ctx, on_frame);
      for (const auto& f : out.frames) add_frame(f.posterior);
      break;
    }
    case Algorithm::PositionOnly: {
      std::vector<GaussianBelief> pos;
      for (const auto& p : data.priors) {
        pos.push_back(GaussianBelief::from_moments(p.mean().head(2),
                                                   p.covariance().topLeftCorner(2, 2)));
      }
      const auto out = position_only_track(data.tensors, pos, cfg.position_only, ctx);
      for (const auto& f : out.frames) add_frame(f.posterior);
      break;
    }
    case Algorithm::Ekf: {
      const auto out = run_ekf_tracking(data.tensors, data.priors, cfg.ekf, ctx);
      for (const auto& f : out) {
        std::vector<Vec2> pos;
        std::vector<cd> sym;
        for (const auto& u : f.users) {
          pos.push_back(u.state.mean.head<2>());
          sym.push_back(u.symbol.mean);
        }
        run.positions.push_back(std::move(pos));
        run.symbols.push_back(std::move(sym));
      }
      break;
    }
  }
  return run;
}

double round_sig9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

std::vector<MetricsRecord> compute_metrics(std::string_view algo, double snr_db,
                                           const TrialData& data, const AlgorithmRun& run) {
  const std::size_t frames = run.positions.size();
  const std::size_t K = data.trajectories.size();
  std::vector<cd> rotation(K, {1.0, 0.0});
  for (std::size_t k = 0; k < K; ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t t = 0; t < frames; ++t) acc += run.symbols[t][k] * std::conj(data.symbols[t][k]);
    if (std::abs(acc) > 0.0) rotation[k] = std::conj(acc) / std::abs(acc);
  }
  std::vector<MetricsRecord> out;
  for (std::size_t t = 0; t < frames; ++t) {
    MetricsRecord r;
    r.algo = std::string(algo);
    r.snr_db = snr_db;
    r.trial = data.trial;
    r.frame = static_cast<int>(t);
    r.seed = data.seed;
    double pos_sq = 0.0;
    double sym_sq = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double e = (run.positions[t][k] - data.trajectories[k].states[t].position).norm();
      r.user_error_m.push_back(e);
      pos_sq += e * e;
      sym_sq += std::norm(run.symbols[t][k] * rotation[k] - data.symbols[t][k]);
    }
    r.rmse_m = round_sig9(std::sqrt(pos_sq / static_cast<double>(K)));
    r.signal_mse = round_sig9(sym_sq / static_cast<double>(K));
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

struct TrialOutcome {
  std::vector<MetricsRecord> metrics;
  std::vector<TrackRecord> tracks;
  std::vector<FailureRecord> failures;
  ChecksumRecord checksum;
  std::vector<Trajectory> truth;
};

TrialOutcome run_trial(const ScenarioConfig& cfg, const ScenarioContext& ctx, double snr_db,
                       int trial, const ExperimentOptions& options) {
  TrialOutcome o;
  TrialData data;
  try {
    data = generate_trial(cfg, ctx, snr_db, trial);
  } catch (const std::exception& e) {
    for (Algorithm a : options.algorithms) {
      o.failures.push_back({std::string(algorithm_name(a)), snr_db, trial, e.what()});
    }
    return o;
  }
  o.checksum = {snr_db, trial, data.checksum};
  if (trial == 0) o.truth = data.trajectories;
  const bool log = options.diagnostics && trial == 0;
  if (options.diagnostics) {
    nlohmann::json j{{"event", "trial_data"},
                     {"snr_db", snr_db},
                     {"trial", trial},
                     {"seed", data.seed},
                     {"tensor_checksum", data.checksum}};
    options.diagnostics(j.dump());
  }
  for (Algorithm a : options.algorithms) {
    const std::string name(algorithm_name(a));
    try {
      std::function<void(const std::string&)> sink;
      if (log && a == Algorithm::Hvmp) sink = options.diagnostics;
      const AlgorithmRun run = run_algorithm(a, cfg, ctx, data, sink);
      auto m = compute_metrics(name, snr_db, data, run);
      for (std::size_t t = 0; t < run.positions.size(); ++t) {
        for (std::size_t k = 0; k < run.positions[t].size(); ++k) {
          o.tracks.push_back({name, snr_db, trial, static_cast<int>(t), static_cast<int>(k),
                              data.trajectories[k].states[t].position, run.positions[t][k]});
        }
      }
      o.metrics.insert(o.metrics.end(), m.begin(), m.end());
    } catch (const std::exception& e) {
      o.failures.push_back({name, snr_db, trial, e.what()});
    }
  }
  return o;
}

}  // namespace

ExperimentResult run_experiment(const ScenarioConfig& cfg, const ExperimentOptions& options) {
  cfg.validate();
  const ScenarioContext ctx = cfg.context();
  const int workers = std::max(1, options.workers > 0 ? options.workers : cfg.workers);

  std::vector<std::pair<double, int>> jobs;
  for (double snr : cfg.snr_db) {
    for (int trial = 0; trial < cfg.trials; ++trial) jobs.emplace_back(snr, trial);
  }
  std::vector<TrialOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  ExperimentOptions opts = options;
  if (options.diagnostics) {
    opts.diagnostics = [&](const std::string& line) {
      std::lock_guard<std::mutex> lock(log_mutex);
      options.diagnostics(line);
    };
  }
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      outcomes[i] = run_trial(cfg, ctx, jobs[i].first, jobs[i].second, opts);
    }
  };
  const int n = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    res.metrics.insert(res.metrics.end(), o.metrics.begin(), o.metrics.end());
    res.tracks.insert(res.tracks.end(), o.tracks.begin(), o.tracks.end());
    res.failures.insert(res.failures.end(), o.failures.begin(), o.failures.end());
    if (o.checksum.checksum != 0) res.checksums.push_back(o.checksum);
    if (res.first_truth.empty() && !o.truth.empty()) res.first_truth = std::move(o.truth);
  }
  return res;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& metrics) {
  struct Acc {
    int n = 0;
    double r = 0.0, r2 = 0.0, s = 0.0, s2 = 0.0;
  };
  // Keyed on first appearance of the algorithm so that the row order
  // follows the requested algorithm order.
  std::vector<std::string> algo_order;
  std::map<std::tuple<std::size_t, double, int>, Acc> acc;
  for (const auto& m : metrics) {
    auto it = std::find(algo_order.begin(), algo_order.end(), m.algo);
    if (it == algo_order.end()) it = algo_order.insert(algo_order.end(), m.algo);
    auto& a = acc[{static_cast<std::size_t>(it - algo_order.begin()), m.snr_db, m.frame}];
    ++a.n;
    a.r += m.rmse_m;
    a.r2 += m.rmse_m * m.rmse_m;
    a.s += m.signal_mse;
    a.s2 += m.signal_mse * m.signal_mse;
  }
  auto mean_se = [](double sum, double sum2, int n) {
    const double mean = sum / n;
    if (n < 2) return std::pair{mean, 0.0};
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
    return std::pair{mean, std::sqrt(var / n)};
  };
  std::vector<SummaryRow> out;
  for (const auto& [key, a] : acc) {
    SummaryRow row;
    row.algo = algo_order[std::get<0>(key)];
    row.snr_db = std::get<1>(key);
    row.frame = std::get<2>(key);
    row.trials = a.n;
    const auto [rm, rse] = mean_se(a.r, a.r2, a.n);
    const auto [sm, sse] = mean_se(a.s, a.s2, a.n);
    row.rmse_mean = rm;
    row.rmse_se = rse;
    row.signal_mse_mean = sm;
    row.signal_mse_se = sse;
    out.push_back(std::move(row));
  }
  return out;
}

ExperimentResult sweep_snr(const ScenarioConfig& cfg, const std::vector<double>& snr_db,
                           const ExperimentOptions& options) {
  ScenarioConfig c = cfg;
  c.snr_db = snr_db;
  return run_experiment(c, options);
}

}  // namespace isac
