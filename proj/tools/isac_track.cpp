// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/config.hpp"
#include "isac/errors.hpp"
#include "isac/experiment.hpp"
#include "isac/outputs.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

bool is_config_error(isac::ErrorCode code) {
  return code == isac::ErrorCode::ParseError || code == isac::ErrorCode::ValidationError ||
         code == isac::ErrorCode::ConfigMismatch;
}

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != item.size()) {
      throw isac::Error(isac::ErrorCode::ValidationError, "snr: cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

struct RunArgs {
  std::string config;
  std::string out;
  std::string algos = "hvmp,ekf,pos-only";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;
  bool diagnostics = false;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "scenario JSON file")->required();
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--algos", a.algos, "comma-separated subset of hvmp,ekf,pos-only");
  cmd->add_option("--seed", a.seed, "master seed (overrides the config)");
  cmd->add_option("--trials", a.trials, "number of trials (overrides the config)");
  cmd->add_option("--workers", a.workers, "worker threads (overrides the config)");
  cmd->add_flag("--diagnostics", a.diagnostics, "write diagnostics.jsonl into the output directory");
}

int execute(const RunArgs& a, const std::optional<std::vector<double>>& snr) {
  isac::ScenarioConfig cfg;
  isac::ExperimentOptions opts;
  try {
    cfg = isac::load_config(a.config);
    if (a.seed) cfg.master_seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    if (a.workers) cfg.workers = *a.workers;
    if (snr) cfg.snr_db = *snr;
    cfg.validate();
    opts.algorithms = isac::parse_algorithm_list(a.algos);
  } catch (const isac::Error& e) {
    std::cerr << e.what() << '\n';
    return is_config_error(e.code()) || e.code() == isac::ErrorCode::IoError ? kConfigError
                                                                           : kRuntimeError;
  }

  try {
    std::filesystem::create_directories(a.out);
    std::ofstream diag;
    if (a.diagnostics) {
      diag.open(std::filesystem::path(a.out) / "diagnostics.jsonl", std::ios::trunc);
      if (!diag) throw isac::Error(isac::ErrorCode::IoError, "cannot write diagnostics.jsonl");
      opts.diagnostics = [&diag](const std::string& line) { diag << line << '\n'; };
    }
    const auto result = isac::run_experiment(cfg, opts);
    isac::emit_outputs(result, a.out);
    std::cout << "wrote " << result.metrics.size() << " metric rows, " << result.failures.size()
              << " failed runs to " << a.out << '\n';
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiuser tracking and symbol detection simulator"};
  app.require_subcommand(1);

  RunArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run trials at the SNRs of the config");
  add_run_options(simulate, sim);

  RunArgs sweep;
  std::string snr_text;
  auto* sweep_cmd = app.add_subcommand("sweep-snr", "run trials over a list of SNRs");
  add_run_options(sweep_cmd, sweep);
  sweep_cmd->add_option("--snr", snr_text, "comma-separated SNRs in dB")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "check a scenario file and echo it");
  validate->add_option("path", validate_path, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (simulate->parsed()) return execute(sim, std::nullopt);
  if (sweep_cmd->parsed()) {
    std::vector<double> snr;
    try {
      snr = parse_snr_list(snr_text);
    } catch (const isac::Error& e) {
      std::cerr << e.what() << '\n';
      return kConfigError;
    }
    return execute(sweep, snr);
  }
  try {
    const auto cfg = isac::load_config(validate_path);
    std::cout << isac::config_to_json(cfg) << '\n';
  } catch (const isac::Error& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
