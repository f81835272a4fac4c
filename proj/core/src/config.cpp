// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isac/errors.hpp"

namespace isac {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

// Reads one JSON object, remembering which keys were consumed so that the
// rest can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(label(), "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    if (!j_.contains(key)) invalid(field(key), "missing required field");
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number()) invalid(field(key), "expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number_integer()) invalid(field(key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number_unsigned()) invalid(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_boolean()) invalid(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_string()) invalid(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_array()) invalid(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Vec2 vec2(const std::string& key) {
    const auto v = numbers(key);
    if (v.size() != 2) invalid(field(key), "expected two numbers");
    return {v[0], v[1]};
  }

  template <class T, class F>
  void optional(const std::string& key, T& target, F read) {
    if (has(key)) target = (this->*read)(key);
  }

  Section child(const std::string& key) { return Section(get(key), field(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) invalid(field(it.key()), "unknown key");
    }
  }

  const json& raw() const { return j_; }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

AnchorSpec read_anchor(Section s) {
  AnchorSpec a;
  a.position = s.vec2("position");
  a.orientation = s.vec2("orientation");
  s.finish();
  return a;
}

void read_hvmp(Section s, HvmpConfig& h) {
  s.optional("outer_iterations", h.outer_iterations, &Section::integer);
  s.optional("inner_iterations", h.inner_iterations, &Section::integer);
  s.optional("grid_points", h.grid_points, &Section::integer);
  s.optional("newton_steps", h.newton_steps, &Section::integer);
  s.optional("likelihood_newton_steps", h.likelihood_newton_steps, &Section::integer);
  s.optional("gate_sigmas", h.gate_sigmas, &Section::number);
  s.optional("state_tolerance_m", h.state_tolerance, &Section::number);
  s.optional("activation_threshold", h.activation_threshold, &Section::number);
  s.optional("damping", h.damping, &Section::number);
  s.optional("kappa_min", h.kappa_min, &Section::number);
  s.optional("reference_phase_std", h.reference_phase_std, &Section::number);
  s.optional("noise_floor", h.noise_floor, &Section::number);
  s.finish();
}

void read_ekf(Section s, EkfConfig& e) {
  s.optional("grid_points", e.spectral.grid_points, &Section::integer);
  s.optional("alternations", e.spectral.alternations, &Section::integer);
  s.optional("gate_sigmas", e.spectral.gate_sigmas, &Section::number);
  s.optional("min_gate_cells", e.spectral.min_gate_cells, &Section::integer);
  s.optional("nopeak_ratio_db", e.spectral.nopeak_ratio_db, &Section::number);
  s.optional("gate_chi2", e.gate_chi2, &Section::number);
  s.optional("noise_floor", e.noise_floor, &Section::number);
  s.finish();
}

void read_position_only(Section s, PositionOnlyConfig& p) {
  s.optional("random_walk_std_m", p.random_walk_std, &Section::number);
  s.optional("velocity_std_mps", p.velocity_std, &Section::number);
  s.finish();
}

Placement parse_placement(const std::string& name, const std::string& path) {
  if (name == "uniform") return Placement::Uniform;
  if (name == "horizon_feasible") return Placement::HorizonFeasible;
  invalid(path, "expected \"uniform\" or \"horizon_feasible\"");
}

template <class F>
void with_path(const std::string& path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ValidationError && e.code() != ErrorCode::ConfigMismatch) throw;
    throw Error(ErrorCode::ValidationError, path + ": " + e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto& w = waveform;
  if (1 + (w.isac_subcarriers - 1) * w.subcarrier_stride > w.num_subcarriers) {
    invalid("waveform.subcarrier_stride",
            "ISAC subcarriers 1 + (N0 - 1) * stride exceed num_subcarriers");
  }
  with_path("waveform", [&] { w.validate(); });
  if (!(carrier_hz > 0.0)) invalid("physics.carrier_hz", "must be positive");
  if (!(speed_of_light > 0.0)) invalid("physics.speed_of_light", "must be positive");
  if (!(tx_power > 0.0)) invalid("tx_power_w", "must be positive");
  auto unit = [](const Vec2& v) { return std::abs(v.norm() - 1.0) < 1e-9; };
  if (!unit(bs.orientation)) invalid("bs.orientation", "must be a unit vector");
  for (std::size_t r = 0; r < ris.size(); ++r) {
    if (!unit(ris[r].orientation)) {
      invalid("ris[" + std::to_string(r) + "].orientation", "must be a unit vector");
    }
  }
  if (num_users < 1) invalid("users.count", "must be at least 1");
  if (num_frames < 1) invalid("frames", "must be at least 1");
  if (static_cast<int>(speeds.size()) != num_users) {
    invalid("users.speeds_mps", "needs one speed per user");
  }
  for (double s : speeds) {
    if (!(s >= 0.0)) invalid("users.speeds_mps", "speeds must be non-negative");
  }
  if (!(region.side > 0.0)) invalid("users.region.side", "must be positive");
  if (!(placement_margin >= 0.0)) invalid("users.placement_margin_m", "must be non-negative");
  if (!(initial_position_std >= 0.0)) invalid("users.initial_position_std_m", "must be >= 0");
  if (!(initial_velocity_std >= 0.0)) invalid("users.initial_velocity_std_mps", "must be >= 0");
  if (!(frame_interval > 0.0)) invalid("motion.frame_interval_s", "must be positive");
  if (!(accel_std >= 0.0)) invalid("motion.accel_std", "must be non-negative");
  for (double s : snr_db) {
    if (!std::isfinite(s)) invalid("snr_db", "entries must be finite");
  }
  if (!(bs_block_prob >= 0.0 && bs_block_prob <= 1.0)) invalid("blockage.bs", "must lie in [0, 1]");
  if (!(ris_block_prob >= 0.0 && ris_block_prob <= 1.0)) {
    invalid("blockage.ris", "must lie in [0, 1]");
  }
  with_path("hvmp", [&] { hvmp.validate(); });
  with_path("ekf", [&] { ekf.validate(); });
  with_path("position_only", [&] { position_only.validate(); });
  if (trials < 0) invalid("trials", "must be non-negative");
  if (workers < 1) invalid("workers", "must be at least 1");
}

PhysicalConstants ScenarioConfig::constants() const {
  return PhysicalConstants::from_carrier(carrier_hz, speed_of_light);
}

MotionModel ScenarioConfig::motion() const {
  return MotionModel::constant_velocity(frame_interval, accel_std);
}

ScenarioContext ScenarioConfig::context() const {
  const PhysicalConstants consts = constants();
  AnchorGeometry bs_geo{bs.position, bs.orientation, waveform.num_bs_elements};
  std::vector<RisDeployment> deployments;
  std::uint64_t state = splitmix(master_seed ^ 0x5249535f50524f46ULL);
  for (const auto& r : ris) {
    AnchorGeometry geo{r.position, r.orientation, waveform.num_ris_elements};
    state = splitmix(state);
    CMat profile =
        random_phase_profile(waveform.num_ris_elements, waveform.symbols_per_group, state);
    state = splitmix(state);
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(state >> 11) * 0x1.0p-53;
    RisDeployment d;
    d.anchor = geo;
    d.link = make_ris_link(bs_geo, geo, std::move(profile), std::polar(1.0, phase), consts);
    deployments.push_back(std::move(d));
  }
  return ScenarioContext(waveform, consts, bs_geo, std::move(deployments), tx_power, motion());
}

ScenarioConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  Section s(root, "");

  {
    Section w = s.child("waveform");
    auto& wf = cfg.waveform;
    wf.num_bs_elements = w.integer("num_bs_elements");
    wf.num_ris_elements = w.integer("num_ris_elements");
    wf.num_subcarriers = w.integer("num_subcarriers");
    wf.isac_subcarriers = w.integer("isac_subcarriers");
    wf.subcarrier_stride = w.integer("subcarrier_stride");
    const double bandwidth = w.number("bandwidth_hz");
    wf.subcarrier_spacing = bandwidth / wf.num_subcarriers;
    wf.symbols_per_group = w.integer("symbols_per_group");
    wf.num_groups = w.integer("num_groups");
    wf.group_stride = w.integer("group_stride");
    wf.cyclic_prefix = w.integer("cyclic_prefix");
    wf.element_spacing = w.number("element_spacing");
    w.finish();
  }
  {
    Section p = s.child("physics");
    cfg.carrier_hz = p.number("carrier_hz");
    cfg.speed_of_light = p.number("speed_of_light");
    p.finish();
  }
  cfg.bs = read_anchor(s.child("bs"));
  {
    const json& arr = s.get("ris");
    if (!arr.is_array()) invalid("ris", "expected an array");
    for (std::size_t r = 0; r < arr.size(); ++r) {
      cfg.ris.push_back(read_anchor(Section(arr[r], "ris[" + std::to_string(r) + "]")));
    }
  }
  cfg.tx_power = s.number("tx_power_w");
  {
    Section u = s.child("users");
    cfg.num_users = u.integer("count");
    cfg.speeds = u.numbers("speeds_mps");
    Section reg = u.child("region");
    cfg.region.center = reg.vec2("center");
    cfg.region.side = reg.number("side");
    reg.finish();
    cfg.placement = parse_placement(u.string("placement"), u.field("placement"));
    cfg.placement_margin = u.number("placement_margin_m");
    cfg.initial_position_std = u.number("initial_position_std_m");
    cfg.initial_velocity_std = u.number("initial_velocity_std_mps");
    u.finish();
  }
  {
    Section m = s.child("motion");
    cfg.frame_interval = m.number("frame_interval_s");
    cfg.accel_std = m.number("accel_std");
    m.finish();
  }
  cfg.num_frames = s.integer("frames");
  cfg.snr_db = s.numbers("snr_db");
  {
    Section b = s.child("blockage");
    cfg.bs_block_prob = b.number("bs");
    cfg.ris_block_prob = b.number("ris");
    b.finish();
  }
  if (s.has("hvmp")) read_hvmp(s.child("hvmp"), cfg.hvmp);
  if (s.has("ekf")) read_ekf(s.child("ekf"), cfg.ekf);
  if (s.has("position_only")) read_position_only(s.child("position_only"), cfg.position_only);
  cfg.position_only.hvmp = cfg.hvmp;
  cfg.trials = s.integer("trials");
  cfg.master_seed = s.unsigned_integer("master_seed");
  if (s.has("workers")) cfg.workers = s.integer("workers");
  s.finish();

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
  auto v2 = [](const Vec2& v) { return json::array({v.x(), v.y()}); };
  auto anchor = [&](const AnchorSpec& a) {
    return json{{"position", v2(a.position)}, {"orientation", v2(a.orientation)}};
  };
  const auto& w = cfg.waveform;
  json j;
  j["waveform"] = {{"num_bs_elements", w.num_bs_elements},
                   {"num_ris_elements", w.num_ris_elements},
                   {"num_subcarriers", w.num_subcarriers},
                   {"isac_subcarriers", w.isac_subcarriers},
                   {"subcarrier_stride", w.subcarrier_stride},
                   {"bandwidth_hz", w.subcarrier_spacing * w.num_subcarriers},
                   {"symbols_per_group", w.symbols_per_group},
                   {"num_groups", w.num_groups},
                   {"group_stride", w.group_stride},
                   {"cyclic_prefix", w.cyclic_prefix},
                   {"element_spacing", w.element_spacing}};
  j["physics"] = {{"carrier_hz", cfg.carrier_hz}, {"speed_of_light", cfg.speed_of_light}};
  j["bs"] = anchor(cfg.bs);
  j["ris"] = json::array();
  for (const auto& r : cfg.ris) j["ris"].push_back(anchor(r));
  j["tx_power_w"] = cfg.tx_power;
  j["users"] = {{"count", cfg.num_users},
                {"speeds_mps", cfg.speeds},
                {"region", {{"center", v2(cfg.region.center)}, {"side", cfg.region.side}}},
                {"placement",
                 cfg.placement == Placement::Uniform ? "uniform" : "horizon_feasible"},
                {"placement_margin_m", cfg.placement_margin},
                {"initial_position_std_m", cfg.initial_position_std},
                {"initial_velocity_std_mps", cfg.initial_velocity_std}};
  j["motion"] = {{"frame_interval_s", cfg.frame_interval}, {"accel_std", cfg.accel_std}};
  j["frames"] = cfg.num_frames;
  j["snr_db"] = cfg.snr_db;
  j["blockage"] = {{"bs", cfg.bs_block_prob}, {"ris", cfg.ris_block_prob}};
  const auto& h = cfg.hvmp;
  j["hvmp"] = {{"outer_iterations", h.outer_iterations},
               {"inner_iterations", h.inner_iterations},
               {"grid_points", h.grid_points},
               {"newton_steps", h.newton_steps},
               {"likelihood_newton_steps", h.likelihood_newton_steps},
               {"gate_sigmas", h.gate_sigmas},
               {"state_tolerance_m", h.state_tolerance},
               {"activation_threshold", h.activation_threshold},
               {"damping", h.damping},
               {"reference_phase_std", h.reference_phase_std},
               {"kappa_min", h.kappa_min},
               {"noise_floor", h.noise_floor}};
  const auto& e = cfg.ekf;
  j["ekf"] = {{"grid_points", e.spectral.grid_points},
              {"alternations", e.spectral.alternations},
              {"gate_sigmas", e.spectral.gate_sigmas},
              {"min_gate_cells", e.spectral.min_gate_cells},
              {"nopeak_ratio_db", e.spectral.nopeak_ratio_db},
              {"gate_chi2", e.gate_chi2},
              {"noise_floor", e.noise_floor}};
  j["position_only"] = {{"random_walk_std_m", cfg.position_only.random_walk_std},
                        {"velocity_std_mps", cfg.position_only.velocity_std}};
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["workers"] = cfg.workers;
  return j.dump(2);
}

}  // namespace isac
