// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qtraj/error.hpp"

namespace qtraj::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("field '" + path + "': " + what);
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown field");
  }
}

const json& object_at(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) fail(join(path, key), "missing");
  const json& v = obj.at(key);
  if (!v.is_object()) fail(join(path, key), "expected an object");
  return v;
}

double number_at(const json& obj, const std::string& path, const std::string& key,
                 std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(join(path, key), "missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(join(path, key), "must be finite");
  return x;
}

double nonnegative_at(const json& obj, const std::string& path, const std::string& key,
                      std::optional<double> fallback = std::nullopt) {
  const double x = number_at(obj, path, key, fallback);
  if (x < 0.0) fail(join(path, key), "must be >= 0");
  return x;
}

double positive_at(const json& obj, const std::string& path, const std::string& key,
                   std::optional<double> fallback = std::nullopt) {
  const double x = number_at(obj, path, key, fallback);
  if (!(x > 0.0)) fail(join(path, key), "must be > 0");
  return x;
}

std::uint64_t unsigned_at(const json& obj, const std::string& path, const std::string& key,
                          std::optional<std::uint64_t> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(join(path, key), "missing");
  }
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    // Accept exact integers written in exponent form, e.g. 3e4.
    const double x = v.get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  fail(join(path, key), "expected a nonnegative integer");
}

std::vector<double> numbers_at(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

DriveProducts parse_drive(const json& m, const std::string& path) {
  DriveProducts d;
  d.dt_omega0 = nonnegative_at(m, path, "dt_omega0");
  d.dt_over_tau = positive_at(m, path, "dt_over_tau");
  d.dt_g1 = nonnegative_at(m, path, "dt_g1");
  d.dt_over_tau1 = positive_at(m, path, "dt_over_tau1");
  d.dt_g2 = nonnegative_at(m, path, "dt_g2");
  d.dt_over_tau2 = positive_at(m, path, "dt_over_tau2");
  return d;
}

const std::set<std::string> kDriveKeys{"kind",  "dt_omega0",    "dt_over_tau", "dt_g1",
                                       "dt_over_tau1", "dt_g2", "dt_over_tau2"};

ModelSpec parse_model(const json& m) {
  const std::string path = "model";
  if (!m.contains("kind") || !m.at("kind").is_string()) fail("model.kind", "missing or not a string");
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "two_level_direct") {
    reject_unknown(m, path, kDriveKeys);
    return DirectModel{parse_drive(m, path)};
  }
  if (kind == "two_level_homodyne") {
    std::set<std::string> keys = kDriveKeys;
    keys.insert({"beta_modulus", "beta_phase_over_pi"});
    reject_unknown(m, path, keys);
    HomodyneModel h;
    h.drive = parse_drive(m, path);
    h.beta_modulus = nonnegative_at(m, path, "beta_modulus");
    h.beta_phase_over_pi = number_at(m, path, "beta_phase_over_pi", 0.0);
    return h;
  }
  if (kind == "two_level_thermal") {
    reject_unknown(m, path, {"kind", "dt_omega0", "dt_over_tau", "mean_photon_number", "dt_rate_scale"});
    ThermalModel t;
    t.dt_omega0 = nonnegative_at(m, path, "dt_omega0");
    t.dt_over_tau = positive_at(m, path, "dt_over_tau");
    t.mean_photon_number = nonnegative_at(m, path, "mean_photon_number");
    t.dt_rate_scale = nonnegative_at(m, path, "dt_rate_scale");
    return t;
  }
  if (kind == "eigenstate_jump") {
    reject_unknown(m, path, {"kind", "dt_energies", "dt_rates"});
    EigenstateModel e;
    if (!m.contains("dt_energies")) fail("model.dt_energies", "missing");
    e.dt_energies = numbers_at(m.at("dt_energies"), "model.dt_energies");
    if (!m.contains("dt_rates") || !m.at("dt_rates").is_array()) fail("model.dt_rates", "expected an array of rows");
    const json& rows = m.at("dt_rates");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      e.dt_rates.push_back(numbers_at(rows[i], "model.dt_rates[" + std::to_string(i) + "]"));
    }
    return e;
  }
  fail("model.kind", "unknown model kind '" + kind + "'");
}

DriftReversal parse_mode(const std::string& s) {
  for (DriftReversal m : {DriftReversal::kBackwardWalk, DriftReversal::kForwardPreJump, DriftReversal::kPostJump}) {
    if (s == to_string(m)) return m;
  }
  fail("run.drift_reversal", "unknown mode '" + s + "'");
}

RunConfig parse_run(const json& r) {
  reject_unknown(r, "run", {"n_trajectories", "dt", "dt_over_T", "master_seed", "drift_reversal"});
  RunConfig run;
  run.n_trajectories = unsigned_at(r, "run", "n_trajectories");
  if (run.n_trajectories < 1) fail("run.n_trajectories", "must be >= 1");
  run.dt = positive_at(r, "run", "dt", 1.0);
  run.dt_over_T = positive_at(r, "run", "dt_over_T");
  run.master_seed = unsigned_at(r, "run", "master_seed", 0);
  if (r.contains("drift_reversal")) {
    if (!r.at("drift_reversal").is_string()) fail("run.drift_reversal", "expected a string");
    run.drift_reversal = parse_mode(r.at("drift_reversal").get<std::string>());
  }
  return run;
}

bool coordinate_allowed(const ModelSpec& model, const std::string& c) {
  if (std::holds_alternative<DirectModel>(model)) return c == "k";
  if (std::holds_alternative<HomodyneModel>(model)) return c == "beta_modulus";
  if (std::holds_alternative<ThermalModel>(model)) return c == "mean_photon_number";
  return false;
}

SweepConfig parse_sweep(const json& s, const ModelSpec& model) {
  reject_unknown(s, "sweep", {"coordinate", "values"});
  SweepConfig sw;
  if (!s.contains("coordinate") || !s.at("coordinate").is_string()) fail("sweep.coordinate", "missing or not a string");
  sw.coordinate = s.at("coordinate").get<std::string>();
  if (!coordinate_allowed(model, sw.coordinate)) {
    fail("sweep.coordinate", "'" + sw.coordinate + "' is not a sweep coordinate of model kind " + model_kind(model));
  }
  if (!s.contains("values")) fail("sweep.values", "missing");
  sw.values = numbers_at(s.at("values"), "sweep.values");
  if (sw.values.empty()) fail("sweep.values", "value list is empty");
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    if (!std::isfinite(sw.values[i]) || sw.values[i] < 0.0) {
      fail("sweep.values[" + std::to_string(i) + "]", "must be finite and >= 0");
    }
  }
  return sw;
}

OutputConfig parse_outputs(const json& o) {
  reject_unknown(o, "outputs", {"dir", "dump_trajectories"});
  OutputConfig out;
  if (o.contains("dir")) {
    if (!o.at("dir").is_string()) fail("outputs.dir", "expected a string");
    out.dir = o.at("dir").get<std::string>();
  }
  if (o.contains("dump_trajectories")) {
    if (!o.at("dump_trajectories").is_boolean()) fail("outputs.dump_trajectories", "expected a boolean");
    out.dump_trajectories = o.at("dump_trajectories").get<bool>();
  }
  return out;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

json drive_json(const DriveProducts& d) {
  return {{"dt_omega0", d.dt_omega0}, {"dt_over_tau", d.dt_over_tau},   {"dt_g1", d.dt_g1},
          {"dt_over_tau1", d.dt_over_tau1}, {"dt_g2", d.dt_g2}, {"dt_over_tau2", d.dt_over_tau2}};
}

json drive_echo(const DriveProducts& d) {
  return {{"omega0", d.dt_omega0}, {"tau", 1.0 / d.dt_over_tau}, {"g1", d.dt_g1},
          {"tau1", 1.0 / d.dt_over_tau1}, {"g2", d.dt_g2}, {"tau2", 1.0 / d.dt_over_tau2}};
}

TwoLevelDriveParams drive_params(const DriveProducts& d, double k) {
  return {k * d.dt_omega0, 1.0 / d.dt_over_tau, k * d.dt_g1, 1.0 / d.dt_over_tau1, k * d.dt_g2, 1.0 / d.dt_over_tau2};
}

}  // namespace

const char* model_kind(const ModelSpec& model) {
  switch (model.index()) {
    case 0: return "two_level_direct";
    case 1: return "two_level_homodyne";
    case 2: return "two_level_thermal";
    default: return "eigenstate_jump";
  }
}

double horizon(const RunConfig& run) { return 1.0 / run.dt_over_T; }

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("top level must be an object");
  reject_unknown(doc, "", {"schema_version", "name", "model", "run", "sweep", "outputs", "echo"});
  const std::uint64_t version = unsigned_at(doc, "", "schema_version");
  if (version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(version) + ", expected " +
                               std::to_string(kSchemaVersion));
  }
  ExperimentConfig cfg;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string() || doc.at("name").get<std::string>().empty()) fail("name", "expected a nonempty string");
    cfg.name = doc.at("name").get<std::string>();
  }
  cfg.model = parse_model(object_at(doc, "", "model"));
  cfg.run = parse_run(object_at(doc, "", "run"));
  try {
    grid_steps(cfg.run.dt, horizon(cfg.run));
  } catch (const Error& e) {
    fail("run.dt", e.what());
  }
  if (doc.contains("sweep") && !doc.at("sweep").is_null()) {
    cfg.sweep = parse_sweep(object_at(doc, "", "sweep"), cfg.model);
  }
  if (doc.contains("outputs")) cfg.outputs = parse_outputs(object_at(doc, "", "outputs"));
  // Surface builder-level validation (gaps, rate tables) at load time.
  try {
    if (cfg.sweep) {
      for (double v : cfg.sweep->values) build_model(cfg, v);
    } else {
      build_model(cfg);
    }
  } catch (const Error& e) {
    fail("model", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string echo_config(const ExperimentConfig& cfg) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = cfg.name;
  json model;
  json echo;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DirectModel>) {
          model = drive_json(m.drive);
          echo = drive_echo(m.drive);
        } else if constexpr (std::is_same_v<T, HomodyneModel>) {
          model = drive_json(m.drive);
          model["beta_modulus"] = m.beta_modulus;
          model["beta_phase_over_pi"] = m.beta_phase_over_pi;
          echo = drive_echo(m.drive);
          const Complex beta = std::polar(m.beta_modulus, m.beta_phase_over_pi * std::numbers::pi);
          echo["beta_re"] = beta.real();
          echo["beta_im"] = beta.imag();
        } else if constexpr (std::is_same_v<T, ThermalModel>) {
          model = {{"dt_omega0", m.dt_omega0},
                   {"dt_over_tau", m.dt_over_tau},
                   {"mean_photon_number", m.mean_photon_number},
                   {"dt_rate_scale", m.dt_rate_scale}};
          echo = {{"omega0", m.dt_omega0},
                  {"tau", 1.0 / m.dt_over_tau},
                  {"dt_gamma_emission", m.dt_rate_scale * (m.mean_photon_number + 1.0)},
                  {"dt_gamma_absorption", m.dt_rate_scale * m.mean_photon_number}};
        } else {
          model = {{"dt_energies", m.dt_energies}, {"dt_rates", m.dt_rates}};
          echo["levels"] = m.dt_energies.size();
        }
      },
      cfg.model);
  model["kind"] = model_kind(cfg.model);
  doc["model"] = model;
  doc["run"] = {{"n_trajectories", cfg.run.n_trajectories},
                {"dt", cfg.run.dt},
                {"dt_over_T", cfg.run.dt_over_T},
                {"master_seed", cfg.run.master_seed},
                {"drift_reversal", to_string(cfg.run.drift_reversal)}};
  if (cfg.sweep) doc["sweep"] = {{"coordinate", cfg.sweep->coordinate}, {"values", cfg.sweep->values}};
  doc["outputs"] = {{"dir", cfg.outputs.dir}, {"dump_trajectories", cfg.outputs.dump_trajectories}};
  echo["T"] = horizon(cfg.run);
  echo["steps"] = grid_steps(cfg.run.dt, horizon(cfg.run));
  doc["echo"] = echo;
  return doc.dump(2) + "\n";
}

LindbladModel build_model(const ExperimentConfig& cfg, std::optional<double> coordinate) {
  return std::visit(
      [&](const auto& m) -> LindbladModel {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DirectModel>) {
          return build_two_level_direct(drive_params(m.drive, coordinate.value_or(1.0)));
        } else if constexpr (std::is_same_v<T, HomodyneModel>) {
          const double modulus = coordinate.value_or(m.beta_modulus);
          return build_two_level_homodyne(drive_params(m.drive, 1.0),
                                          std::polar(modulus, m.beta_phase_over_pi * std::numbers::pi));
        } else if constexpr (std::is_same_v<T, ThermalModel>) {
          return build_two_level_thermal(m.dt_omega0, 1.0 / m.dt_over_tau,
                                         coordinate.value_or(m.mean_photon_number), m.dt_rate_scale);
        } else {
          if (coordinate) throw Error(ErrorCode::kInvalidParameter, "eigenstate_jump has no sweep coordinate");
          return build_eigenstate_jump_model(m.dt_energies, m.dt_rates);
        }
      },
      cfg.model);
}

}  // namespace qtraj::cli
