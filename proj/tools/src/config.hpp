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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qtraj/entropy_ledger.hpp"
#include "qtraj/lindblad_model.hpp"

namespace qtraj::cli {

inline constexpr int kSchemaVersion = 1;

// Raised for malformed or inconsistent configuration documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All parameters are dimensionless products with the reference step (one internal time unit).
struct DriveProducts {
  double dt_omega0 = 0.0;
  double dt_over_tau = 1.0;
  double dt_g1 = 0.0;
  double dt_over_tau1 = 1.0;
  double dt_g2 = 0.0;
  double dt_over_tau2 = 1.0;
  friend bool operator==(const DriveProducts&, const DriveProducts&) = default;
};

struct DirectModel {
  DriveProducts drive;
  friend bool operator==(const DirectModel&, const DirectModel&) = default;
};

struct HomodyneModel {
  DriveProducts drive;
  double beta_modulus = 0.0;
  double beta_phase_over_pi = 0.0;  // arg(beta) / pi
  friend bool operator==(const HomodyneModel&, const HomodyneModel&) = default;
};

struct ThermalModel {
  double dt_omega0 = 0.0;
  double dt_over_tau = 1.0;
  double mean_photon_number = 0.0;
  double dt_rate_scale = 0.0;
  friend bool operator==(const ThermalModel&, const ThermalModel&) = default;
};

struct EigenstateModel {
  std::vector<double> dt_energies;
  std::vector<std::vector<double>> dt_rates;  // dt_rates[a][b]: rate of |b> -> |a>
  friend bool operator==(const EigenstateModel&, const EigenstateModel&) = default;
};

using ModelSpec = std::variant<DirectModel, HomodyneModel, ThermalModel, EigenstateModel>;

struct RunConfig {
  std::size_t n_trajectories = 1;
  double dt = 1.0;
  double dt_over_T = 1.0;
  std::uint64_t master_seed = 0;
  DriftReversal drift_reversal = DriftReversal::kBackwardWalk;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct SweepConfig {
  std::string coordinate;  // "k", "beta_modulus" or "mean_photon_number"
  std::vector<double> values;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool dump_trajectories = false;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelSpec model;
  RunConfig run;
  std::optional<SweepConfig> sweep;
  OutputConfig outputs;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON with the derived products listed under "echo".
std::string echo_config(const ExperimentConfig& config);

const char* model_kind(const ModelSpec& model);
double horizon(const RunConfig& run);

// Model at a sweep coordinate; the base model when no coordinate is given.
LindbladModel build_model(const ExperimentConfig& config, std::optional<double> coordinate = std::nullopt);

}  // namespace qtraj::cli
