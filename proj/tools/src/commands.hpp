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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "qtraj/ift_estimator.hpp"

namespace qtraj::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitRuntimeGuard = 2,
  kExitValidationFailure = 3,
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 1;
  bool dump_trajectories = false;
  double threshold = 0.05;  // trace-distance bound for validate
};

// Two-level models start from the random superposition ensemble, larger models from a random basis state.
InitialSampler default_sampler(const LindbladModel& model);

EstimatorOptions estimator_options(const ExperimentConfig& config, const RunOverrides& overrides);

std::string format_double(double x);
std::string csv_escape(const std::string& field);

int run_simulate(const ExperimentConfig& config, const RunOverrides& overrides, std::ostream& log);
int run_sweep(const ExperimentConfig& config, const RunOverrides& overrides, std::ostream& log);
int run_validate(const ExperimentConfig& config, const RunOverrides& overrides, std::ostream& log);

// Full command line handling, including environment overrides and error-to-exit-code mapping.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qtraj::cli
