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

// Monte-Carlo estimate of <exp(-sigma_f)> = 1 + zeta_f from forward
// trajectories and their deterministic backward partners.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/entropy_ledger.hpp"
#include "qtraj/lindblad_model.hpp"
#include "qtraj/pdp_engine.hpp"
#include "qtraj/random.hpp"

namespace qtraj {

using InitialSampler = std::function<StateVector(CounterRng&)>;

struct EstimatorOptions {
  std::size_t n_trajectories = 1;
  double dt = 1.0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = hardware concurrency
  DriftReversal mode = DriftReversal::kBackwardWalk;
  bool compute_ledger = false;  // fill TrajectoryOutcome::ledger
  bool keep_records = false;    // fill TrajectoryOutcome::forward
};

// Discard rate above which an estimate is flagged unreliable.
inline constexpr double kMaxReliableDiscardFraction = 0.01;

struct LedgerSummary {
  double jump_flux = 0.0;
  double drift_flux = 0.0;
  double thermal_total = 0.0;
  double nonthermal_jump_total = 0.0;
  double kappa_sum = 0.0;
};

struct TrajectoryOutcome {
  std::size_t index = 0;
  std::size_t n_jumps = 0;
  bool discarded = false;
  std::string discard_reason;
  double log_weight = 0.0;
  double weight = 1.0;
  std::optional<LedgerSummary> ledger;
  std::optional<TrajectoryRecord> forward;
};

struct IFTEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double zeta = 0.0;
  std::size_t n_trajectories = 0;
  std::size_t n_discarded = 0;
  double weight_q95 = 0.0;
  std::string coordinate_label;
  double coordinate_value = 0.0;

  bool unreliable() const;
};

// R^D of the backward jump at t_k: gamma_i^b(t) ||A_i^dagger chi^b||^2.
double backward_direct_rate(const LindbladModel& model, std::size_t channel, double t,
                            const StateVector& chi_backward);

// ln W with W = prod_k R^R[chi_k^f] / R^D[chi_k^b] * prod_k D^R_k / D^D_k.
double log_trajectory_weight(const LindbladModel& model, const PropagatorGrid& grid,
                             const TrajectoryRecord& forward, const TrajectoryRecord& backward,
                             DriftReversal mode = DriftReversal::kBackwardWalk);
double trajectory_weight(const LindbladModel& model, const PropagatorGrid& grid,
                         const TrajectoryRecord& forward, const TrajectoryRecord& backward,
                         DriftReversal mode = DriftReversal::kBackwardWalk);

// Runs trajectory i on stream (options.seed, i): the initial state is drawn
// first from that stream, then the forward run. Outcomes are returned in
// index order and do not depend on options.threads. Pairs whose weight is
// undefined (annihilated backward jump, zero rate) are marked discarded;
// other errors propagate (the lowest failing index wins).
std::vector<TrajectoryOutcome> run_trajectories(const LindbladModel& model, const EstimatorOptions& options,
                                                const InitialSampler& sampler);

IFTEstimate summarize(const std::vector<TrajectoryOutcome>& outcomes);

IFTEstimate estimate(const LindbladModel& model, const EstimatorOptions& options, const InitialSampler& sampler);

struct SweepPoint {
  double coordinate = 0.0;
  std::optional<IFTEstimate> estimate;
  std::string error;  // set when the point failed
};

// One estimate per coordinate, point i seeded with derive_seed(options.seed, i).
std::vector<SweepPoint> sweep(const std::function<LindbladModel(double)>& family,
                              const std::vector<double>& coordinates, const EstimatorOptions& options,
                              const InitialSampler& sampler, const std::string& label);

// Fixed-state sampler for models that start in a known state.
InitialSampler fixed_initial_state(StateVector psi);

}  // namespace qtraj
