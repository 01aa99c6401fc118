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

// Quantum trajectories as piecewise-deterministic processes on a fixed
// measurement grid, and the deterministic backward partner of a forward run.
//
// Measurements happen at t = dt, 2 dt, ..., T - dt. Each grid step first
// drifts the state with the step factor, then (if the step ends before T)
// tests for a jump at the step's end. Jump times therefore satisfy
// 0 < t_1 < ... < t_N < T and N jumps split [0, T] into N + 1 drifts.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qtraj/hilbert.hpp"
#include "qtraj/lindblad_model.hpp"
#include "qtraj/random.hpp"

namespace qtraj {

// Per-step total jump probability above which the grid is rejected.
inline constexpr double kMaxStepJumpProbability = 0.1;

enum class Direction { kForward, kBackward };

struct JumpEvent {
  double time = 0.0;
  std::size_t step = 0;  // time == step * dt
  std::size_t channel = 0;
  // Forward: post = normalize(A pre). Backward: post = normalize(A^dagger pre).
  StateVector pre_state;
  StateVector post_state;
};

// A no-jump interval [t_start, t_end] covering grid steps
// [first_step, end_step). entry_state is where the walk enters the interval
// (t_start forward, t_end backward) and exit_state where it leaves.
struct DriftSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t first_step = 0;
  std::size_t end_step = 0;
  StateVector entry_state;
  StateVector exit_state;
  // ln of the squared norm of the unnormalized propagated entry state.
  double log_survival = 0.0;
};

// Jumps and drifts are stored in forward time order for both directions, so
// index k of a backward record pairs with index k of its forward record.
struct TrajectoryRecord {
  Direction direction = Direction::kForward;
  StateVector initial_state;
  StateVector final_state;
  std::vector<JumpEvent> jumps;
  std::vector<DriftSegment> drifts;
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t rng_key = 0;
  std::uint64_t rng_stream = 0;
};

// c_g = |c_g| >= 0 real, c_e = |c_e| e^{i phi}, with |c_e|, |c_g| ~ U[0,1]
// and phi ~ U[0, 2 pi], then normalized.
StateVector sample_initial_state(CounterRng& rng);

// Throws kStepTooLarge when the total jump probability at any measurement
// reaches kMaxStepJumpProbability.
TrajectoryRecord forward_simulate(const LindbladModel& model, const PropagatorGrid& grid,
                                  const StateVector& psi0, CounterRng& rng);
TrajectoryRecord forward_simulate(const LindbladModel& model, const StateVector& psi0, double dt,
                                  double horizon, CounterRng& rng);

// Walks from T back to 0 starting in the forward final state, applying the
// backward step factors and A^dagger at every forward jump time. Consumes no
// randomness. Throws kNearZeroNorm when a backward jump annihilates the state.
TrajectoryRecord backward_construct(const LindbladModel& model, const PropagatorGrid& grid,
                                    const TrajectoryRecord& forward);

// ln ||U psi||^2 for the composed drift over steps [first_step, end_step):
// forward factors in increasing order, or backward factors in decreasing
// order (the backward drift from t_end down to t_start).
double drift_log_norm(const PropagatorGrid& grid, std::size_t first_step, std::size_t end_step,
                      const StateVector& psi, Direction direction);

// Normalized forward states at the given (sorted) grid step indices,
// reconstructed from the record by replaying its drifts. At a jump step the
// post-jump state is returned.
std::vector<StateVector> states_at_steps(const PropagatorGrid& grid, const TrajectoryRecord& forward,
                                         const std::vector<std::size_t>& steps);

// One-line JSON dump: times, channels and amplitudes as [re, im] pairs.
std::string to_json_line(const TrajectoryRecord& record, std::size_t trajectory_id);

}  // namespace qtraj
