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

#include "qtraj/pdp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

double checked_log_norm(const Vector& v, double t) {
  const double n2 = v.squaredNorm();
  if (!(n2 > kZeroNormThreshold)) {
    std::ostringstream msg;
    msg << "drift annihilated the state at t = " << t;
    throw Error(ErrorCode::kNearZeroNorm, msg.str());
  }
  return std::log(n2);
}

nlohmann::json amplitudes_json(const StateVector& psi) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < psi.dim(); ++i) out.push_back({psi[i].real(), psi[i].imag()});
  return out;
}

}  // namespace

StateVector sample_initial_state(CounterRng& rng) {
  for (;;) {
    const double mod_e = rng.uniform();
    const double mod_g = rng.uniform();
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    if (mod_e < 1e-8 && mod_g < 1e-8) continue;
    Vector v(2);
    v(two_level::kGround) = mod_g;
    v(two_level::kExcited) = std::polar(mod_e, phase);
    return normalize(StateVector(std::move(v)));
  }
}

TrajectoryRecord forward_simulate(const LindbladModel& model, const PropagatorGrid& grid,
                                  const StateVector& psi0, CounterRng& rng) {
  if (psi0.dim() != model.dim()) throw Error(ErrorCode::kDimensionMismatch, "initial state dimension");
  if (!psi0.is_normalized(1e-10)) throw Error(ErrorCode::kInvalidParameter, "initial state not normalized");

  const std::size_t n = grid.steps();
  const double dt = grid.dt();
  const std::size_t channels = model.channel_count();

  TrajectoryRecord rec;
  rec.direction = Direction::kForward;
  rec.initial_state = psi0;
  rec.dt = dt;
  rec.horizon = grid.horizon();
  rec.rng_key = rng.key();
  rec.rng_stream = rng.stream();

  Vector psi = psi0.amplitudes();
  Vector work(model.dim());
  std::vector<double> cumulative(channels);

  DriftSegment segment;
  segment.first_step = 0;
  segment.t_start = 0.0;
  segment.entry_state = psi0;
  double log_survival = 0.0;

  for (std::size_t s = 0; s < n; ++s) {
    work.noalias() = grid.forward(s) * psi;
    const double log_n2 = checked_log_norm(work, grid.time(s + 1));
    log_survival += log_n2;
    psi = work * std::exp(-0.5 * log_n2);

    if (s + 1 == n) break;

    const double t = grid.time(s + 1);
    const std::vector<double>& rates = grid.rates(s + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < channels; ++i) {
      if (rates[i] > 0.0) {
        const double overlap = psi.dot(model.jump_square(i).matrix() * psi).real();
        total += rates[i] * std::max(overlap, 0.0) * dt;
      }
      cumulative[i] = total;
    }
    if (total >= kMaxStepJumpProbability) {
      std::ostringstream msg;
      msg << "total jump probability " << total << " >= " << kMaxStepJumpProbability << " at t = " << t
          << " with dt = " << dt;
      throw Error(ErrorCode::kStepTooLarge, msg.str());
    }

    const double u = rng.uniform();
    if (u >= total) continue;

    const std::size_t channel =
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    StateVector pre(psi);
    segment.t_end = t;
    segment.end_step = s + 1;
    segment.exit_state = pre;
    segment.log_survival = log_survival;
    rec.drifts.push_back(std::move(segment));

    StateVector post = normalize(apply(model.jump_operator(channel), pre));
    psi = post.amplitudes();
    rec.jumps.push_back(JumpEvent{t, s + 1, channel, std::move(pre), post});

    segment = DriftSegment{};
    segment.first_step = s + 1;
    segment.t_start = t;
    segment.entry_state = std::move(post);
    log_survival = 0.0;
  }

  rec.final_state = StateVector(psi);
  segment.t_end = grid.horizon();
  segment.end_step = n;
  segment.exit_state = rec.final_state;
  segment.log_survival = log_survival;
  rec.drifts.push_back(std::move(segment));
  return rec;
}

TrajectoryRecord forward_simulate(const LindbladModel& model, const StateVector& psi0, double dt,
                                  double horizon, CounterRng& rng) {
  const PropagatorGrid grid(model, dt, horizon);
  return forward_simulate(model, grid, psi0, rng);
}

TrajectoryRecord backward_construct(const LindbladModel& model, const PropagatorGrid& grid,
                                    const TrajectoryRecord& fwd) {
  if (fwd.direction != Direction::kForward) {
    throw Error(ErrorCode::kInvalidParameter, "backward_construct needs a forward record");
  }
  const std::size_t n = grid.steps();
  if (fwd.drifts.empty() || fwd.drifts.back().end_step != n) {
    throw Error(ErrorCode::kGridMismatch, "forward record does not match the propagator grid");
  }

  TrajectoryRecord rec;
  rec.direction = Direction::kBackward;
  rec.initial_state = fwd.final_state;
  rec.dt = fwd.dt;
  rec.horizon = fwd.horizon;
  rec.rng_key = fwd.rng_key;
  rec.rng_stream = fwd.rng_stream;
  rec.jumps.resize(fwd.jumps.size());
  rec.drifts.resize(fwd.drifts.size());

  Vector psi = fwd.final_state.amplitudes();
  Vector work(model.dim());

  std::size_t pending = fwd.jumps.size();  // jumps not yet undone
  std::size_t segment_end = n;
  StateVector entry = fwd.final_state;
  double log_survival = 0.0;

  auto close_segment = [&](std::size_t first_step) {
    DriftSegment& seg = rec.drifts[pending];
    seg.first_step = first_step;
    seg.end_step = segment_end;
    seg.t_start = grid.time(first_step);
    seg.t_end = segment_end == n ? grid.horizon() : grid.time(segment_end);
    seg.entry_state = entry;
    seg.exit_state = StateVector(psi);
    seg.log_survival = log_survival;
  };

  for (std::size_t s = n; s-- > 0;) {
    if (pending > 0 && fwd.jumps[pending - 1].step == s + 1) {
      close_segment(s + 1);
      const JumpEvent& fj = fwd.jumps[pending - 1];
      StateVector pre(psi);
      StateVector post = normalize(apply(model.jump_adjoint(fj.channel), pre));
      psi = post.amplitudes();
      --pending;
      rec.jumps[pending] = JumpEvent{fj.time, fj.step, fj.channel, std::move(pre), post};
      entry = std::move(post);
      segment_end = s + 1;
      log_survival = 0.0;
    }
    work.noalias() = grid.backward(s) * psi;
    const double log_n2 = checked_log_norm(work, grid.time(s));
    log_survival += log_n2;
    psi = work * std::exp(-0.5 * log_n2);
  }
  if (pending != 0) throw Error(ErrorCode::kGridMismatch, "forward jumps are not on the grid");
  close_segment(0);
  rec.final_state = StateVector(psi);
  return rec;
}

double drift_log_norm(const PropagatorGrid& grid, std::size_t first_step, std::size_t end_step,
                      const StateVector& psi, Direction direction) {
  if (first_step > end_step || end_step > grid.steps()) {
    throw Error(ErrorCode::kIntervalMismatch, "drift interval outside the grid");
  }
  Vector v = psi.amplitudes();
  Vector work(v.size());
  double log_norm = 0.0;
  const std::size_t count = end_step - first_step;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = direction == Direction::kForward ? first_step + k : end_step - 1 - k;
    work.noalias() = (direction == Direction::kForward ? grid.forward(s) : grid.backward(s)) * v;
    const double log_n2 = checked_log_norm(work, grid.time(s));
    log_norm += log_n2;
    v = work * std::exp(-0.5 * log_n2);
  }
  return log_norm;
}

std::vector<StateVector> states_at_steps(const PropagatorGrid& grid, const TrajectoryRecord& fwd,
                                         const std::vector<std::size_t>& steps) {
  if (fwd.direction != Direction::kForward) {
    throw Error(ErrorCode::kInvalidParameter, "states_at_steps needs a forward record");
  }
  if (!std::is_sorted(steps.begin(), steps.end())) {
    throw Error(ErrorCode::kInvalidParameter, "sample steps must be sorted");
  }
  if (!steps.empty() && steps.back() > grid.steps()) {
    throw Error(ErrorCode::kGridMismatch, "sample step beyond the horizon");
  }
  if (fwd.drifts.empty() || fwd.drifts.back().end_step != grid.steps()) {
    throw Error(ErrorCode::kGridMismatch, "forward record does not match the propagator grid");
  }

  std::vector<StateVector> out;
  out.reserve(steps.size());
  std::size_t next = 0;
  Vector work(fwd.initial_state.dim());
  for (const DriftSegment& seg : fwd.drifts) {
    Vector v = seg.entry_state.amplitudes();
    std::size_t s = seg.first_step;
    for (;;) {
      // The segment owns steps in [first_step, end_step); the final one also owns T.
      const bool owns = s < seg.end_step || (s == grid.steps() && seg.end_step == grid.steps());
      while (next < steps.size() && steps[next] == s && owns) {
        out.emplace_back(v);
        ++next;
      }
      if (s == seg.end_step) break;
      work.noalias() = grid.forward(s) * v;
      v = work / work.norm();
      ++s;
    }
  }
  return out;
}

std::string to_json_line(const TrajectoryRecord& rec, std::size_t trajectory_id) {
  nlohmann::json j;
  j["trajectory"] = trajectory_id;
  j["direction"] = rec.direction == Direction::kForward ? "forward" : "backward";
  j["dt"] = rec.dt;
  j["horizon"] = rec.horizon;
  j["rng_key"] = rec.rng_key;
  j["rng_stream"] = rec.rng_stream;
  j["initial_state"] = amplitudes_json(rec.initial_state);
  j["final_state"] = amplitudes_json(rec.final_state);
  nlohmann::json jumps = nlohmann::json::array();
  for (const JumpEvent& e : rec.jumps) {
    jumps.push_back({{"time", e.time},
                     {"channel", e.channel},
                     {"pre_state", amplitudes_json(e.pre_state)},
                     {"post_state", amplitudes_json(e.post_state)}});
  }
  j["jumps"] = std::move(jumps);
  nlohmann::json drifts = nlohmann::json::array();
  for (const DriftSegment& d : rec.drifts) {
    drifts.push_back({{"t_start", d.t_start}, {"t_end", d.t_end}, {"log_survival", d.log_survival}});
  }
  j["drifts"] = std::move(drifts);
  return j.dump();
}

}  // namespace qtraj
