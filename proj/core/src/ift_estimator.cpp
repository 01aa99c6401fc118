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

#include "qtraj/ift_estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

bool is_discard(ErrorCode code) {
  return code == ErrorCode::kNearZeroNorm || code == ErrorCode::kUndefinedRate;
}

TrajectoryOutcome run_one(const LindbladModel& model, const PropagatorGrid& grid,
                          const EstimatorOptions& options, const InitialSampler& sampler, std::size_t index) {
  TrajectoryOutcome out;
  out.index = index;
  CounterRng rng(options.seed, index);
  const StateVector psi0 = sampler(rng);
  TrajectoryRecord fwd = forward_simulate(model, grid, psi0, rng);
  out.n_jumps = fwd.jumps.size();
  try {
    const TrajectoryRecord bwd = backward_construct(model, grid, fwd);
    out.log_weight = log_trajectory_weight(model, grid, fwd, bwd, options.mode);
    out.weight = std::exp(out.log_weight);
    if (!std::isfinite(out.weight)) {
      throw Error(ErrorCode::kUndefinedRate, "weight overflow");
    }
    if (options.compute_ledger) {
      const EntropyLedger ledger = ledger_for_trajectory(model, grid, fwd, bwd, options.mode);
      out.ledger = LedgerSummary{ledger.jump_flux(), ledger.drift_flux(), ledger.thermal_total(),
                                 ledger.nonthermal_jump_total(), ledger.kappa_sum()};
    }
  } catch (const Error& e) {
    if (!is_discard(e.code())) throw;
    out.discarded = true;
    out.discard_reason = e.what();
    out.log_weight = 0.0;
    out.weight = 0.0;
    out.ledger.reset();
  }
  if (options.keep_records) out.forward = std::move(fwd);
  return out;
}

}  // namespace

bool IFTEstimate::unreliable() const {
  return n_trajectories == 0 ||
         static_cast<double>(n_discarded) > kMaxReliableDiscardFraction * static_cast<double>(n_trajectories);
}

double backward_direct_rate(const LindbladModel& model, std::size_t channel, double t,
                            const StateVector& chi_backward) {
  return model.backward_rate(channel, t) * norm_sq(apply(model.jump_adjoint(channel), chi_backward));
}

double log_trajectory_weight(const LindbladModel& model, const PropagatorGrid& grid,
                             const TrajectoryRecord& fwd, const TrajectoryRecord& bwd, DriftReversal mode) {
  if (fwd.direction != Direction::kForward || bwd.direction != Direction::kBackward) {
    throw Error(ErrorCode::kInvalidParameter, "weight needs a forward and a backward record");
  }
  if (fwd.jumps.size() != bwd.jumps.size() || fwd.drifts.size() != bwd.drifts.size()) {
    throw Error(ErrorCode::kIntervalMismatch, "forward and backward records have different shapes");
  }
  double log_w = 0.0;
  for (std::size_t k = 0; k < fwd.jumps.size(); ++k) {
    const JumpEvent& f = fwd.jumps[k];
    const JumpEvent& b = bwd.jumps[k];
    const double r_rev = reversed_rate(model, f.channel, f.time, f.pre_state);
    const double r_back = backward_direct_rate(model, b.channel, b.time, b.pre_state);
    if (!(r_rev > 0.0) || !(r_back > 0.0)) {
      throw Error(ErrorCode::kUndefinedRate, "jump rate ratio undefined at t = " + std::to_string(f.time));
    }
    log_w += std::log(r_rev) - std::log(r_back);
  }
  for (std::size_t k = 0; k < fwd.drifts.size(); ++k) {
    log_w += reversed_drift_log_norm(grid, fwd, bwd, k, mode) - bwd.drifts[k].log_survival;
  }
  return log_w;
}

double trajectory_weight(const LindbladModel& model, const PropagatorGrid& grid,
                         const TrajectoryRecord& fwd, const TrajectoryRecord& bwd, DriftReversal mode) {
  return std::exp(log_trajectory_weight(model, grid, fwd, bwd, mode));
}

std::vector<TrajectoryOutcome> run_trajectories(const LindbladModel& model, const EstimatorOptions& options,
                                                const InitialSampler& sampler) {
  if (options.n_trajectories < 1) throw Error(ErrorCode::kInvalidParameter, "need at least one trajectory");
  const PropagatorGrid grid(model, options.dt, options.horizon);
  const std::size_t n = options.n_trajectories;
  std::vector<TrajectoryOutcome> outcomes(n);

  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = n;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        outcomes[i] = run_one(model, grid, options, sampler, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

IFTEstimate summarize(const std::vector<TrajectoryOutcome>& outcomes) {
  IFTEstimate est;
  est.n_trajectories = outcomes.size();
  CompensatedSum sum;
  std::vector<double> weights;
  weights.reserve(outcomes.size());
  for (const TrajectoryOutcome& o : outcomes) {
    if (o.discarded) {
      ++est.n_discarded;
      continue;
    }
    sum.add(o.weight);
    weights.push_back(o.weight);
  }
  const std::size_t used = weights.size();
  if (used == 0) {
    est.mean = std::nan("");
    est.std_error = std::nan("");
    est.zeta = std::nan("");
    return est;
  }
  est.mean = sum.value() / static_cast<double>(used);
  if (used > 1) {
    CompensatedSum sq;
    for (double w : weights) sq.add((w - est.mean) * (w - est.mean));
    const double variance = sq.value() / static_cast<double>(used - 1);
    est.std_error = std::sqrt(variance / static_cast<double>(used));
  }
  est.zeta = est.mean - 1.0;
  std::sort(weights.begin(), weights.end());
  const std::size_t q = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(used))) - 1;
  est.weight_q95 = weights[std::min(q, used - 1)];
  return est;
}

IFTEstimate estimate(const LindbladModel& model, const EstimatorOptions& options, const InitialSampler& sampler) {
  return summarize(run_trajectories(model, options, sampler));
}

std::vector<SweepPoint> sweep(const std::function<LindbladModel(double)>& family,
                              const std::vector<double>& coordinates, const EstimatorOptions& options,
                              const InitialSampler& sampler, const std::string& label) {
  if (coordinates.empty()) throw Error(ErrorCode::kInvalidParameter, "sweep needs at least one coordinate");
  std::vector<SweepPoint> points;
  points.reserve(coordinates.size());
  for (std::size_t i = 0; i < coordinates.size(); ++i) {
    SweepPoint point;
    point.coordinate = coordinates[i];
    EstimatorOptions point_options = options;
    point_options.seed = derive_seed(options.seed, i);
    try {
      IFTEstimate est = estimate(family(coordinates[i]), point_options, sampler);
      est.coordinate_label = label;
      est.coordinate_value = coordinates[i];
      point.estimate = std::move(est);
    } catch (const Error& e) {
      point.error = e.what();
    }
    points.push_back(std::move(point));
  }
  return points;
}

InitialSampler fixed_initial_state(StateVector psi) {
  return [psi = std::move(psi)](CounterRng&) { return psi; };
}

}  // namespace qtraj
