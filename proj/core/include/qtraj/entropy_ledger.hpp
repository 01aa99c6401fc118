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

// Per-trajectory entropy bookkeeping: direct and reversed jump rates, the
// jump and drift entropy fluxes into the environment, and their split into a
// thermal part ln(gamma^b / gamma) and a nonthermal part ln(1 - eta). All
// entropies are in nats.

#include <cstddef>
#include <vector>

#include "qtraj/hilbert.hpp"
#include "qtraj/lindblad_model.hpp"
#include "qtraj/pdp_engine.hpp"

namespace qtraj {

// Substeps per dt for the drift expansion integrals and composed propagators.
inline constexpr int kQuadratureSubsteps = 16;

// Which state the reversed drift norm ||U_eff^dagger psi||^2 of interval
// [t_{k-1}, t_k] is evaluated on.
enum class DriftReversal {
  // The state the backward walk occupies when it enters the interval at t_k.
  kBackwardWalk,
  // The forward state right before the jump at t_k (forward final state for
  // the last interval).
  kForwardPreJump,
  // The forward state right after the jump at t_k (forward final state for
  // the last interval).
  kPostJump,
};

const char* to_string(DriftReversal mode);

// R^D = gamma_i(t) ||A_i chi||^2
double direct_rate(const LindbladModel& model, std::size_t channel, double t, const StateVector& chi);

// R^R = gamma_i^b(t) <chi|(A^dagger A)^2|chi> / ||A chi||^2. Throws
// kNearZeroNorm if the direct jump is impossible.
double reversed_rate(const LindbladModel& model, std::size_t channel, double t, const StateVector& chi);

// eta = -Var(A^dagger A) / ||A chi||^4, always <= 0.
double eta(const Operator& jump, const StateVector& chi);

// <Q^2> - <Q>^2 for Hermitian Q; throws kNonHermitian otherwise.
double var1_state(const Operator& q, const StateVector& psi);

struct JumpEntropy {
  std::size_t k = 0;
  double rate_direct = 0.0;
  double rate_reversed = 0.0;
  double thermal = 0.0;     // ln(gamma^b / gamma)
  double nonthermal = 0.0;  // ln(1 - eta)
  double eta = 0.0;
};

struct DriftEntropy {
  std::size_t k = 0;
  double log_survival_forward = 0.0;   // ln ||U_eff psi_{k-1}||^2
  double log_survival_reversed = 0.0;  // ln ||U_eff^dagger phi_k||^2
  double kappa = 0.0;                  // sum of per-step kappa over the interval
};

class EntropyLedger {
 public:
  void add_jump(const JumpEntropy& entry);
  void add_drift(const DriftEntropy& entry);

  double jump_flux() const { return jump_flux_; }
  double drift_flux() const { return drift_flux_; }
  double total_flux() const { return jump_flux_ + drift_flux_; }
  double thermal_total() const;
  double nonthermal_jump_total() const;
  double kappa_sum() const;

  const std::vector<JumpEntropy>& jumps() const { return jumps_; }
  const std::vector<DriftEntropy>& drifts() const { return drifts_; }

 private:
  double jump_flux_ = 0.0;
  double drift_flux_ = 0.0;
  std::vector<JumpEntropy> jumps_;
  std::vector<DriftEntropy> drifts_;
};

// Appends the jump's entry and adds -ln(R^D / R^R) to the jump flux.
void accumulate_jump(EntropyLedger& ledger, const JumpEvent& jump, const LindbladModel& model);

// -(log_survival_forward - log_survival_reversed) for two records of the
// same interval; throws kIntervalMismatch otherwise.
double drift_flux_exact(const DriftSegment& forward, const DriftSegment& reversed);

// Time-ordered exp(-i int H_eff) over [t, t + dt] composed from midpoint
// substeps.
Operator composed_propagator(const LindbladModel& model, double t, double dt,
                             int substeps = kQuadratureSubsteps);

// int_t^{t+dt} Omega(t1) dt1 by the midpoint rule.
Operator appendix_I1(const LindbladModel& model, double t, double dt);
// int int_{[t, t+dt]^2} T{Omega(t1) Omega(t2)} dt1 dt2 by the midpoint rule.
Operator appendix_I2(const LindbladModel& model, double t, double dt);

// Second-order estimate Re<I2> - <I1>^2 of Var(U^dagger U) for one step.
double appendix_var1_expansion(const LindbladModel& model, double t, double dt, const StateVector& psi);
// Var(U^dagger U) with U = composed_propagator(model, t, dt).
double exact_step_var1(const LindbladModel& model, double t, double dt, const StateVector& psi);

// kappa = -Var(U^dagger U) / ||U psi||^4 for one measurement step.
double drift_kappa(const LindbladModel& model, double t, double dt, const StateVector& psi);

// ln ||U_eff^dagger phi||^2 over drift interval k with phi chosen by mode.
double reversed_drift_log_norm(const PropagatorGrid& grid, const TrajectoryRecord& forward,
                               const TrajectoryRecord& backward, std::size_t k, DriftReversal mode);

EntropyLedger ledger_for_trajectory(const LindbladModel& model, const PropagatorGrid& grid,
                                    const TrajectoryRecord& forward, const TrajectoryRecord& backward,
                                    DriftReversal mode = DriftReversal::kBackwardWalk);

// sigma = ln P_initial - ln P_final - (jump flux + drift flux), with the
// boundary log-densities supplied by the caller.
double sigma_with_boundary_densities(const EntropyLedger& ledger, double log_p_initial,
                                     double log_p_final);

}  // namespace qtraj
