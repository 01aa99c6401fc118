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

#include "qtraj/entropy_ledger.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

// ||A chi||^2 and ||A^dagger A chi||^2 = <chi|Lambda^2|chi>.
struct JumpMoments {
  double lambda;
  double lambda_sq;
};

JumpMoments jump_moments(const Operator& jump, const StateVector& chi) {
  if (jump.dim() != chi.dim()) throw Error(ErrorCode::kDimensionMismatch, "jump operator vs state");
  const Vector a_chi = jump.matrix() * chi.amplitudes();
  const Vector lambda_chi = jump.matrix().adjoint() * a_chi;
  return {a_chi.squaredNorm(), lambda_chi.squaredNorm()};
}

void require_possible(double lambda) {
  if (!(lambda > kZeroNormThreshold)) {
    throw Error(ErrorCode::kNearZeroNorm, "jump annihilates the state; rate ratio undefined");
  }
}

double positive_log(double v, const char* what) {
  if (!(v > 0.0)) throw Error(ErrorCode::kUndefinedRate, std::string(what) + " is not positive");
  return std::log(v);
}

}  // namespace

const char* to_string(DriftReversal mode) {
  switch (mode) {
    case DriftReversal::kBackwardWalk: return "backward_walk";
    case DriftReversal::kForwardPreJump: return "forward_pre_jump";
    case DriftReversal::kPostJump: return "post_jump";
  }
  return "unknown";
}

double direct_rate(const LindbladModel& model, std::size_t channel, double t, const StateVector& chi) {
  return model.rate(channel, t) * norm_sq(apply(model.jump_operator(channel), chi));
}

double reversed_rate(const LindbladModel& model, std::size_t channel, double t, const StateVector& chi) {
  const JumpMoments m = jump_moments(model.jump_operator(channel), chi);
  require_possible(m.lambda);
  return model.backward_rate(channel, t) * m.lambda_sq / m.lambda;
}

double eta(const Operator& jump, const StateVector& chi) {
  const JumpMoments m = jump_moments(jump, chi);
  require_possible(m.lambda);
  return (m.lambda * m.lambda - m.lambda_sq) / (m.lambda * m.lambda);
}

double var1_state(const Operator& q, const StateVector& psi) {
  const double scale = std::max(1.0, q.matrix().cwiseAbs().maxCoeff());
  if (!is_hermitian(q, 1e-12 * scale)) throw Error(ErrorCode::kNonHermitian, "var1_state needs a Hermitian operator");
  if (q.dim() != psi.dim()) throw Error(ErrorCode::kDimensionMismatch, "var1_state");
  const Vector q_psi = q.matrix() * psi.amplitudes();
  const double mean = psi.amplitudes().dot(q_psi).real();
  return q_psi.squaredNorm() - mean * mean;
}

void EntropyLedger::add_jump(const JumpEntropy& entry) {
  jump_flux_ -= std::log(entry.rate_direct / entry.rate_reversed);
  jumps_.push_back(entry);
}

void EntropyLedger::add_drift(const DriftEntropy& entry) {
  drift_flux_ -= entry.log_survival_forward - entry.log_survival_reversed;
  drifts_.push_back(entry);
}

double EntropyLedger::thermal_total() const {
  double sum = 0.0;
  for (const JumpEntropy& j : jumps_) sum += j.thermal;
  return sum;
}

double EntropyLedger::nonthermal_jump_total() const {
  double sum = 0.0;
  for (const JumpEntropy& j : jumps_) sum += j.nonthermal;
  return sum;
}

double EntropyLedger::kappa_sum() const {
  double sum = 0.0;
  for (const DriftEntropy& d : drifts_) sum += d.kappa;
  return sum;
}

void accumulate_jump(EntropyLedger& ledger, const JumpEvent& jump, const LindbladModel& model) {
  const std::size_t i = jump.channel;
  const double gamma = model.rate(i, jump.time);
  const double gamma_b = model.backward_rate(i, jump.time);
  const JumpMoments m = jump_moments(model.jump_operator(i), jump.pre_state);
  require_possible(m.lambda);

  JumpEntropy entry;
  entry.k = ledger.jumps().size();
  entry.rate_direct = gamma * m.lambda;
  entry.rate_reversed = gamma_b * m.lambda_sq / m.lambda;
  positive_log(entry.rate_direct, "direct rate");
  positive_log(entry.rate_reversed, "reversed rate");
  entry.thermal = positive_log(gamma_b, "backward rate") - positive_log(gamma, "forward rate");
  entry.eta = (m.lambda * m.lambda - m.lambda_sq) / (m.lambda * m.lambda);
  entry.nonthermal = std::log(m.lambda_sq / (m.lambda * m.lambda));
  ledger.add_jump(entry);
}

double drift_flux_exact(const DriftSegment& forward, const DriftSegment& reversed) {
  if (forward.first_step != reversed.first_step || forward.end_step != reversed.end_step) {
    throw Error(ErrorCode::kIntervalMismatch, "drift segments cover different intervals");
  }
  return -(forward.log_survival - reversed.log_survival);
}

Operator composed_propagator(const LindbladModel& model, double t, double dt, int substeps) {
  const double h = dt / substeps;
  Operator u = Operator::identity(model.dim());
  for (int j = 0; j < substeps; ++j) u = step_propagator(model, t + j * h, h) * u;
  return u;
}

Operator appendix_I1(const LindbladModel& model, double t, double dt) {
  const double h = dt / kQuadratureSubsteps;
  Matrix sum = Matrix::Zero(model.dim(), model.dim());
  for (int a = 0; a < kQuadratureSubsteps; ++a) sum += model.decay_operator(t + (a + 0.5) * h).matrix();
  return Operator(h * sum);
}

Operator appendix_I2(const LindbladModel& model, double t, double dt) {
  const double h = dt / kQuadratureSubsteps;
  const Index n = model.dim();
  // Later times to the left: sum_a Omega_a^2 + 2 sum_{a > b} Omega_a Omega_b.
  Matrix earlier = Matrix::Zero(n, n);
  Matrix sum = Matrix::Zero(n, n);
  for (int a = 0; a < kQuadratureSubsteps; ++a) {
    const Matrix omega = model.decay_operator(t + (a + 0.5) * h).matrix();
    sum += omega * omega + 2.0 * omega * earlier;
    earlier += omega;
  }
  return Operator(h * h * sum);
}

double appendix_var1_expansion(const LindbladModel& model, double t, double dt, const StateVector& psi) {
  const double i1 = expectation(appendix_I1(model, t, dt), psi).real();
  const double i2 = expectation(appendix_I2(model, t, dt), psi).real();
  return i2 - i1 * i1;
}

double exact_step_var1(const LindbladModel& model, double t, double dt, const StateVector& psi) {
  const Operator u = composed_propagator(model, t, dt);
  return var1_state(Operator(u.matrix().adjoint() * u.matrix()), psi);
}

double drift_kappa(const LindbladModel& model, double t, double dt, const StateVector& psi) {
  const Operator u = composed_propagator(model, t, dt);
  const double n2 = norm_sq(apply(u, psi));
  if (!(n2 > kZeroNormThreshold)) throw Error(ErrorCode::kNearZeroNorm, "drift annihilates the state");
  Matrix q = u.matrix().adjoint() * u.matrix();
  q = 0.5 * (q + q.adjoint()).eval();
  return -var1_state(Operator(std::move(q)), psi) / (n2 * n2);
}

double reversed_drift_log_norm(const PropagatorGrid& grid, const TrajectoryRecord& fwd,
                               const TrajectoryRecord& bwd, std::size_t k, DriftReversal mode) {
  const DriftSegment& seg = fwd.drifts.at(k);
  switch (mode) {
    case DriftReversal::kBackwardWalk: {
      const DriftSegment& rev = bwd.drifts.at(k);
      if (rev.first_step != seg.first_step || rev.end_step != seg.end_step) {
        throw Error(ErrorCode::kIntervalMismatch, "backward drift does not match forward drift");
      }
      return rev.log_survival;
    }
    case DriftReversal::kForwardPreJump:
      return drift_log_norm(grid, seg.first_step, seg.end_step, seg.exit_state, Direction::kBackward);
    case DriftReversal::kPostJump: {
      const StateVector& phi = k < fwd.jumps.size() ? fwd.jumps[k].post_state : fwd.final_state;
      return drift_log_norm(grid, seg.first_step, seg.end_step, phi, Direction::kBackward);
    }
  }
  return 0.0;
}

namespace {

// Sum of per-step kappa along a forward drift, using the grid's step factors.
double segment_kappa(const PropagatorGrid& grid, const DriftSegment& seg) {
  Vector v = seg.entry_state.amplitudes();
  Vector uv(v.size());
  Vector quv(v.size());
  double kappa = 0.0;
  for (std::size_t s = seg.first_step; s < seg.end_step; ++s) {
    uv.noalias() = grid.forward(s) * v;
    quv.noalias() = grid.backward(s) * uv;
    const double n2 = uv.squaredNorm();
    if (!(n2 > kZeroNormThreshold)) throw Error(ErrorCode::kNearZeroNorm, "drift annihilates the state");
    // <Q> = ||U v||^2 and <Q^2> = ||U^dagger U v||^2 with Q = U^dagger U.
    kappa -= (quv.squaredNorm() - n2 * n2) / (n2 * n2);
    v = uv / std::sqrt(n2);
  }
  return kappa;
}

}  // namespace

EntropyLedger ledger_for_trajectory(const LindbladModel& model, const PropagatorGrid& grid,
                                    const TrajectoryRecord& fwd, const TrajectoryRecord& bwd,
                                    DriftReversal mode) {
  if (fwd.direction != Direction::kForward || bwd.direction != Direction::kBackward) {
    throw Error(ErrorCode::kInvalidParameter, "ledger needs a forward and a backward record");
  }
  if (fwd.jumps.size() != bwd.jumps.size() || fwd.drifts.size() != bwd.drifts.size()) {
    throw Error(ErrorCode::kIntervalMismatch, "forward and backward records have different shapes");
  }
  EntropyLedger ledger;
  for (const JumpEvent& jump : fwd.jumps) accumulate_jump(ledger, jump, model);
  for (std::size_t k = 0; k < fwd.drifts.size(); ++k) {
    DriftEntropy entry;
    entry.k = k;
    entry.log_survival_forward = fwd.drifts[k].log_survival;
    entry.log_survival_reversed = reversed_drift_log_norm(grid, fwd, bwd, k, mode);
    entry.kappa = segment_kappa(grid, fwd.drifts[k]);
    ledger.add_drift(entry);
  }
  return ledger;
}

double sigma_with_boundary_densities(const EntropyLedger& ledger, double log_p_initial,
                                     double log_p_final) {
  return (log_p_initial - log_p_final) - ledger.total_flux();
}

}  // namespace qtraj
