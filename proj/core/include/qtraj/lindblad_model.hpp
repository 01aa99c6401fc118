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

// Time-dependent Markovian open-system models: H_S(t) plus decay channels
// {gamma_i(t), A_i}, and the drift propagators derived from them.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/hilbert.hpp"

namespace qtraj {

// Closed family of scalar time profiles used for rates and drive amplitudes.
class Schedule {
 public:
  enum class Kind { kConstant, kExpDecay, kExpRise };

  static Schedule constant(double value);
  // t -> amplitude * exp(-t / tau)
  static Schedule exp_decay(double amplitude, double tau);
  // t -> amplitude * (1 - exp(-t / tau))
  static Schedule exp_rise(double amplitude, double tau);

  double operator()(double t) const;
  Schedule scaled(double factor) const;

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double time_constant() const { return tau_; }
  // True when the schedule is >= 0 for every t >= 0.
  bool nonnegative() const { return amplitude_ >= 0.0; }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  Schedule(Kind kind, double amplitude, double tau);

  Kind kind_;
  double amplitude_;
  double tau_;
};

struct HamiltonianTerm {
  Schedule coefficient;
  Operator op;  // Hermitian
};

struct Channel {
  Operator op;
  Schedule rate;
  // Index of the channel whose operator is op^dagger. The backward rate of
  // this channel is that partner's forward rate.
  std::optional<std::size_t> adjoint_partner;
  std::string label;
};

class LindbladModel {
 public:
  // Validates Hermiticity of the Hamiltonian terms, nonnegative rates and
  // the mutual adjoint pairing of channels.
  LindbladModel(Index dim, std::vector<HamiltonianTerm> hamiltonian, std::vector<Channel> channels);

  Index dim() const { return dim_; }
  const std::vector<HamiltonianTerm>& hamiltonian_terms() const { return terms_; }
  const std::vector<Channel>& channels() const { return channels_; }
  std::size_t channel_count() const { return channels_.size(); }
  const Channel& channel(std::size_t i) const { return channels_.at(i); }

  double rate(std::size_t i, double t) const { return channels_[i].rate(t); }
  bool has_backward_rate(std::size_t i) const { return channels_[i].adjoint_partner.has_value(); }
  // Throws Error(kUndefinedRate) for an unpaired channel.
  const Schedule& backward_rate_schedule(std::size_t i) const;
  double backward_rate(std::size_t i, double t) const { return backward_rate_schedule(i)(t); }

  const Operator& jump_operator(std::size_t i) const { return channels_[i].op; }
  const Operator& jump_adjoint(std::size_t i) const { return adjoints_[i]; }
  // Lambda_i = A_i^dagger A_i
  const Operator& jump_square(std::size_t i) const { return squares_[i]; }

  Operator hamiltonian(double t) const;
  // Omega(t) = sum_i gamma_i(t) A_i^dagger A_i
  Operator decay_operator(double t) const;

 private:
  Index dim_;
  std::vector<HamiltonianTerm> terms_;
  std::vector<Channel> channels_;
  std::vector<Operator> adjoints_;
  std::vector<Operator> squares_;
};

// H_S(t) - (i/2) Omega(t)
Operator effective_hamiltonian(const LindbladModel& model, double t);

// exp(-i H_eff(t_start + dt/2) dt); one midpoint factor of the time-ordered
// drift propagator.
Operator step_propagator(const LindbladModel& model, double t_start, double dt);

// adjoint(step_propagator(...)); composing these in reverse time order
// builds the backward drift propagator.
Operator backward_step_propagator(const LindbladModel& model, double t_start, double dt);

// Right-hand side of the master equation at time t.
Matrix lindblad_generator(const LindbladModel& model, double t, const Matrix& rho);

// Forward and backward step factors for every step of a fixed grid
// t_s = s * dt, s = 0..steps-1, plus the channel rates at every grid time
// t_s, s = 0..steps. Must be used with the model it was built from.
class PropagatorGrid {
 public:
  PropagatorGrid(const LindbladModel& model, double dt, double horizon);

  double dt() const { return dt_; }
  double horizon() const { return horizon_; }
  std::size_t steps() const { return forward_.size(); }
  double time(std::size_t step) const { return static_cast<double>(step) * dt_; }

  const Matrix& forward(std::size_t step) const { return forward_[step]; }
  const Matrix& backward(std::size_t step) const { return backward_[step]; }
  // gamma_i(t_s) for every channel i
  const std::vector<double>& rates(std::size_t step) const { return rates_[step]; }

 private:
  double dt_;
  double horizon_;
  std::vector<Matrix> forward_;
  std::vector<Matrix> backward_;
  std::vector<std::vector<double>> rates_;
};

// Number of dt steps in [0, horizon]; throws unless horizon is a whole
// multiple of dt.
std::size_t grid_steps(double dt, double horizon);

struct TwoLevelDriveParams {
  double omega0 = 0.0;  // drive amplitude, omega(t) = omega0 (1 - e^{-t/tau})
  double tau = 1.0;
  double g1 = 0.0;  // emission, gamma_1(t) = g1 e^{-t/tau1}
  double tau1 = 1.0;
  double g2 = 0.0;  // absorption, gamma_2(t) = g2 (1 - e^{-t/tau2})
  double tau2 = 1.0;
};

// H_S = omega(t)/2 sigma_x; channels (sigma_-, gamma_1) <-> (sigma_+, gamma_2).
LindbladModel build_two_level_direct(const TwoLevelDriveParams& params);

// Four channels sigma_- -/+ i beta (rate gamma_1/2) and sigma_+ -/+ i beta*
// (rate gamma_2/2), paired so that A_2^+ = (A_1^-)^dagger and
// A_2^- = (A_1^+)^dagger.
LindbladModel build_two_level_homodyne(const TwoLevelDriveParams& params, Complex beta);

// Constant thermal rates gamma_1 = c (<N> + 1), gamma_2 = c <N> with the
// same ramped drive as the direct scheme.
LindbladModel build_two_level_thermal(double omega0, double tau, double mean_photons,
                                      double rate_scale);

// H_S = diag(energies) with channels |i><j| (i < j, downward) each paired with
// |j><i|. rates[a][b] is the rate of the jump |b> -> |a>. Rejects
// non-increasing energies and degenerate gaps.
LindbladModel build_eigenstate_jump_model(const std::vector<double>& energies,
                                          const std::vector<std::vector<double>>& rates);

}  // namespace qtraj
