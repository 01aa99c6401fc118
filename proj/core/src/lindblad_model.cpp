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

#include "qtraj/lindblad_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

constexpr Complex kI(0.0, 1.0);

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidParameter, std::string(name) + " must be finite");
  }
}

void require_nonnegative(double v, const char* name) {
  require_finite(v, name);
  if (v < 0.0) throw Error(ErrorCode::kInvalidParameter, std::string(name) + " must be >= 0");
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (!(v > 0.0)) throw Error(ErrorCode::kInvalidParameter, std::string(name) + " must be > 0");
}

void validate_drive(const TwoLevelDriveParams& p) {
  require_nonnegative(p.omega0, "omega0");
  require_nonnegative(p.g1, "g1");
  require_nonnegative(p.g2, "g2");
  require_positive(p.tau, "tau");
  require_positive(p.tau1, "tau1");
  require_positive(p.tau2, "tau2");
}

std::vector<HamiltonianTerm> ramped_drive(double omega0, double tau) {
  return {HamiltonianTerm{Schedule::exp_rise(0.5 * omega0, tau), two_level::sigma_x()}};
}

}  // namespace

Schedule::Schedule(Kind kind, double amplitude, double tau)
    : kind_(kind), amplitude_(amplitude), tau_(tau) {
  require_finite(amplitude, "schedule amplitude");
  if (kind != Kind::kConstant) require_positive(tau, "schedule time constant");
}

Schedule Schedule::constant(double value) { return Schedule(Kind::kConstant, value, 0.0); }

Schedule Schedule::exp_decay(double amplitude, double tau) {
  return Schedule(Kind::kExpDecay, amplitude, tau);
}

Schedule Schedule::exp_rise(double amplitude, double tau) {
  return Schedule(Kind::kExpRise, amplitude, tau);
}

double Schedule::operator()(double t) const {
  switch (kind_) {
    case Kind::kConstant: return amplitude_;
    case Kind::kExpDecay: return amplitude_ * std::exp(-t / tau_);
    case Kind::kExpRise: return -amplitude_ * std::expm1(-t / tau_);
  }
  return 0.0;
}

Schedule Schedule::scaled(double factor) const { return Schedule(kind_, amplitude_ * factor, tau_); }

LindbladModel::LindbladModel(Index dim, std::vector<HamiltonianTerm> hamiltonian,
                             std::vector<Channel> channels)
    : dim_(dim), terms_(std::move(hamiltonian)), channels_(std::move(channels)) {
  if (dim_ < 2) throw Error(ErrorCode::kDimensionMismatch, "model dimension must be >= 2");
  for (const HamiltonianTerm& term : terms_) {
    if (term.op.dim() != dim_) throw Error(ErrorCode::kDimensionMismatch, "hamiltonian term dimension");
    if (!is_hermitian(term.op)) throw Error(ErrorCode::kNonHermitian, "hamiltonian term is not Hermitian");
  }
  adjoints_.reserve(channels_.size());
  squares_.reserve(channels_.size());
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const Channel& ch = channels_[i];
    if (ch.op.dim() != dim_) throw Error(ErrorCode::kDimensionMismatch, "channel operator dimension");
    if (!ch.rate.nonnegative()) {
      throw Error(ErrorCode::kInvalidParameter, "channel " + std::to_string(i) + " has a negative rate");
    }
    adjoints_.push_back(adjoint(ch.op));
    squares_.push_back(adjoints_.back() * ch.op);
  }
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& partner = channels_[i].adjoint_partner;
    if (!partner) continue;
    const std::size_t j = *partner;
    if (j >= channels_.size() || channels_[j].adjoint_partner != i) {
      throw Error(ErrorCode::kInvalidParameter,
                  "adjoint pairing of channel " + std::to_string(i) + " is not mutual");
    }
    if (max_abs_diff(channels_[j].op, adjoints_[i]) > 1e-12) {
      throw Error(ErrorCode::kInvalidParameter,
                  "channel " + std::to_string(j) + " is not the adjoint of channel " + std::to_string(i));
    }
  }
}

const Schedule& LindbladModel::backward_rate_schedule(std::size_t i) const {
  const auto& partner = channels_.at(i).adjoint_partner;
  if (!partner) {
    throw Error(ErrorCode::kUndefinedRate, "channel " + std::to_string(i) + " has no adjoint partner");
  }
  return channels_[*partner].rate;
}

Operator LindbladModel::hamiltonian(double t) const {
  Matrix h = Matrix::Zero(dim_, dim_);
  for (const HamiltonianTerm& term : terms_) h += term.coefficient(t) * term.op.matrix();
  return Operator(std::move(h));
}

Operator LindbladModel::decay_operator(double t) const {
  Matrix omega = Matrix::Zero(dim_, dim_);
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    omega += channels_[i].rate(t) * squares_[i].matrix();
  }
  return Operator(std::move(omega));
}

Operator effective_hamiltonian(const LindbladModel& model, double t) {
  return Operator(model.hamiltonian(t).matrix() - 0.5 * kI * model.decay_operator(t).matrix());
}

Operator step_propagator(const LindbladModel& model, double t_start, double dt) {
  const Operator h_eff = effective_hamiltonian(model, t_start + 0.5 * dt);
  return matrix_exp(Operator(-kI * dt * h_eff.matrix()));
}

Operator backward_step_propagator(const LindbladModel& model, double t_start, double dt) {
  return adjoint(step_propagator(model, t_start, dt));
}

Matrix lindblad_generator(const LindbladModel& model, double t, const Matrix& rho) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "density matrix dimension");
  }
  const Matrix h = model.hamiltonian(t).matrix();
  Matrix out = -kI * (h * rho - rho * h);
  for (std::size_t i = 0; i < model.channel_count(); ++i) {
    const double gamma = model.rate(i, t);
    if (gamma == 0.0) continue;
    const Matrix& a = model.jump_operator(i).matrix();
    const Matrix& a_dag = model.jump_adjoint(i).matrix();
    const Matrix& lambda = model.jump_square(i).matrix();
    out += gamma * (a * rho * a_dag - 0.5 * (lambda * rho + rho * lambda));
  }
  return out;
}

std::size_t grid_steps(double dt, double horizon) {
  require_positive(dt, "dt");
  require_positive(horizon, "horizon");
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::kGridMismatch, "horizon " + std::to_string(horizon) +
                                              " is not a whole multiple of dt " + std::to_string(dt));
  }
  return static_cast<std::size_t>(steps);
}

PropagatorGrid::PropagatorGrid(const LindbladModel& model, double dt, double horizon)
    : dt_(dt), horizon_(horizon) {
  const std::size_t n = grid_steps(dt, horizon);
  forward_.reserve(n);
  backward_.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Operator u = step_propagator(model, time(s), dt);
    backward_.push_back(u.matrix().adjoint());
    forward_.push_back(u.matrix());
  }
  rates_.reserve(n + 1);
  for (std::size_t s = 0; s <= n; ++s) {
    std::vector<double> row(model.channel_count());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = model.rate(i, time(s));
    rates_.push_back(std::move(row));
  }
}

LindbladModel build_two_level_direct(const TwoLevelDriveParams& p) {
  validate_drive(p);
  std::vector<Channel> channels;
  channels.push_back({two_level::sigma_minus(), Schedule::exp_decay(p.g1, p.tau1), 1, "emission"});
  channels.push_back({two_level::sigma_plus(), Schedule::exp_rise(p.g2, p.tau2), 0, "absorption"});
  return LindbladModel(2, ramped_drive(p.omega0, p.tau), std::move(channels));
}

LindbladModel build_two_level_homodyne(const TwoLevelDriveParams& p, Complex beta) {
  validate_drive(p);
  if (!std::isfinite(beta.real()) || !std::isfinite(beta.imag())) {
    throw Error(ErrorCode::kInvalidParameter, "beta must be finite");
  }
  const Operator id = Operator::identity(2);
  const Complex shift = kI * beta;
  const Complex shift_conj = kI * std::conj(beta);
  const Schedule g1_half = Schedule::exp_decay(0.5 * p.g1, p.tau1);
  const Schedule g2_half = Schedule::exp_rise(0.5 * p.g2, p.tau2);

  std::vector<Channel> channels;
  channels.push_back({two_level::sigma_minus() - shift * id, g1_half, 3, "emission-"});
  channels.push_back({two_level::sigma_minus() + shift * id, g1_half, 2, "emission+"});
  channels.push_back({two_level::sigma_plus() - shift_conj * id, g2_half, 1, "absorption-"});
  channels.push_back({two_level::sigma_plus() + shift_conj * id, g2_half, 0, "absorption+"});
  return LindbladModel(2, ramped_drive(p.omega0, p.tau), std::move(channels));
}

LindbladModel build_two_level_thermal(double omega0, double tau, double mean_photons,
                                      double rate_scale) {
  require_nonnegative(omega0, "omega0");
  require_positive(tau, "tau");
  require_nonnegative(mean_photons, "mean photon number");
  require_nonnegative(rate_scale, "rate scale");
  std::vector<Channel> channels;
  channels.push_back(
      {two_level::sigma_minus(), Schedule::constant(rate_scale * (mean_photons + 1.0)), 1, "emission"});
  channels.push_back(
      {two_level::sigma_plus(), Schedule::constant(rate_scale * mean_photons), 0, "absorption"});
  return LindbladModel(2, ramped_drive(omega0, tau), std::move(channels));
}

LindbladModel build_eigenstate_jump_model(const std::vector<double>& energies,
                                          const std::vector<std::vector<double>>& rates) {
  const std::size_t n = energies.size();
  if (n < 2) throw Error(ErrorCode::kInvalidParameter, "need at least two levels");
  if (rates.size() != n) throw Error(ErrorCode::kDimensionMismatch, "rate table must be N x N");
  for (const auto& row : rates) {
    if (row.size() != n) throw Error(ErrorCode::kDimensionMismatch, "rate table must be N x N");
  }
  for (std::size_t i = 0; i < n; ++i) {
    require_finite(energies[i], "energy");
    if (i > 0 && !(energies[i] > energies[i - 1])) {
      throw Error(ErrorCode::kInvalidParameter, "energies must be strictly increasing");
    }
  }
  // Every transition must be identified by its energy quantum.
  double scale = 0.0;
  for (double e : energies) scale = std::max(scale, std::abs(e));
  const double tol = 1e-9 * std::max(1.0, scale);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) gaps.push_back(energies[j] - energies[i]);
  }
  std::sort(gaps.begin(), gaps.end());
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    if (gaps[k] - gaps[k - 1] <= tol) {
      throw Error(ErrorCode::kInvalidParameter, "energy spectrum has degenerate gaps");
    }
  }

  const Index dim = static_cast<Index>(n);
  Matrix h = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < n; ++i) h(static_cast<Index>(i), static_cast<Index>(i)) = energies[i];

  const std::size_t pairs = n * (n - 1) / 2;
  std::vector<Channel> channels;
  channels.reserve(2 * pairs);
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) order.emplace_back(i, j);
  }
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto [i, j] = order[k];
    require_nonnegative(rates[i][j], "rate");
    channels.push_back({Operator::outer(dim, static_cast<Index>(i), static_cast<Index>(j)),
                        Schedule::constant(rates[i][j]), pairs + k,
                        std::to_string(j) + "->" + std::to_string(i)});
  }
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto [i, j] = order[k];
    require_nonnegative(rates[j][i], "rate");
    channels.push_back({Operator::outer(dim, static_cast<Index>(j), static_cast<Index>(i)),
                        Schedule::constant(rates[j][i]), k,
                        std::to_string(i) + "->" + std::to_string(j)});
  }
  return LindbladModel(dim, {HamiltonianTerm{Schedule::constant(1.0), Operator(std::move(h))}},
                       std::move(channels));
}

}  // namespace qtraj
