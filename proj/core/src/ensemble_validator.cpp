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

#include "qtraj/ensemble_validator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qtraj/error.hpp"

namespace qtraj {

DensityMatrix::DensityMatrix(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) throw Error(ErrorCode::kDimensionMismatch, "density matrix must be square");
}

DensityMatrix DensityMatrix::from_state(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

void DensityMatrix::check_valid(double tol) const {
  std::ostringstream msg;
  if (hermiticity_error() > tol) {
    msg << "not Hermitian (error " << hermiticity_error() << ")";
  } else if (std::abs(trace() - 1.0) > tol) {
    msg << "trace " << trace().real() << " != 1";
  } else if (min_eigenvalue() < -1e-8) {
    msg << "negative eigenvalue " << min_eigenvalue();
  } else {
    return;
  }
  throw Error(ErrorCode::kInvariantViolation, msg.str());
}

DensitySeries integrate_master_equation(const LindbladModel& model, const DensityMatrix& rho0, double dt,
                                        double horizon) {
  if (rho0.dim() != model.dim()) throw Error(ErrorCode::kDimensionMismatch, "initial density matrix");
  rho0.check_valid();
  const std::size_t n = grid_steps(dt, horizon);
  const Complex trace0 = rho0.trace();

  DensitySeries series;
  series.times.reserve(n + 1);
  series.states.reserve(n + 1);
  series.times.push_back(0.0);
  series.states.push_back(rho0);

  Matrix rho = rho0.matrix();
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) * dt;
    const Matrix k1 = lindblad_generator(model, t, rho);
    const Matrix k2 = lindblad_generator(model, t + 0.5 * dt, rho + 0.5 * dt * k1);
    const Matrix k3 = lindblad_generator(model, t + 0.5 * dt, rho + 0.5 * dt * k2);
    const Matrix k4 = lindblad_generator(model, t + dt, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t_next = static_cast<double>(s + 1) * dt;
    DensityMatrix current(rho);
    std::ostringstream msg;
    if (std::abs(current.trace() - trace0) > 1e-8) {
      msg << "trace drifted to " << current.trace().real() << " at t = " << t_next;
    } else if (current.hermiticity_error() > 1e-10) {
      msg << "Hermiticity lost (" << current.hermiticity_error() << ") at t = " << t_next;
    } else if (current.min_eigenvalue() < -1e-8) {
      msg << "eigenvalue " << current.min_eigenvalue() << " at t = " << t_next;
    }
    if (!msg.str().empty()) throw Error(ErrorCode::kInvariantViolation, msg.str());

    series.times.push_back(t_next);
    series.states.push_back(std::move(current));
  }
  return series;
}

std::vector<DensityMatrix> ensemble_average(const PropagatorGrid& grid,
                                            const std::vector<TrajectoryRecord>& trajectories,
                                            const std::vector<std::size_t>& sample_steps) {
  if (trajectories.empty()) throw Error(ErrorCode::kInvalidParameter, "no trajectories to average");
  const Index dim = trajectories.front().initial_state.dim();
  std::vector<Matrix> sums(sample_steps.size(), Matrix::Zero(dim, dim));
  for (const TrajectoryRecord& rec : trajectories) {
    if (rec.dt != grid.dt() || rec.horizon != grid.horizon() || rec.initial_state.dim() != dim) {
      throw Error(ErrorCode::kGridMismatch, "trajectory was simulated on a different grid");
    }
    const std::vector<StateVector> states = states_at_steps(grid, rec, sample_steps);
    for (std::size_t k = 0; k < states.size(); ++k) {
      sums[k] += states[k].amplitudes() * states[k].amplitudes().adjoint();
    }
  }
  std::vector<DensityMatrix> out;
  out.reserve(sums.size());
  const double inv = 1.0 / static_cast<double>(trajectories.size());
  for (Matrix& m : sums) out.emplace_back(inv * m);
  return out;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kDimensionMismatch, "trace_distance");
  Eigen::JacobiSVD<Matrix> svd(a.matrix() - b.matrix());
  return 0.5 * svd.singularValues().sum();
}

EnsembleComparison compare_ensemble_to_master_equation(const LindbladModel& model,
                                                       const EstimatorOptions& options,
                                                       const InitialSampler& sampler,
                                                       std::size_t sample_count) {
  if (sample_count < 2) throw Error(ErrorCode::kInvalidParameter, "need at least two sample times");
  EstimatorOptions run = options;
  run.keep_records = true;
  run.compute_ledger = false;
  const std::vector<TrajectoryOutcome> outcomes = run_trajectories(model, run, sampler);

  std::vector<TrajectoryRecord> records;
  records.reserve(outcomes.size());
  for (const TrajectoryOutcome& o : outcomes) records.push_back(*o.forward);

  const PropagatorGrid grid(model, options.dt, options.horizon);
  const std::size_t n = grid.steps();
  std::vector<std::size_t> steps;
  for (std::size_t k = 0; k < sample_count; ++k) {
    steps.push_back((k * n) / (sample_count - 1));
  }
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  const std::vector<DensityMatrix> averages = ensemble_average(grid, records, steps);
  // The empirical initial ensemble removes the sampling noise of rho(0).
  DensityMatrix rho0(averages.front().matrix());
  const DensitySeries exact = integrate_master_equation(model, rho0, options.dt, options.horizon);

  EnsembleComparison cmp;
  cmp.n_trajectories = records.size();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const double d = trace_distance(averages[k], exact.states[steps[k]]);
    cmp.times.push_back(grid.time(steps[k]));
    cmp.distances.push_back(d);
    cmp.max_distance = std::max(cmp.max_distance, d);
  }
  return cmp;
}

}  // namespace qtraj
