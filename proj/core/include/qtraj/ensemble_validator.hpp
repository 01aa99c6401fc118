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

// Direct integration of the master equation and comparison with the
// ensemble average of trajectory projectors.

#include <cstddef>
#include <vector>

#include "qtraj/hilbert.hpp"
#include "qtraj/ift_estimator.hpp"
#include "qtraj/lindblad_model.hpp"
#include "qtraj/pdp_engine.hpp"

namespace qtraj {

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix from_state(const StateVector& psi);
  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex trace() const { return m_.trace(); }
  double purity() const;
  double min_eigenvalue() const;
  double hermiticity_error() const;

  // Throws kInvariantViolation unless Hermitian and unit trace within tol
  // and no eigenvalue below -1e-8.
  void check_valid(double tol = 1e-10) const;

 private:
  Matrix m_;
};

struct DensitySeries {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

// Classical RK4 on the master equation with step dt, one entry per grid
// time 0, dt, ..., T. Aborts with kInvariantViolation when the trace drifts
// by more than 1e-8, Hermiticity by more than 1e-10, or an eigenvalue drops
// below -1e-8.
DensitySeries integrate_master_equation(const LindbladModel& model, const DensityMatrix& rho0, double dt,
                                        double horizon);

// Average of |psi(t)><psi(t)| over the trajectories at each sample step.
std::vector<DensityMatrix> ensemble_average(const PropagatorGrid& grid,
                                            const std::vector<TrajectoryRecord>& trajectories,
                                            const std::vector<std::size_t>& sample_steps);

// Half the sum of singular values of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct EnsembleComparison {
  std::vector<double> times;
  std::vector<double> distances;
  double max_distance = 0.0;
  std::size_t n_trajectories = 0;
};

// Simulates options.n_trajectories forward runs, averages them at
// `sample_count` evenly spaced grid times (including 0 and T), and compares
// with the RK4 solution started from the empirical initial ensemble.
EnsembleComparison compare_ensemble_to_master_equation(const LindbladModel& model,
                                                       const EstimatorOptions& options,
                                                       const InitialSampler& sampler,
                                                       std::size_t sample_count);

}  // namespace qtraj
