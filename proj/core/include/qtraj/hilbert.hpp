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

// Dense complex linear algebra for small Hilbert spaces (dim 2..16).

#include <complex>
#include <cstddef>
#include <initializer_list>

#include <Eigen/Dense>

namespace qtraj {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Squared norms at or below this are treated as an annihilated state.
inline constexpr double kZeroNormThreshold = 1e-14;

class StateVector {
 public:
  // Empty (dim 0) placeholder; every operation on it is a dimension mismatch.
  StateVector() = default;
  explicit StateVector(Vector amplitudes);
  StateVector(std::initializer_list<Complex> amplitudes);

  static StateVector basis(Index dim, Index i);
  static StateVector zero(Index dim);

  Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }
  Complex operator[](Index i) const { return amps_(i); }

  bool is_normalized(double tol = 1e-12) const;

 private:
  Vector amps_;
};

class Operator {
 public:
  explicit Operator(Matrix entries);

  static Operator identity(Index dim);
  static Operator zero(Index dim);
  // |row><col|
  static Operator outer(Index dim, Index row, Index col);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Index row, Index col) const { return m_(row, col); }

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(Complex scale);

 private:
  Matrix m_;
};

Operator operator+(Operator lhs, const Operator& rhs);
Operator operator-(Operator lhs, const Operator& rhs);
Operator operator*(const Operator& lhs, const Operator& rhs);
Operator operator*(Complex scale, Operator op);
Operator operator*(double scale, Operator op);

StateVector apply(const Operator& op, const StateVector& psi);
double norm_sq(const StateVector& psi);
// Throws Error(kNearZeroNorm) when norm_sq(psi) <= kZeroNormThreshold.
StateVector normalize(const StateVector& psi);
Complex expectation(const Operator& op, const StateVector& psi);
Operator adjoint(const Operator& op);

// exp(op) by scaling and squaring around a diagonal Pade approximant
// (degree 3..13 picked from the 1-norm).
Operator matrix_exp(const Operator& op);

bool is_hermitian(const Operator& op, double tol = 1e-12);
double max_abs_diff(const Operator& a, const Operator& b);
double max_abs_diff(const StateVector& a, const StateVector& b);

// Two-level conventions: index 0 is |g>, index 1 is |e>.
namespace two_level {

inline constexpr Index kGround = 0;
inline constexpr Index kExcited = 1;

StateVector ground();
StateVector excited();
Operator sigma_minus();  // |g><e|
Operator sigma_plus();   // |e><g|
Operator sigma_x();

}  // namespace two_level

}  // namespace qtraj
