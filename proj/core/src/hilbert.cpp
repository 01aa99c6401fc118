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

#include "qtraj/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

void require_same_dim(Index a, Index b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(where) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

// Pade numerator/denominator pieces: exp(A) ~ (V - U)^{-1} (V + U).
void pade3(const Matrix& a, Matrix& u, Matrix& v) {
  const double b[] = {120.0, 60.0, 12.0, 1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix tmp = b[3] * a2 + b[1] * id;
  u.noalias() = a * tmp;
  v = b[2] * a2 + b[0] * id;
}

void pade5(const Matrix& a, Matrix& u, Matrix& v) {
  const double b[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix tmp = b[5] * a4 + b[3] * a2 + b[1] * id;
  u.noalias() = a * tmp;
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade7(const Matrix& a, Matrix& u, Matrix& v) {
  const double b[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix tmp = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u.noalias() = a * tmp;
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade9(const Matrix& a, Matrix& u, Matrix& v) {
  const double b[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                      2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix a8 = a6 * a2;
  const Matrix tmp = b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u.noalias() = a * tmp;
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade13(const Matrix& a, Matrix& u, Matrix& v) {
  const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                      670442572800.0,      33522128640.0,       1323241920.0,
                      40840800.0,          960960.0,            16380.0,
                      182.0,               1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  Matrix inner = a6 * tmp;
  inner += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u.noalias() = a * inner;
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v.noalias() = a6 * tmp;
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

StateVector::StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "state vector needs at least one amplitude");
  }
}

StateVector::StateVector(std::initializer_list<Complex> amplitudes)
    : StateVector(Vector(static_cast<Index>(amplitudes.size()))) {
  Index i = 0;
  for (const Complex& c : amplitudes) amps_(i++) = c;
}

StateVector StateVector::basis(Index dim, Index i) {
  Vector v = Vector::Zero(dim);
  v(i) = 1.0;
  return StateVector(std::move(v));
}

StateVector StateVector::zero(Index dim) { return StateVector(Vector::Zero(dim)); }

bool StateVector::is_normalized(double tol) const {
  return std::abs(amps_.squaredNorm() - 1.0) <= tol;
}

Operator::Operator(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator must be square");
  }
}

Operator Operator::identity(Index dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::zero(Index dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::outer(Index dim, Index row, Index col) {
  Matrix m = Matrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return Operator(std::move(m));
}

Operator& Operator::operator+=(const Operator& other) {
  require_same_dim(dim(), other.dim(), "operator +");
  m_ += other.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  require_same_dim(dim(), other.dim(), "operator -");
  m_ -= other.m_;
  return *this;
}

Operator& Operator::operator*=(Complex scale) {
  m_ *= scale;
  return *this;
}

Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }

Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_dim(lhs.dim(), rhs.dim(), "operator *");
  return Operator(lhs.matrix() * rhs.matrix());
}

Operator operator*(Complex scale, Operator op) { return op *= scale; }

Operator operator*(double scale, Operator op) { return op *= Complex(scale, 0.0); }

StateVector apply(const Operator& op, const StateVector& psi) {
  require_same_dim(op.dim(), psi.dim(), "apply");
  return StateVector(op.matrix() * psi.amplitudes());
}

double norm_sq(const StateVector& psi) { return psi.amplitudes().squaredNorm(); }

StateVector normalize(const StateVector& psi) {
  const double n2 = norm_sq(psi);
  if (!(n2 > kZeroNormThreshold)) {
    throw Error(ErrorCode::kNearZeroNorm, "cannot normalize state with norm^2 = " + std::to_string(n2));
  }
  return StateVector(psi.amplitudes() / std::sqrt(n2));
}

Complex expectation(const Operator& op, const StateVector& psi) {
  require_same_dim(op.dim(), psi.dim(), "expectation");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

Operator adjoint(const Operator& op) { return Operator(op.matrix().adjoint()); }

Operator matrix_exp(const Operator& op) {
  const Matrix& a = op.matrix();
  const Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

  Matrix u(n, n);
  Matrix v(n, n);
  int squarings = 0;
  if (norm1 < 1.495585217958292e-2) {
    pade3(a, u, v);
  } else if (norm1 < 2.539398330063230e-1) {
    pade5(a, u, v);
  } else if (norm1 < 9.504178996162932e-1) {
    pade7(a, u, v);
  } else if (norm1 < 2.097847961257068) {
    pade9(a, u, v);
  } else {
    constexpr double kMaxNorm = 5.371920351148152;
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kMaxNorm))));
    const Matrix scaled = a / std::ldexp(1.0, squarings);
    pade13(scaled, u, v);
  }

  const Matrix numer = u + v;
  const Matrix denom = v - u;
  Matrix result = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) {
    result = (result * result).eval();
  }
  return Operator(std::move(result));
}

bool is_hermitian(const Operator& op, double tol) {
  return (op.matrix() - op.matrix().adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double max_abs_diff(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  if (a.dim() == 0) return 0.0;
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff();
}

namespace two_level {

StateVector ground() { return StateVector::basis(2, kGround); }

StateVector excited() { return StateVector::basis(2, kExcited); }

Operator sigma_minus() { return Operator::outer(2, kGround, kExcited); }

Operator sigma_plus() { return Operator::outer(2, kExcited, kGround); }

Operator sigma_x() { return sigma_minus() + sigma_plus(); }

}  // namespace two_level

}  // namespace qtraj
