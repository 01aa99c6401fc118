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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qtraj/error.hpp"
#include "qtraj/lindblad_model.hpp"
#include "two_by_two.hpp"

namespace qtraj {
namespace {

using namespace std::complex_literals;

TwoLevelDriveParams fig3_k1() { return {8e-4, 1.0 / 2.7e-3, 4.8e-4, 1.0 / 1.3e-3, 8e-5, 1.0 / 1e-3}; }

Matrix random_density(std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix a(2, 2);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) a(i, j) = Complex(d(gen), d(gen));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvariantViolation;
}

TEST(Schedule, Shapes) {
  EXPECT_DOUBLE_EQ(Schedule::constant(2.5)(100.0), 2.5);
  EXPECT_NEAR(Schedule::exp_decay(3.0, 10.0)(10.0), 3.0 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(Schedule::exp_rise(3.0, 10.0)(10.0), 3.0 * (1.0 - std::exp(-1.0)), 1e-15);
  EXPECT_EQ(Schedule::exp_rise(3.0, 10.0)(0.0), 0.0);
  EXPECT_NEAR(Schedule::exp_decay(3.0, 10.0).scaled(2.0)(5.0), 6.0 * std::exp(-0.5), 1e-15);
  EXPECT_EQ(code_of([] { Schedule::exp_decay(1.0, 0.0); }), ErrorCode::kInvalidParameter);
}

TEST(LindbladModel, Fig3ParametersAccepted) {
  const LindbladModel m = build_two_level_direct(fig3_k1());
  EXPECT_EQ(m.dim(), 2);
  EXPECT_EQ(m.channel_count(), 2u);
  EXPECT_NEAR(m.rate(0, 0.0), 4.8e-4, 1e-18);
  EXPECT_EQ(m.rate(1, 0.0), 0.0);
  EXPECT_NEAR(m.backward_rate(0, 500.0), 8e-5 * (1.0 - std::exp(-0.5)), 1e-18);
  EXPECT_NEAR(m.hamiltonian(1e9)(0, 1).real(), 4e-4, 1e-15);
}

TEST(LindbladModel, RejectsInvalidInputs) {
  TwoLevelDriveParams p = fig3_k1();
  p.g1 = -1.0;
  EXPECT_EQ(code_of([&] { build_two_level_direct(p); }), ErrorCode::kInvalidParameter);
  p = fig3_k1();
  p.tau = 0.0;
  EXPECT_EQ(code_of([&] { build_two_level_direct(p); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] {
              LindbladModel(2, {HamiltonianTerm{Schedule::constant(1.0), two_level::sigma_minus()}}, {});
            }),
            ErrorCode::kNonHermitian);
  EXPECT_EQ(code_of([] {
              LindbladModel(2, {},
                            {Channel{two_level::sigma_minus(), Schedule::constant(1.0), 1, "a"},
                             Channel{two_level::sigma_minus(), Schedule::constant(1.0), 0, "b"}});
            }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { LindbladModel(2, {}, {Channel{Operator::identity(3), Schedule::constant(1.0), {}, "x"}}); }),
            ErrorCode::kDimensionMismatch);
}

TEST(LindbladModel, UnpairedChannelHasUndefinedBackwardRate) {
  const LindbladModel m(2, {}, {Channel{two_level::sigma_minus(), Schedule::constant(1.0), {}, "lone"}});
  EXPECT_FALSE(m.has_backward_rate(0));
  EXPECT_EQ(code_of([&] { m.backward_rate(0, 0.0); }), ErrorCode::kUndefinedRate);
}

TEST(LindbladModel, DecayOperatorIsRateWeightedSquares) {
  const LindbladModel m = build_two_level_thermal(0.0, 1.0, 0.5, 0.2);
  const Operator omega = m.decay_operator(0.0);
  // gamma1 |e><e| + gamma2 |g><g| with gamma1 = 0.3, gamma2 = 0.1
  EXPECT_NEAR(omega(1, 1).real(), 0.3, 1e-15);
  EXPECT_NEAR(omega(0, 0).real(), 0.1, 1e-15);
  EXPECT_NEAR(std::abs(omega(0, 1)), 0.0, 1e-18);
}

TEST(LindbladModel, HomodyneGeneratorEqualsDirect) {
  std::mt19937_64 gen(11);
  TwoLevelDriveParams p{5.6e-2, 30.0, 4e-2, 70.0, 2.4e-2, 100.0};
  const LindbladModel direct = build_two_level_direct(p);
  for (double k : {0.0, 1.0, 3.5, 10.0}) {
    const LindbladModel homodyne = build_two_level_homodyne(p, std::polar(k, 3.0 * std::numbers::pi / 5.0));
    for (double t : {0.0, 13.0, 250.0}) {
      const Matrix rho = random_density(gen);
      const Matrix diff = lindblad_generator(direct, t, rho) - lindblad_generator(homodyne, t, rho);
      EXPECT_LT(diff.norm(), 1e-14 * (1.0 + k * k)) << "k=" << k << " t=" << t;
    }
  }
}

TEST(LindbladModel, GeneratorPreservesTraceAndHermiticity) {
  std::mt19937_64 gen(5);
  const LindbladModel m = build_two_level_homodyne({0.3, 5.0, 0.2, 7.0, 0.1, 3.0}, 1.5 + 0.5i);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho = random_density(gen);
    const Matrix l = lindblad_generator(m, 0.7 * trial, rho);
    EXPECT_LT(std::abs(l.trace()), 1e-14);
    EXPECT_LT((l - l.adjoint()).norm(), 1e-14);
  }
}

TEST(LindbladModel, EffectiveHamiltonianOracle) {
  const LindbladModel m = build_two_level_thermal(0.4, 2.0, 1.0, 0.1);
  const double t = 3.0;
  const double omega = 0.4 * (1.0 - std::exp(-t / 2.0));
  const oracle::M2 expected = oracle::add(oracle::scale(0.5 * omega, oracle::sigma_x()),
                                          oracle::m2(-0.5i * 0.1, 0.0, 0.0, -0.5i * 0.2));
  const Operator h = effective_hamiltonian(m, t);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(h(i, j) - expected[i][j]), 1e-15);
}

// Composes the oracle step factors exp(-i H_eff(mid) h) over [0, T].
oracle::M2 oracle_propagator(const LindbladModel& m, double horizon, int steps) {
  const double h = horizon / steps;
  oracle::M2 u = oracle::identity();
  for (int s = 0; s < steps; ++s) {
    const Operator heff = effective_hamiltonian(m, (s + 0.5) * h);
    const oracle::M2 x = oracle::m2(heff(0, 0), heff(0, 1), heff(1, 0), heff(1, 1));
    u = oracle::mul(oracle::expm(oracle::scale(-1.0i * h, x)), u);
  }
  return u;
}

double midpoint_error(const LindbladModel& m, double horizon, int steps, const oracle::M2& reference) {
  const double h = horizon / steps;
  Matrix u = Matrix::Identity(2, 2);
  for (int s = 0; s < steps; ++s) u = step_propagator(m, s * h, h).matrix() * u;
  double err = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(u(i, j) - reference[i][j]));
  return err;
}

TEST(LindbladModel, MidpointStepIsSecondOrder) {
  const LindbladModel m = build_two_level_direct({2.0, 0.5, 1.0, 0.7, 0.5, 0.3});
  const double horizon = 1.0;
  const oracle::M2 reference = oracle_propagator(m, horizon, 8192);
  const double e1 = midpoint_error(m, horizon, 16, reference);
  const double e2 = midpoint_error(m, horizon, 32, reference);
  const double e3 = midpoint_error(m, horizon, 64, reference);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
  EXPECT_NEAR(e2 / e3, 4.0, 0.4);
}

TEST(LindbladModel, BackwardStepIsAdjoint) {
  const LindbladModel m = build_two_level_direct(fig3_k1());
  const Operator u = step_propagator(m, 10.0, 1.0);
  EXPECT_LT(max_abs_diff(backward_step_propagator(m, 10.0, 1.0), adjoint(u)), 1e-18);
}

TEST(PropagatorGrid, MatchesStepPropagators) {
  const LindbladModel m = build_two_level_direct(fig3_k1());
  const PropagatorGrid grid(m, 1.0, 20.0);
  ASSERT_EQ(grid.steps(), 20u);
  for (std::size_t s : {0u, 7u, 19u}) {
    const Matrix u = step_propagator(m, static_cast<double>(s), 1.0).matrix();
    EXPECT_LT((grid.forward(s) - u).norm(), 1e-18);
    EXPECT_LT((grid.backward(s) - u.adjoint()).norm(), 1e-18);
  }
  EXPECT_NEAR(grid.rates(20)[1], m.rate(1, 20.0), 1e-20);
}

TEST(PropagatorGrid, RejectsNonMultipleHorizon) {
  EXPECT_EQ(code_of([] { grid_steps(1.0, 10.5); }), ErrorCode::kGridMismatch);
  EXPECT_EQ(grid_steps(1.0, 1.0 / 8e-4), 1250u);
}

TEST(EigenstateModel, ChannelLayoutAndPartners) {
  const std::vector<std::vector<double>> rates{{0.0, 0.3, 0.2}, {0.05, 0.0, 0.1}, {0.01, 0.02, 0.0}};
  const LindbladModel m = build_eigenstate_jump_model({0.0, 1.0, 2.5}, rates);
  ASSERT_EQ(m.channel_count(), 6u);
  // Downward |i><j| for (i, j) = (0,1), (0,2), (1,2), then their upward partners.
  EXPECT_LT(max_abs_diff(m.jump_operator(0), Operator::outer(3, 0, 1)), 1e-18);
  EXPECT_LT(max_abs_diff(m.jump_operator(2), Operator::outer(3, 1, 2)), 1e-18);
  EXPECT_LT(max_abs_diff(m.jump_operator(3), Operator::outer(3, 1, 0)), 1e-18);
  EXPECT_DOUBLE_EQ(m.rate(1, 0.0), 0.2);
  EXPECT_DOUBLE_EQ(m.rate(4, 0.0), 0.01);
  EXPECT_DOUBLE_EQ(m.backward_rate(1, 0.0), 0.01);
  EXPECT_DOUBLE_EQ(m.backward_rate(5, 0.0), 0.1);
  // Decay operator is diagonal with the level's total outgoing rate.
  const Operator omega = m.decay_operator(0.0);
  EXPECT_NEAR(omega(0, 0).real(), 0.05 + 0.01, 1e-15);
  EXPECT_NEAR(omega(2, 2).real(), 0.2 + 0.1, 1e-15);
}

TEST(EigenstateModel, RejectsDegenerateGaps) {
  const std::vector<std::vector<double>> rates(3, std::vector<double>(3, 0.1));
  EXPECT_EQ(code_of([&] { build_eigenstate_jump_model({0.0, 1.0, 2.0}, rates); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([&] { build_eigenstate_jump_model({0.0, 2.0, 1.0}, rates); }), ErrorCode::kInvalidParameter);
}

}  // namespace
}  // namespace qtraj
