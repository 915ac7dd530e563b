// Copyright 2026 The iongate Authors
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

#include "iongate/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "iongate/errors.hpp"
#include "iongate/hilbert.hpp"
#include "test_util.hpp"

namespace iongate {
namespace {

using testing::random_density;

constexpr double kTwoPi = 2.0 * kPi;

CompositeState coherent(cplx alpha, const QubitVector& q, SpaceSpec space) {
  const Vector psi = kron(Matrix(q), Matrix(coherent_state(alpha, space.fock_dim())));
  return CompositeState(space, psi * psi.adjoint());
}

TEST(Evolve, NullEvolutionLeavesStateUnchanged) {
  std::mt19937_64 eng(1);
  const SpaceSpec space(4);
  const CompositeState rho(space, random_density(space.dim(), eng));
  const DriveSegment seg{3.7e-5, TimeDependentHamiltonian(space), {}};
  EXPECT_LE((evolve(rho, seg).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolve, HarmonicRotationReturnsCoherentStateAfterFullPeriod) {
  const SpaceSpec space(20);
  const double omega = kTwoPi * 1e6;
  TimeDependentHamiltonian h(space);
  h.add(ladder_ops(space).n * cplx(omega, 0.0));
  const CompositeState rho0 = coherent(0.5, qubit_basis_state("dd"), space);
  const CompositeState out = evolve(rho0, DriveSegment{1e-6, h, {}});
  const double overlap = (rho0.matrix() * out.matrix()).trace().real();
  EXPECT_GE(overlap, 1.0 - 1e-8);
}

TEST(Evolve, HarmonicRotationQuarterPeriodMatchesRotatedAlpha) {
  const SpaceSpec space(20);
  const double omega = kTwoPi * 1e6;
  TimeDependentHamiltonian h(space);
  h.add(ladder_ops(space).n * cplx(omega, 0.0));
  const CompositeState rho0 = coherent(0.5, qubit_basis_state("dd"), space);
  const CompositeState out = evolve(rho0, DriveSegment{0.25e-6, h, {}});
  const CompositeState expected = coherent(0.5 * std::exp(-kI * (kPi / 2.0)), qubit_basis_state("dd"), space);
  EXPECT_LE(trace_distance(out.matrix(), expected.matrix()), 1e-8);
}

TEST(Evolve, AmplitudeDampingFollowsExponential) {
  const SpaceSpec space(3);
  const double gamma = 2.0e3;
  Vector psi = Vector::Zero(space.dim());
  psi(1) = 1.0;  // |↓↓, 1>
  const CompositeState rho0(space, psi * psi.adjoint());
  const DriveSegment seg{1.0 / gamma, TimeDependentHamiltonian(space), {{ladder_ops(space).a, gamma}}};
  const CompositeState out = evolve(rho0, seg);
  EXPECT_NEAR(out.matrix()(1, 1).real(), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(out.matrix()(0, 0).real(), 1.0 - std::exp(-1.0), 1e-6);
}

TEST(Evolve, PreservesTracePositivityAndPurity) {
  std::mt19937_64 eng(2);
  const SpaceSpec space(6);
  const LadderOps ops = ladder_ops(space);
  const Operator s = embed_qubit_op(Pauli::Z, 1, space) + embed_qubit_op(Pauli::Z, 2, space);
  TimeDependentHamiltonian h(space);
  const double w = kTwoPi * 2e4;
  h.add(s * ops.a_dag, [=](double t) { return 3e4 * std::exp(kI * (w * t)); });
  h.add((s * ops.a_dag).adjoint(), [=](double t) { return 3e4 * std::exp(-kI * (w * t)); });
  const CompositeState rho0 = initial_state(bell_state(0.3), 0.0, space);

  const CompositeState unitary = evolve(rho0, DriveSegment{40e-6, h, {}});
  EXPECT_LE(unitary.trace_deviation(), 1e-9);
  EXPECT_GE(unitary.min_eigenvalue(), -1e-8);
  EXPECT_NEAR(unitary.purity(), 1.0, 1e-8);

  const CompositeState open = evolve(CompositeState(space, random_density(space.dim(), eng)),
                                     DriveSegment{40e-6, h, {{ops.a_dag, 50.0}, {ops.a, 50.0}}});
  EXPECT_LE(open.trace_deviation(), 1e-9);
  EXPECT_LE(open.hermiticity_deviation(), 1e-12);
  EXPECT_GE(open.min_eigenvalue(), -1e-8);
}

TEST(Evolve, FixedStepRk4AgreesWithAdaptive) {
  const SpaceSpec space(10);
  const auto report_adaptive = evolve_vs_oracle(2.0, kTwoPi * 5e3, kTwoPi * 2e4, 25e-6, space);
  IntegratorConfig rk4;
  rk4.method = IntegratorMethod::kFixedRK4;
  rk4.max_step = 5e-8;
  const auto report_rk4 = evolve_vs_oracle(2.0, kTwoPi * 5e3, kTwoPi * 2e4, 25e-6, space, rk4);
  EXPECT_LE(std::abs(report_adaptive.alpha_numeric - report_rk4.alpha_numeric), 1e-8);
  EXPECT_LE(report_rk4.trace_distance, 1e-7);
}

TEST(Evolve, StepUnderflowReportsTimeReached) {
  const SpaceSpec space(3);
  TimeDependentHamiltonian h(space);
  h.add(ladder_ops(space).n * cplx(1e17, 0.0));
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  try {
    (void)evolve(coherent(0.3, qubit_basis_state("dd"), space), DriveSegment{1.0, h, {}}, cfg);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GE(e.time_reached(), 0.0);
    EXPECT_LT(e.time_reached(), 1.0);
  }
}

TEST(Evolve, RejectsNegativeRatesAndBadDuration) {
  const SpaceSpec space(3);
  const CompositeState rho = initial_state("dd", 0.0, space);
  EXPECT_THROW((void)evolve(rho, DriveSegment{1e-6, TimeDependentHamiltonian(space), {{ladder_ops(space).a, -1.0}}}),
               ConfigError);
  EXPECT_THROW((void)evolve(rho, DriveSegment{0.0, TimeDependentHamiltonian(space), {}}), ConfigError);
}

TEST(KetPropagator, MatchesDensityMatrixPropagation) {
  const SpaceSpec space(8);
  const LadderOps ops = ladder_ops(space);
  const Operator s = embed_qubit_op(Pauli::Z, 1, space) + embed_qubit_op(Pauli::Z, 2, space);
  TimeDependentHamiltonian h(space);
  const double w = kTwoPi * 2e4;
  h.add(s * ops.a_dag, [=](double t) { return 2e4 * std::exp(kI * (w * t)); });
  h.add((s * ops.a_dag).adjoint(), [=](double t) { return 2e4 * std::exp(-kI * (w * t)); });
  const DriveSegment seg{30e-6, h, {}};
  Vector psi = Vector::Zero(space.dim());
  psi.segment(0, 8) = coherent_state(0.2, 8) / std::sqrt(2.0);
  psi(3 * 8) = 1.0 / std::sqrt(2.0);
  const Vector out = KetPropagator(seg, {}).apply(psi);
  const CompositeState rho = evolve(CompositeState(space, psi * psi.adjoint()), seg);
  EXPECT_LE(trace_distance(rho.matrix(), out * out.adjoint()), 1e-8);
  const DriveSegment lossy{30e-6, h, {{ops.a, 1.0}}};
  EXPECT_THROW(KetPropagator(lossy, {}), ConfigError);
}

TEST(AnalyticDisplacement, NoForceGivesNothing) {
  for (double t : {0.0, 1e-6, 3.3e-5}) {
    const auto d = analytic_displacement(0.0, kTwoPi * 7e3, kTwoPi * 2e4, t);
    EXPECT_EQ(d.alpha, cplx(0.0, 0.0));
    EXPECT_EQ(d.phase, 0.0);
  }
}

TEST(AnalyticDisplacement, LoopClosesAfterOnePeriod) {
  const double dg = kTwoPi * 2e4, og = dg / (2.0 * std::sqrt(2.0));
  const auto d = analytic_displacement(2.0, og, dg, kTwoPi / dg);
  EXPECT_LE(std::abs(d.alpha), 1e-15);
  EXPECT_NEAR(d.phase, kTwoPi * std::pow(2.0 * og / (2.0 * dg), 2), 1e-12);
}

TEST(AnalyticDisplacement, TwoLoopsGiveQuarterTurnBetweenSectors) {
  const double dg = kTwoPi * 2e4, og = dg / (2.0 * std::sqrt(2.0));
  const double even = 2.0 * analytic_displacement(2.0, og, dg, kTwoPi / dg).phase;
  const double odd = 2.0 * analytic_displacement(0.0, og, dg, kTwoPi / dg).phase;
  EXPECT_NEAR(even - odd, kPi / 2.0, 1e-12);
}

TEST(AnalyticDisplacement, ResonantForceIsRejected) {
  EXPECT_THROW((void)analytic_displacement(2.0, 1.0, 0.0, 1.0), ModelError);
}

TEST(EvolveVsOracle, HalfLoopMatchesDisplacedState) {
  const double dg = kTwoPi * 2e4, og = dg / (2.0 * std::sqrt(2.0));
  for (double f : {2.0, -2.0}) {
    const auto r = evolve_vs_oracle(f, og, dg, 0.5 * kTwoPi / dg, SpaceSpec(20));
    EXPECT_LE(r.trace_distance, 1e-7) << "f = " << f;
    EXPECT_LE(std::abs(r.alpha_numeric - r.alpha_analytic), 1e-7) << "f = " << f;
  }
}

TEST(EvolveVsOracle, NoForceIsExact) {
  const double dg = kTwoPi * 2e4;
  const auto r = evolve_vs_oracle(0.0, dg / 3.0, dg, 1e-5, SpaceSpec(20));
  EXPECT_LE(r.trace_distance, 1e-12);
}

TEST(EvolveVsOracle, LoopClosesAfterEachArm) {
  const double dg = kTwoPi * 2e4, og = dg / (2.0 * std::sqrt(2.0));
  for (double f : {2.0, -2.0}) {
    const auto r = evolve_vs_oracle(f, og, dg, kTwoPi / dg, SpaceSpec(15));
    EXPECT_LE(std::abs(r.alpha_numeric), 1e-9) << "f = " << f;
  }
}

TEST(EvolveVsOracle, TruncationResidualShrinksWithFockDim) {
  // Large displacement so that the truncation residual dominates.
  const double dg = kTwoPi * 2e4, og = 2.0 * dg;
  IntegratorConfig tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-14;
  const double r6 = evolve_vs_oracle(2.0, og, dg, 0.5 * kTwoPi / dg, SpaceSpec(12), tight).trace_distance;
  const double r12 = evolve_vs_oracle(2.0, og, dg, 0.5 * kTwoPi / dg, SpaceSpec(24), tight).trace_distance;
  EXPECT_GT(r6, 1e-6);
  EXPECT_LE(r12, 0.5 * r6);
}

TEST(IntegratorConfig, TightenedScalesTolerances) {
  const IntegratorConfig c;
  const IntegratorConfig t = c.tightened(0.5);
  EXPECT_DOUBLE_EQ(t.rel_tol, 0.5 * c.rel_tol);
  EXPECT_DOUBLE_EQ(t.abs_tol, 0.5 * c.abs_tol);
}

}  // namespace
}  // namespace iongate
