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

#include "iongate/gate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "iongate/errors.hpp"
#include "iongate/sequence.hpp"

namespace iongate {
namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kTHz = kTwoPi * 1e12;

GateParams params_for(double t_g) { return gate_params_for_time(t_g, BeamSetup{}, AtomModel::calcium43()); }

QubitMatrix both(const Matrix2& r) { return embed_on_ion(r, 1) * embed_on_ion(r, 2); }

QubitMatrix arm_phase(double phi) {
  QubitMatrix u = QubitMatrix::Zero();
  u(0, 0) = std::exp(kI * (phi / 2.0));
  u(1, 1) = std::exp(-kI * (phi / 2.0));
  u(2, 2) = std::exp(-kI * (phi / 2.0));
  u(3, 3) = std::exp(kI * (phi / 2.0));
  return u;
}

/// Echo sequence on the qubits alone with the given per-arm unitary.
QubitMatrix echo_output(const QubitMatrix& arm, double phi0, double phi1) {
  const QubitMatrix u = both(rotation_matrix(kPi / 2.0, phi1)) * arm * both(rotation_matrix(kPi, phi0)) * arm *
                        both(rotation_matrix(kPi / 2.0, phi0));
  const QubitVector psi = u * qubit_basis_state("dd");
  return psi * psi.adjoint();
}

TEST(LambDicke, MatchesConstantsForDefaultGeometry) {
  const GateParams p = params_for(100e-6);
  const double k = kTwoPi / 397e-9;
  const double m = 2.0 * 43.0 * 1.66053906660e-27;
  const double expected = std::sqrt(2.0) * k * std::sqrt(1.054571817e-34 / (2.0 * m * kTwoPi * 1.95e6));
  EXPECT_NEAR(p.eta, expected, 1e-14);
  EXPECT_NEAR(p.eta, 0.12287, 5e-5);
}

TEST(LambDicke, ScalesAsInverseSquareRootOfTrapFrequency) {
  GateParams p = params_for(100e-6);
  const double eta = lamb_dicke(p, AtomModel::calcium43());
  p.nu_z *= 2.0;
  EXPECT_NEAR(lamb_dicke(p, AtomModel::calcium43()), eta / std::sqrt(2.0), 1e-15);
}

TEST(LambDicke, CopropagatingBeamsGiveZero) {
  GateParams p = params_for(100e-6);
  p.beam_angle = 0.0;
  EXPECT_EQ(lamb_dicke(p, AtomModel::calcium43()), 0.0);
}

TEST(RabiFromIntensity, VanishesFarFromResonance) {
  GateParams p = params_for(100e-6);
  const AtomModel atom = AtomModel::calcium43();
  p.delta_raman = -3.0 * kTHz;
  const double near = rabi_from_intensity(p, atom);
  p.delta_raman = -3000.0 * kTHz;
  EXPECT_LT(rabi_from_intensity(p, atom), 1e-5 * near);
}

TEST(RabiFromIntensity, LinearInPower) {
  GateParams p = params_for(100e-6);
  const AtomModel atom = AtomModel::calcium43();
  const double full = rabi_from_intensity(p, atom);
  p.power_per_beam *= 0.5;
  EXPECT_NEAR(rabi_from_intensity(p, atom), 0.5 * full, 1e-12 * full);
}

TEST(RabiFromIntensity, RejectsDetuningsNearResonance) {
  GateParams p = params_for(100e-6);
  const AtomModel atom = AtomModel::calcium43();
  p.delta_raman = kTwoPi * 0.5e9;
  EXPECT_THROW((void)rabi_from_intensity(p, atom), ModelError);
  p.delta_raman = atom.fine_structure_splitting + kTwoPi * 0.2e9;
  EXPECT_THROW((void)rabi_from_intensity(p, atom), ModelError);
}

TEST(CalibrateOmega, MatchesLoopCondition) {
  EXPECT_NEAR(calibrate_omega(100e-6), kTwoPi * 20e3 / (2.0 * std::sqrt(2.0)), 1e-9);
  EXPECT_NEAR(calibrate_omega(100e-6) / kTwoPi, 7071.0678, 1e-3);
  EXPECT_NEAR(calibrate_omega(30e-6) / kTwoPi, 23570.226, 1e-3);
  EXPECT_NEAR(calibrate_omega(60e-6), 0.5 * calibrate_omega(30e-6), 1e-9);
}

TEST(GateTimeForDetuning, InvertsCouplingFormula) {
  // t_g = √2 π / Ω_g, so Ω_g = 2π·7.071 kHz maps to 100 µs.
  EXPECT_NEAR(std::sqrt(2.0) * kPi / calibrate_omega(100e-6), 100e-6, 1e-18);
}

TEST(GateTimeForDetuning, CalibratedAnchorGivesHundredMicroseconds) {
  const GateParams p = gate_params_for_detuning(-3.0 * kTHz, BeamSetup{}, AtomModel::calcium43());
  EXPECT_NEAR(p.t_g, 100e-6, 1e-9 * 100e-6);
}

TEST(GateTimeForDetuning, LongerForLargerRedDetuning) {
  const GateParams base = params_for(100e-6);
  const AtomModel atom = AtomModel::calcium43();
  double prev = 0.0;
  for (double thz : {0.01, 0.05, 0.16, 0.5, 1.1, 3.0, 10.0, 50.0, 300.0}) {
    const double t = gate_time_for_detuning(-thz * kTHz, base, atom);
    EXPECT_GT(t, prev) << thz;
    prev = t;
  }
}

TEST(GateTimeForDetuning, RoundTripsThroughDetuning) {
  const GateParams base = params_for(100e-6);
  const AtomModel atom = AtomModel::calcium43();
  for (double t : {3.8e-6, 10e-6, 30e-6, 100e-6, 500e-6}) {
    const double d = detuning_for_gate_time(t, base, atom);
    EXPECT_NEAR(gate_time_for_detuning(d, base, atom) / t, 1.0, 1e-9);
  }
  EXPECT_NEAR(detuning_for_gate_time(30e-6, base, atom) / kTHz, -1.11726, 1e-4);
  EXPECT_NEAR(detuning_for_gate_time(3.8e-6, base, atom) / kTHz, -0.161289, 1e-5);
}

TEST(GateTimeForDetuning, UnattainableTimeListsRange) {
  try {
    (void)params_for(1e-9);
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("attainable range"), std::string::npos);
  }
}

TEST(GateParams, LoopConditionHoldsForEveryBuild) {
  for (double t : {3.8e-6, 30e-6, 100e-6, 250e-6}) {
    const GateParams p = params_for(t);
    EXPECT_NEAR(p.delta_g * p.t_g, 4.0 * kPi, 1e-9);
    EXPECT_EQ(p.mode, MotionalMode::kCom);
    EXPECT_GT(p.eta, 0.0);
    EXPECT_LT(p.eta, 0.3);
  }
  GateParams bad = params_for(100e-6);
  bad.delta_g *= 1.01;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(CalibrateLightshiftConstant, ReproducesShippedConstant) {
  const double kg = calibrate_lightshift_constant(-3.0 * kTHz, 100e-6, BeamSetup{}, AtomModel::calcium43());
  EXPECT_NEAR(kg / AtomModel::kDefaultLightshiftConstant, 1.0, 1e-12);
}

TEST(BuildGateArm, ClosesLoopForDefiniteSpins) {
  const SpaceSpec space(15);
  const GateParams p = params_for(100e-6);
  const DriveSegment arm = build_gate_arm(p, space);
  const Operator a = ladder_ops(space).a;
  for (const char* label : {"dd", "du", "uu"}) {
    const CompositeState out = evolve(initial_state(label, 0.0, space), arm);
    EXPECT_LE(std::abs((a.matrix() * out.matrix()).trace()), 1e-9) << label;
  }
}

TEST(BuildGateArm, OneArmImprintsQuarterPhaseOnEvenSector) {
  const SpaceSpec space(15);
  const GateParams p = params_for(30e-6);
  QubitVector plus = QubitVector::Constant(0.5);
  const CompositeState out = evolve(initial_state(plus, 0.0, space), build_gate_arm(p, space));
  const QubitVector expected = ideal_arm_qubits() * plus;
  const QubitMatrix rho = partial_trace_osc(out);
  EXPECT_NEAR((expected.adjoint() * rho * expected)(0, 0).real(), 1.0, 1e-8);
}

TEST(BuildGateArm, NoiselessBellStateAtEveryOperatingPoint) {
  const SpaceSpec space(15);
  for (double t : {3.8e-6, 30e-6, 100e-6}) {
    const GateParams p = params_for(t);
    const PulseSequence seq = build_bell_sequence(1, p, NoiseConfig{}, AtomModel::calcium43(), space);
    EXPECT_LE(1.0 - run_sequence(seq, RunOptions{}).fidelity, 1e-7) << t;
  }
}

TEST(BuildGateArm, IntensityErrorMatchesPhaseOvershootOracle) {
  const SpaceSpec space(15);
  const GateParams p = params_for(30e-6);
  NoiseConfig n;
  n.intensity_error = 0.005;
  const PulseSequence seq = build_bell_sequence(1, p, n, AtomModel::calcium43(), space);
  const double err = 1.0 - run_sequence(seq, RunOptions{}).fidelity;

  // Each arm imprints (π/4)(1+ε)² on the even sector.
  const double phi1 = detail::select_frame(1, kPi / 4.0).final_phase;
  const double per_arm = (kPi / 4.0) * 1.005 * 1.005;
  const double oracle = 1.0 - fidelity_with_bell(echo_output(arm_phase(per_arm), kPi / 4.0, phi1));
  EXPECT_NEAR(err, oracle, 1e-9);
  const double theta = (kPi / 2.0) * (1.005 * 1.005 - 1.0);
  EXPECT_NEAR(err, std::pow(std::sin(theta / 2.0), 2), 1e-9);
}

TEST(BuildGateArm, CommonLaserPhaseLeavesFidelityUnchanged) {
  const SpaceSpec space(12);
  const GateParams p = params_for(30e-6);
  SequenceOptions shifted;
  shifted.laser_phase = 0.7;
  const double f0 = run_sequence(build_bell_sequence(1, p, NoiseConfig{}, AtomModel::calcium43(), space), {}).fidelity;
  const double f1 =
      run_sequence(build_bell_sequence(1, p, NoiseConfig{}, AtomModel::calcium43(), space, shifted), {}).fidelity;
  EXPECT_NEAR(f0, f1, 1e-9);
}

TEST(IdealGateUnitary, TwiceGivesConditionalPhasePi) {
  const QubitMatrix u2 = ideal_gate_qubits() * ideal_gate_qubits();
  const QubitMatrix normalised = u2 / u2(0, 0);
  const QubitMatrix zz = embed_on_ion(pauli_matrix(Pauli::Z), 1) * embed_on_ion(pauli_matrix(Pauli::Z), 2);
  EXPECT_LE((normalised - zz).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(IdealGateUnitary, CommutesWithZZ) {
  const SpaceSpec space(5);
  const Operator zz = embed_qubit_op(Pauli::Z, 1, space) * embed_qubit_op(Pauli::Z, 2, space);
  EXPECT_LE(commutator_norm(ideal_gate_unitary(space), zz), 1e-15);
}

TEST(IdealGateUnitary, EchoSequenceGivesBellState) {
  const double phi1 = detail::select_frame(1, kPi / 4.0).final_phase;
  EXPECT_NEAR(fidelity_with_bell(echo_output(ideal_arm_qubits(), kPi / 4.0, phi1)), 1.0, 1e-12);
  const QubitMatrix two_arms = ideal_arm_qubits() * ideal_arm_qubits();
  EXPECT_LE((two_arms - ideal_gate_qubits()).cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
}  // namespace iongate
