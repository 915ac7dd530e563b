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

#include "iongate/sequence.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "iongate/errors.hpp"

namespace iongate {
namespace {

GateParams params_for(double t_g) { return gate_params_for_time(t_g, BeamSetup{}, AtomModel::calcium43()); }

PulseSequence bell(int n, double t_g, const NoiseConfig& noise, int fock = 15, SequenceOptions opts = {}) {
  return build_bell_sequence(n, params_for(t_g), noise, AtomModel::calcium43(), SpaceSpec(fock), opts);
}

Eigen::Vector4d bell_populations() { return Eigen::Vector4d(0.5, 0.0, 0.0, 0.5); }

TEST(BuildBellSequence, RejectsEvenOrNonPositiveGateCounts) {
  for (int n : {0, -1, 2, 8}) EXPECT_THROW((void)bell(n, 100e-6, NoiseConfig{}), ConfigError) << n;
}

TEST(BuildBellSequence, StructureIsPrepEchoMeasure) {
  const PulseSequence seq = bell(3, 30e-6, NoiseConfig{});
  ASSERT_EQ(seq.steps.size(), 1u + 1u + 3u + 1u + 3u + 1u + 1u);
  EXPECT_TRUE(std::holds_alternative<Prep>(seq.steps.front()));
  EXPECT_TRUE(std::holds_alternative<Measure>(seq.steps.back()));
  EXPECT_NEAR(seq.total_duration(), 3.0 * 30e-6, 1e-15);
  PulseSequence broken = seq;
  broken.steps.erase(broken.steps.begin());
  EXPECT_THROW(broken.validate(), ConfigError);
}

TEST(BuildBellSequence, DeadTimeExtendsDuration) {
  SequenceOptions opts;
  opts.dead_time = 10e-6;
  EXPECT_NEAR(bell(1, 100e-6, NoiseConfig{}, 15, opts).total_duration(), 110e-6, 1e-15);
  opts.dead_time = -1.0;
  EXPECT_THROW((void)bell(1, 100e-6, NoiseConfig{}, 15, opts), ConfigError);
}

TEST(RunSequence, NoiselessSequencesProduceBellState) {
  for (int n : {1, 3}) {
    const SequenceResult r = run_sequence(bell(n, 30e-6, NoiseConfig{}), RunOptions{});
    EXPECT_EQ(r.route, Route::kKet);
    EXPECT_LE(1.0 - r.fidelity, 1e-7) << n;
    EXPECT_LE((r.probabilities - bell_populations()).cwiseAbs().maxCoeff(), 1e-7) << n;
  }
}

TEST(RunSequence, RouteFollowsNoiseContent) {
  NoiseConfig heat;
  heat.heating_rate = 4.0;
  EXPECT_EQ(run_sequence(bell(1, 100e-6, heat, 8), RunOptions{}).route, Route::kCharge);
  NoiseConfig shaky;
  shaky.intensity_sigma = 0.01;
  RunOptions few;
  few.shots = 2;
  EXPECT_EQ(run_sequence(bell(1, 100e-6, shaky, 8), few).route, Route::kDirect);
  RunOptions ket;
  ket.route = Route::kKet;
  EXPECT_THROW((void)run_sequence(bell(1, 100e-6, heat, 8), ket), ConfigError);
}

TEST(RunSequence, ChargeAndDirectRoutesAgree) {
  NoiseConfig n;
  n.heating_rate = 40.0;
  n.motional_dephasing_rate = 20.0;
  n.scattering_enabled = true;
  n.nbar0 = 0.05;
  const PulseSequence seq = bell(1, 100e-6, n, 10);
  RunOptions charge;
  charge.route = Route::kCharge;
  RunOptions direct;
  direct.route = Route::kDirect;
  direct.shots = 1;
  const double fc = run_sequence(seq, charge).fidelity;
  const double fd = run_sequence(seq, direct).fidelity;
  EXPECT_NEAR(fc, fd, 1e-8);
  EXPECT_GT(1.0 - fc, 1e-3);
}

TEST(RunSequence, SampledFieldAverageMatchesDirectShots) {
  NoiseConfig n;
  n.field.amp_50hz = 1e5;
  n.field.slow_sigma = 500.0;
  n.heating_rate = 10.0;
  const PulseSequence seq = bell(1, 100e-6, n, 8);
  RunOptions charge;
  charge.exact = false;
  charge.shots = 16;
  charge.seed = 9;
  charge.route = Route::kCharge;
  RunOptions direct = charge;
  direct.route = Route::kDirect;
  const SequenceResult a = run_sequence(seq, charge);
  const SequenceResult b = run_sequence(seq, direct);
  EXPECT_LE((a.qubits - b.qubits).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RunSequence, AnalyticFieldAverageMatchesManyShots) {
  NoiseConfig n;
  n.field.amp_50hz = 1e5;
  const PulseSequence seq = bell(1, 100e-6, n, 8);
  const double exact = run_sequence(seq, RunOptions{}).fidelity;
  RunOptions sampled;
  sampled.exact = false;
  sampled.shots = 4000;
  const double mean = run_sequence(seq, sampled).fidelity;
  EXPECT_GT(1.0 - exact, 1e-3);
  EXPECT_NEAR(mean, exact, 0.05 * (1.0 - exact));
}

TEST(RunSequence, SampledRecordIsIndependentOfThreadCount) {
  NoiseConfig n;
  n.field.amp_50hz = 51000.0;
  n.heating_rate = 4.0;
  n.readout_epsilon = 0.01;
  const PulseSequence seq = bell(1, 100e-6, n, 8);
  RunOptions one;
  one.exact = false;
  one.shots = 500;
  one.seed = 77;
  one.threads = 1;
  RunOptions four = one;
  four.threads = 4;
  const SequenceResult a = run_sequence(seq, one);
  const SequenceResult b = run_sequence(seq, four);
  EXPECT_EQ(a.record.counts, b.record.counts);
  EXPECT_EQ(a.fidelity, b.fidelity);
  EXPECT_EQ(std::accumulate(a.record.counts.begin(), a.record.counts.end(), std::int64_t{0}), 500);
}

TEST(Readout, OddProbabilityOfBellStateIsTwoEpsilonOneMinusEpsilon) {
  for (double eps : {0.0, 1.7e-3, 0.01, 0.2}) {
    const Eigen::Vector4d raw = ReadoutModel{eps}.apply(bell_populations());
    EXPECT_NEAR(raw(1) + raw(2), 2.0 * eps * (1.0 - eps), 1e-15) << eps;
    EXPECT_NEAR(raw.sum(), 1.0, 1e-15);
  }
}

TEST(Readout, NormalisationInvertsConfusion) {
  std::mt19937_64 eng(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Eigen::Vector4d p(uni(eng), uni(eng), uni(eng), uni(eng));
    p /= p.sum();
    const ReadoutModel m{0.03};
    const NormalizedProbabilities n = normalize_readout(m.apply(p), m);
    EXPECT_FALSE(n.clamped);
    EXPECT_LE((n.p - p).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Readout, NormalisationClampsUnphysicalFrequencies) {
  const NormalizedProbabilities n = normalize_readout(Eigen::Vector4d(1.0, 0.0, 0.0, 0.0), ReadoutModel{0.05});
  EXPECT_TRUE(n.clamped);
  EXPECT_NEAR(n.p.sum(), 1.0, 1e-14);
  EXPECT_GE(n.p.minCoeff(), 0.0);
  EXPECT_THROW((void)normalize_readout(Eigen::Vector4d(0.25, 0.25, 0.25, 0.25), ReadoutModel{0.5}), ConfigError);
}

TEST(Readout, RecordCountsMustMatchShots) {
  MeasurementRecord rec;
  rec.shots = 10;
  rec.counts = {5, 0, 0, 4};
  EXPECT_THROW((void)normalize_readout(rec, ReadoutModel{0.01}), ConfigError);
  rec.shots = 0;
  EXPECT_THROW((void)normalize_readout(rec, ReadoutModel{0.01}), ConfigError);
}

TEST(Readout, ExpectedCountsSumToShots) {
  const Eigen::Vector4d p(0.4995, 0.0005, 0.0007, 0.4993);
  for (std::int64_t shots : {1, 7, 100, 5000}) {
    const auto c = detail::expected_counts(p, shots);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::int64_t{0}), shots);
  }
  const auto c = detail::expected_counts(p, 10000);
  EXPECT_EQ(c[0], 4995);
  EXPECT_EQ(c[1], 5);
}

TEST(Parity, BellStateOscillatesWithFullContrast) {
  const QubitVector b = bell_state();
  const ParityCurve c = parity_scan(QubitMatrix(b * b.adjoint()), uniform_phases(16));
  const ParityFit f = fit_parity(c);
  EXPECT_NEAR(f.amplitude, 1.0, 1e-13);
  EXPECT_NEAR(f.offset, 0.0, 1e-13);
  for (std::size_t i = 0; i < c.phases.size(); ++i) {
    EXPECT_NEAR(c.parity[i], f.amplitude * std::cos(2.0 * c.phases[i] + f.phase), 1e-12);
  }
}

TEST(Parity, ClassicalMixtureHasNoContrast) {
  QubitMatrix rho = QubitMatrix::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  const ParityFit f = fit_parity(parity_scan(rho, uniform_phases(12)));
  EXPECT_NEAR(f.amplitude, 0.0, 1e-14);
  EXPECT_NEAR(bell_fidelity_estimate(1.0, f.amplitude), 0.5, 1e-14);
}

TEST(Parity, FitNeedsThreePhases) {
  ParityCurve c;
  c.phases = {0.0, 0.5};
  c.parity = {1.0, 0.0};
  EXPECT_THROW((void)fit_parity(c), ConfigError);
}

TEST(BellFidelityEstimate, CombinesPopulationAndContrast) {
  EXPECT_NEAR(bell_fidelity_estimate(1.0, 1.0), 1.0, 0.0);
  EXPECT_NEAR(bell_fidelity_estimate(0.998, 0.996), 0.997, 1e-15);
  EXPECT_THROW((void)bell_fidelity_estimate(1.2, 0.5), ConfigError);
  EXPECT_THROW((void)bell_fidelity_estimate(0.5, -0.1), ConfigError);
}

TEST(BellFidelityEstimate, RawReadoutGapHasClosedForm) {
  const QubitVector b = bell_state();
  const QubitMatrix rho = b * b.adjoint();
  for (double eps : {1e-3, 1.7e-3, 0.01}) {
    const ReadoutModel m{eps};
    const Eigen::Vector4d raw = m.apply(bell_populations());
    ParityCurve curve = parity_scan(rho, uniform_phases(16));
    for (std::size_t i = 0; i < curve.phases.size(); ++i) {
      const Matrix2 r = rotation_matrix(kPi / 2.0, curve.phases[i]);
      const QubitMatrix u = embed_on_ion(r, 1) * embed_on_ion(r, 2);
      curve.parity[i] = parity_of(m.apply(detail::qubit_populations(u * rho * u.adjoint())));
    }
    const double f_raw = bell_fidelity_estimate(raw(0) + raw(3), fit_parity(curve).amplitude);
    const double gap = 1.0 - f_raw;
    const double closed = 0.5 * 2.0 * eps * (1.0 - eps) + 0.5 * (1.0 - (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps));
    EXPECT_NEAR(gap, closed, 1e-14) << eps;
  }
}

TEST(Parity, SampledScanIsDeterministicAndUnbiased) {
  const QubitVector b = bell_state();
  const QubitMatrix rho = b * b.adjoint();
  const ReadoutModel m{0.01};
  const auto phases = uniform_phases(16);
  const ParityCurve a = parity_scan_sampled(rho, phases, 2000, 5, m);
  const ParityCurve c = parity_scan_sampled(rho, phases, 2000, 5, m);
  EXPECT_EQ(a.parity, c.parity);
  const ParityFit f = fit_parity(a);
  // Amplitude standard error is about √(2/(16·2000)).
  EXPECT_NEAR(f.amplitude, 1.0, 0.03);
}

}  // namespace
}  // namespace iongate
