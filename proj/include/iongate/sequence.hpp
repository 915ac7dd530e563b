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

// Spin-echo Bell sequence, its execution, and the measurement model.
//
//   Prep → R(π/2, φ0) → N arms → [wait] R(π, φ0) [wait] → N arms → R(π/2, φ1) → Measure
//
// Execution routes:
//  - ket: no dissipation and no per-shot noise; the initial mixture is
//    unravelled into weighted kets and each is propagated once.
//  - charge: the master equation commutes with common-mode z rotations, so
//    the state is split into coherence sectors q = m_row − m_col
//    (m = +1, 0, −1 for ↓↓, mixed, ↑↑) at each block of drive between
//    rotations. A quasi-static field shot then only multiplies sector q by
//    e^{−iqθ}, so shots cost no further integration and the exact shot
//    average has a closed form (J0 for the 50 Hz phase, a Gaussian for the
//    slow offset).
//  - direct: every shot is integrated with its own Hamiltonian. Needed for
//    shot-to-shot intensity noise; also a cross-check of the charge route.

#ifndef IONGATE_SEQUENCE_HPP
#define IONGATE_SEQUENCE_HPP

#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "iongate/dynamics.hpp"
#include "iongate/errors.hpp"
#include "iongate/gate.hpp"
#include "iongate/hilbert.hpp"
#include "iongate/noise.hpp"
#include "iongate/parallel.hpp"

namespace iongate {

struct Prep {
  QubitVector qubits;
  double nbar = 0.0;
  double flip_probability = 0.0;
};

/// Instantaneous rotation; ion 0 addresses both ions with the same pulse.
struct Rotation {
  double theta = 0.0;
  double phi = 0.0;
  int ion = 0;
  Matrix2 matrix = Matrix2::Identity();

  QubitMatrix qubit_matrix() const {
    if (ion == 0) return embed_on_ion(matrix, 1) * embed_on_ion(matrix, 2);
    return embed_on_ion(matrix, ion);
  }
};

struct GateArmStep {
  GateParams params;
  ArmOptions options;
  double start_time = 0.0;
};

struct WaitStep {
  double duration = 0.0;
  double start_time = 0.0;
};

struct Measure {};

using SequenceStep = std::variant<Prep, Rotation, GateArmStep, WaitStep, Measure>;

struct PulseSequence {
  std::vector<SequenceStep> steps;
  SpaceSpec space;
  NoiseConfig noise;
  AtomModel atom = AtomModel::calcium43();
  int n_gates = 1;
  /// Reference frame φ of (|↓↓> + e^{iφ}|↑↑>)/√2 for the direct overlap.
  double bell_phase = 0.0;

  double total_duration() const {
    double t = 0.0;
    for (const auto& s : steps) {
      if (const auto* a = std::get_if<GateArmStep>(&s)) t = std::max(t, a->start_time + a->params.arm_duration());
      if (const auto* w = std::get_if<WaitStep>(&s)) t = std::max(t, w->start_time + w->duration);
    }
    return t;
  }

  void validate() const {
    if (steps.size() < 2 || !std::holds_alternative<Prep>(steps.front()) ||
        !std::holds_alternative<Measure>(steps.back())) {
      throw ConfigError("a pulse sequence starts with Prep and ends with Measure");
    }
    for (std::size_t i = 1; i + 1 < steps.size(); ++i) {
      if (std::holds_alternative<Prep>(steps[i]) || std::holds_alternative<Measure>(steps[i])) {
        throw ConfigError("Prep and Measure may appear only at the ends of a sequence");
      }
    }
    noise.validate();
  }
};

struct SequenceOptions {
  double echo_phase = kPi / 4.0;  // φ0
  std::optional<double> final_phase;  // φ1; auto-selected when empty
  double dead_time = 0.0;  // s, split evenly around the π pulse
  bool phase_reset = false;  // restart the drive phase at every arm
  bool include_analysis = true;  // end with R(π/2, φ1)
  /// Coupling multiplier; when empty and a deterministic model term is on,
  /// it is recalibrated on the noiseless single-gate sequence.
  std::optional<double> coupling_scale;
  double laser_phase = 0.0;
};

namespace detail {

/// Output of the sequence with ideal arms, as a two-qubit density matrix.
inline QubitMatrix ideal_sequence_output(int n_gates, double phi0, double phi1, bool analysis = true) {
  QubitMatrix u = QubitMatrix::Identity();
  auto both = [](const Matrix2& r) { return QubitMatrix(embed_on_ion(r, 1) * embed_on_ion(r, 2)); };
  const QubitMatrix arm = ideal_arm_qubits();
  u = both(rotation_matrix(kPi / 2.0, phi0)) * u;
  for (int k = 0; k < n_gates; ++k) u = arm * u;
  u = both(rotation_matrix(kPi, phi0)) * u;
  for (int k = 0; k < n_gates; ++k) u = arm * u;
  if (analysis) u = both(rotation_matrix(kPi / 2.0, phi1)) * u;
  const QubitVector psi = u * qubit_basis_state("dd");
  return psi * psi.adjoint();
}

struct FrameChoice {
  double final_phase;
  double bell_phase;
};

/// φ1 that maximises the ideal overlap with |ψ+>; if |ψ+> itself is not
/// reachable the Bell frame moves to the optimal phase.
inline FrameChoice select_frame(int n_gates, double phi0) {
  auto infid = [&](double phi1) { return 1.0 - fidelity_with_bell(ideal_sequence_output(n_gates, phi0, phi1), 0.0); };
  constexpr int kGrid = 720;
  double best = 0.0, best_val = 2.0;
  for (int i = 0; i < kGrid; ++i) {
    const double x = 2.0 * kPi * i / kGrid;
    const double v = infid(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  const double h = 2.0 * kPi / kGrid;
  const auto r = boost::math::tools::brent_find_minima(infid, best - h, best + h, 52);
  double phi1 = std::remainder(r.first, 2.0 * kPi);
  if (phi1 < 0.0) phi1 += 2.0 * kPi;
  const QubitMatrix out = ideal_sequence_output(n_gates, phi0, phi1);
  if (1.0 - fidelity_with_bell(out, 0.0) < 1e-9) return {phi1, 0.0};
  // Fall back to the frame in which the ideal output is maximally overlapping.
  auto infid_opt = [&](double x) { return 1.0 - fidelity_bell_optimal(ideal_sequence_output(n_gates, phi0, x)); };
  best_val = 2.0;
  for (int i = 0; i < kGrid; ++i) {
    const double x = 2.0 * kPi * i / kGrid;
    const double v = infid_opt(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  const auto r2 = boost::math::tools::brent_find_minima(infid_opt, best - h, best + h, 52);
  return {r2.first, optimal_bell_phase(ideal_sequence_output(n_gates, phi0, r2.first))};
}

inline bool has_model_terms(const NoiseConfig& n) {
  return n.lamb_dicke_correction_enabled || n.counter_rotating_enabled;
}

}  // namespace detail

inline double calibrate_coupling_scale(const GateParams& p, const NoiseConfig& noise,
                                       const AtomModel& atom, SpaceSpec space,
                                       const SequenceOptions& opts, const IntegratorConfig& integ);

/// Builds the N-gate spin-echo Bell sequence.
inline PulseSequence build_bell_sequence(int n_gates, const GateParams& p, const NoiseConfig& noise,
                                         const AtomModel& atom, SpaceSpec space,
                                         SequenceOptions opts = {},
                                         const IntegratorConfig& integ = {}) {
  if (n_gates < 1 || n_gates % 2 == 0) {
    throw ConfigError("n_gates must be an odd positive integer, got " + std::to_string(n_gates));
  }
  if (!(opts.dead_time >= 0.0)) throw ConfigError("dead_time must be >= 0");
  p.validate();
  noise.validate();
  if (!opts.coupling_scale) {
    opts.coupling_scale =
        detail::has_model_terms(noise) ? calibrate_coupling_scale(p, noise, atom, space, opts, integ) : 1.0;
  }

  PulseSequence seq;
  seq.space = space;
  seq.noise = noise;
  seq.atom = atom;
  seq.n_gates = n_gates;
  const double phi0 = opts.echo_phase;
  double phi1 = 0.0;
  if (opts.include_analysis) {
    if (opts.final_phase) {
      phi1 = *opts.final_phase;
      seq.bell_phase = 0.0;
    } else {
      const auto frame = detail::select_frame(n_gates, phi0);
      phi1 = frame.final_phase;
      seq.bell_phase = frame.bell_phase;
    }
  }

  auto rotation = [&](double theta, double phi) {
    return Rotation{theta, phi, 0, spam_rotation(theta, phi, noise.spam)};
  };
  auto arm = [&](double start) {
    ArmOptions o;
    o.intensity_error = noise.intensity_error;
    o.laser_phase = opts.laser_phase;
    o.time_offset = opts.phase_reset ? 0.0 : start;
    o.coupling_scale = *opts.coupling_scale;
    return GateArmStep{p, o, start};
  };

  seq.steps.push_back(Prep{qubit_basis_state("dd"), noise.nbar0, noise.spam.prep_error});
  seq.steps.push_back(rotation(kPi / 2.0, phi0));
  double t = 0.0;
  for (int k = 0; k < n_gates; ++k, t += p.arm_duration()) seq.steps.push_back(arm(t));
  if (opts.dead_time > 0.0) {
    seq.steps.push_back(WaitStep{0.5 * opts.dead_time, t});
    t += 0.5 * opts.dead_time;
  }
  seq.steps.push_back(rotation(kPi, phi0));
  if (opts.dead_time > 0.0) {
    seq.steps.push_back(WaitStep{0.5 * opts.dead_time, t});
    t += 0.5 * opts.dead_time;
  }
  for (int k = 0; k < n_gates; ++k, t += p.arm_duration()) seq.steps.push_back(arm(t));
  if (opts.include_analysis) seq.steps.push_back(rotation(kPi / 2.0, phi1));
  seq.steps.push_back(Measure{});
  return seq;
}

// ---------------------------------------------------------------------------
// Readout

struct ReadoutModel {
  double epsilon = 0.0;

  /// C(read, true) = c ⊗ c with c = [[1−ε, ε], [ε, 1−ε]].
  Eigen::Matrix4d confusion() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("readout epsilon must lie in [0, 1]");
    Eigen::Matrix2d c;
    c << 1.0 - epsilon, epsilon, epsilon, 1.0 - epsilon;
    Eigen::Matrix4d out;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = c(i, j) * c;
    return out;
  }

  Eigen::Vector4d apply(const Eigen::Vector4d& p) const { return confusion() * p; }
};

struct MeasurementRecord {
  std::array<std::int64_t, 4> counts{};  // ↓↓, ↓↑, ↑↓, ↑↑
  std::int64_t shots = 0;
  std::optional<double> analysis_phase;
  /// Outcome frequencies; in exact mode the exact raw probabilities.
  Eigen::Vector4d frequencies = Eigen::Vector4d::Zero();
  bool exact = false;
};

namespace detail {

/// Integer counts summing to `shots` closest to shots·p (largest remainder).
inline std::array<std::int64_t, 4> expected_counts(const Eigen::Vector4d& p, std::int64_t shots) {
  std::array<std::int64_t, 4> counts{};
  std::array<double, 4> rem{};
  std::int64_t assigned = 0;
  for (int k = 0; k < 4; ++k) {
    const double x = std::max(0.0, p(k)) * static_cast<double>(shots);
    counts[k] = static_cast<std::int64_t>(std::floor(x));
    rem[k] = x - std::floor(x);
    assigned += counts[k];
  }
  while (assigned < shots) {
    int best = 0;
    for (int k = 1; k < 4; ++k)
      if (rem[k] > rem[best]) best = k;
    ++counts[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return counts;
}

inline int sample_outcome(const Eigen::Vector4d& p, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double total = p.cwiseMax(0.0).sum();
  const double u = uni(eng) * total;
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) {
    acc += std::max(0.0, p(k));
    if (u < acc) return k;
  }
  return 3;
}

}  // namespace detail

/// Multinomial counts from one generator; used where shots share a state.
inline MeasurementRecord sample_record(const Eigen::Vector4d& raw, std::int64_t shots,
                                       std::mt19937_64& eng) {
  MeasurementRecord rec;
  rec.shots = shots;
  std::int64_t left = shots;
  double mass = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double q = mass > 0.0 ? std::clamp(std::max(0.0, raw(k)) / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> bin(left, q);
    rec.counts[k] = left > 0 ? bin(eng) : 0;
    left -= rec.counts[k];
    mass -= std::max(0.0, raw(k));
  }
  rec.counts[3] = left;
  for (int k = 0; k < 4; ++k) rec.frequencies(k) = static_cast<double>(rec.counts[k]) / static_cast<double>(shots);
  return rec;
}

struct NormalizedProbabilities {
  Eigen::Vector4d p = Eigen::Vector4d::Zero();
  bool clamped = false;
};

/// p = C⁻¹ p_raw, clamped to [0, 1] and renormalised.
inline NormalizedProbabilities normalize_readout(const Eigen::Vector4d& raw, const ReadoutModel& model) {
  if (model.epsilon >= 0.5 - 1e-12) throw ConfigError("confusion matrix is singular for epsilon >= 0.5");
  NormalizedProbabilities out;
  out.p = model.confusion().partialPivLu().solve(raw);
  for (int k = 0; k < 4; ++k) {
    if (out.p(k) < 0.0 || out.p(k) > 1.0) {
      out.clamped = true;
      out.p(k) = std::clamp(out.p(k), 0.0, 1.0);
    }
  }
  const double s = out.p.sum();
  if (out.clamped && s > 0.0) out.p /= s;
  return out;
}

inline NormalizedProbabilities normalize_readout(const MeasurementRecord& rec, const ReadoutModel& model) {
  if (rec.shots <= 0) throw ConfigError("measurement record has no shots");
  std::int64_t total = 0;
  for (auto c : rec.counts) total += c;
  if (total != rec.shots) throw ConfigError("measurement counts do not sum to shots");
  return normalize_readout(rec.frequencies, model);
}

// ---------------------------------------------------------------------------
// Execution

enum class Route { kAuto, kKet, kCharge, kDirect };

struct RunOptions {
  std::int64_t shots = 5000;
  std::uint64_t seed = 1;
  bool exact = true;
  int threads = 0;  // 0: hardware concurrency
  Route route = Route::kAuto;
  IntegratorConfig integrator;
};

struct SequenceResult {
  CompositeState rho_mean;
  QubitMatrix qubits = QubitMatrix::Zero();
  MeasurementRecord record;
  Eigen::Vector4d probabilities = Eigen::Vector4d::Zero();  // ideal readout
  double fidelity = 0.0;          // overlap in the sequence's Bell frame
  double fidelity_optimal = 0.0;  // maximised over the Bell frame
  Route route = Route::kAuto;
};

namespace detail {

inline Eigen::Vector4d qubit_populations(const QubitMatrix& q) {
  Eigen::Vector4d p;
  for (int k = 0; k < 4; ++k) p(k) = q(k, k).real();
  return p;
}

/// m = +1, 0, 0, −1 for ↓↓, ↓↑, ↑↓, ↑↑.
inline int sector_charge(int qubit_index) {
  static constexpr int m[4] = {1, 0, 0, -1};
  return m[qubit_index];
}

inline Matrix project_charge(const Matrix& x, int q, int fock_dim) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const int mj = sector_charge(static_cast<int>(j) / fock_dim);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (sector_charge(static_cast<int>(i) / fock_dim) - mj == q) out(i, j) = x(i, j);
    }
  }
  return out;
}

inline DriveSegment arm_segment(const PulseSequence& seq, const GateArmStep& a,
                                double extra_intensity = 0.0) {
  ArmOptions o = a.options;
  o.intensity_error += extra_intensity;
  return build_noisy_arm(a.params, seq.noise, seq.atom, seq.space, o);
}

struct ChargeTerm {
  Matrix x;
  std::vector<int> charges;
};

struct Block {
  double t0 = 0.0;
  double t1 = 0.0;
};

inline Matrix initial_matrix(const Prep& prep, SpaceSpec space) {
  const QubitMatrix q = apply_prep_error(prep.qubits * prep.qubits.adjoint(), prep.flip_probability);
  return product_state(q, prep.nbar, space).matrix();
}

inline bool is_unitary(const PulseSequence& seq) {
  const NoiseConfig& n = seq.noise;
  return n.heating_rate == 0.0 && n.motional_dephasing_rate == 0.0 && !n.scattering_enabled &&
         !n.field.active() && n.intensity_sigma == 0.0;
}

/// Evolution through the whole sequence with per-sector bookkeeping.
inline std::vector<ChargeTerm> charge_terms(const PulseSequence& seq, const RunOptions& opts,
                                            std::vector<Block>& blocks) {
  const SpaceSpec space = seq.space;
  const bool split = seq.noise.field.quasi_static();
  std::vector<ChargeTerm> terms;
  bool in_block = false;

  auto close_block = [&] {
    if (!in_block) return;
    in_block = false;
    if (!split) {
      for (auto& t : terms) t.charges.push_back(0);
      return;
    }
    std::vector<ChargeTerm> next;
    for (auto& t : terms) {
      const double scale = t.x.cwiseAbs().maxCoeff();
      for (int q = -2; q <= 2; ++q) {
        Matrix part = project_charge(t.x, q, space.fock_dim());
        if (part.cwiseAbs().maxCoeff() <= 1e-16 * scale) continue;
        std::vector<int> c = t.charges;
        c.push_back(q);
        next.push_back({std::move(part), std::move(c)});
      }
    }
    terms = std::move(next);
  };

  auto propagate = [&](const DriveSegment& seg, double start) {
    if (!in_block) {
      blocks.push_back({start, start});
      in_block = true;
    }
    blocks.back().t1 = start + seg.duration;
    if (seg.hamiltonian.empty() && seg.collapse_ops.empty()) return;
    const Propagator prop(seg, opts.integrator);
    parallel_for(terms.size(), opts.threads, [&](std::size_t i) { terms[i].x = prop.apply(terms[i].x, !split); });
  };

  for (const auto& step : seq.steps) {
    if (const auto* prep = std::get_if<Prep>(&step)) {
      terms = {{initial_matrix(*prep, space), {}}};
    } else if (const auto* rot = std::get_if<Rotation>(&step)) {
      close_block();
      const Operator u = embed_qubits(rot->qubit_matrix(), space);
      for (auto& t : terms) t.x = u.matrix() * t.x * u.matrix().adjoint();
    } else if (const auto* arm = std::get_if<GateArmStep>(&step)) {
      propagate(arm_segment(seq, *arm), arm->start_time);
    } else if (const auto* wait = std::get_if<WaitStep>(&step)) {
      propagate(build_wait(wait->duration, seq.noise, space), wait->start_time);
    } else {
      close_block();
    }
  }
  return terms;
}

/// e^{−i Σ_k q_k θ_k} for one shot.
inline cplx shot_factor(const std::vector<int>& charges, const std::vector<Block>& blocks,
                        const ShotDraw& d) {
  double phase = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (charges[k] != 0) phase += charges[k] * d.integrated_phase(blocks[k].t0, blocks[k].t1);
  }
  return std::exp(-kI * phase);
}

/// Average of shot_factor over the field-noise distribution.
inline cplx mean_factor(const std::vector<int>& charges, const std::vector<Block>& blocks,
                        const FieldNoise& f) {
  const double w = 2.0 * kPi * f.line_frequency;
  cplx z(0.0, 0.0);
  double tau = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (charges[k] == 0) continue;
    z += static_cast<double>(charges[k]) *
         (std::exp(kI * (w * blocks[k].t0)) - std::exp(kI * (w * blocks[k].t1)));
    tau += charges[k] * (blocks[k].t1 - blocks[k].t0);
  }
  const double r = f.amp_50hz / w * std::abs(z);
  const double sigma_phase = f.slow_sigma * tau;
  return std::cyl_bessel_j(0.0, r) * std::exp(-0.5 * sigma_phase * sigma_phase);
}

/// Weighted kets representing the initial state.
inline std::vector<std::pair<double, Vector>> unravel_initial(const Prep& prep, SpaceSpec space) {
  const QubitMatrix q = apply_prep_error(prep.qubits * prep.qubits.adjoint(), prep.flip_probability);
  Eigen::SelfAdjointEigenSolver<QubitMatrix> es(q);
  const std::vector<double> pn = thermal_populations(prep.nbar, space.fock_dim());
  std::vector<std::pair<double, Vector>> kets;
  const int nf = space.fock_dim();
  for (int i = 0; i < 4; ++i) {
    const double li = es.eigenvalues()(i);
    if (li < 1e-15) continue;
    for (int n = 0; n < nf; ++n) {
      if (li * pn[n] < 1e-15) continue;
      Vector psi = Vector::Zero(space.dim());
      for (int k = 0; k < 4; ++k) psi(k * nf + n) = es.eigenvectors()(k, i);
      kets.emplace_back(li * pn[n], std::move(psi));
    }
  }
  return kets;
}

inline Matrix run_kets(const PulseSequence& seq, const RunOptions& opts) {
  const SpaceSpec space = seq.space;
  std::vector<std::pair<double, Vector>> kets;
  for (const auto& step : seq.steps) {
    if (const auto* prep = std::get_if<Prep>(&step)) {
      kets = unravel_initial(*prep, space);
    } else if (const auto* rot = std::get_if<Rotation>(&step)) {
      const Operator u = embed_qubits(rot->qubit_matrix(), space);
      for (auto& k : kets) k.second = u.matrix() * k.second;
    } else if (const auto* arm = std::get_if<GateArmStep>(&step)) {
      const KetPropagator prop(arm_segment(seq, *arm), opts.integrator);
      parallel_for(kets.size(), opts.threads, [&](std::size_t i) { kets[i].second = prop.apply(kets[i].second); });
    }
  }
  std::vector<Matrix> parts(kets.size());
  for (std::size_t i = 0; i < kets.size(); ++i) parts[i] = kets[i].first * (kets[i].second * kets[i].second.adjoint());
  return pairwise_sum(parts);
}

/// Full integration of one shot with its own intensity and field draw.
inline Matrix run_direct_shot(const PulseSequence& seq, const RunOptions& opts, const ShotDraw& d) {
  const SpaceSpec space = seq.space;
  Matrix x;
  for (const auto& step : seq.steps) {
    if (const auto* prep = std::get_if<Prep>(&step)) {
      x = initial_matrix(*prep, space);
    } else if (const auto* rot = std::get_if<Rotation>(&step)) {
      const Operator u = embed_qubits(rot->qubit_matrix(), space);
      x = u.matrix() * x * u.matrix().adjoint();
    } else if (const auto* arm = std::get_if<GateArmStep>(&step)) {
      DriveSegment seg = arm_segment(seq, *arm, d.intensity_draw);
      if (seq.noise.field.quasi_static()) seg.hamiltonian.append({field_noise_term(d, arm->start_time, space)});
      x = Propagator(seg, opts.integrator).apply(x, true);
    } else if (const auto* wait = std::get_if<WaitStep>(&step)) {
      DriveSegment seg = build_wait(wait->duration, seq.noise, space);
      if (seq.noise.field.quasi_static()) seg.hamiltonian.append({field_noise_term(d, wait->start_time, space)});
      if (!seg.hamiltonian.empty() || !seg.collapse_ops.empty()) {
        x = Propagator(seg, opts.integrator).apply(x, true);
      }
    }
  }
  return x;
}

}  // namespace detail

/// Executes a sequence. In exact mode the record carries the exact raw
/// outcome probabilities (counts are their largest-remainder rounding); in
/// sampled mode every shot draws its own field realisation and outcome.
inline SequenceResult run_sequence(const PulseSequence& seq, const RunOptions& opts) {
  seq.validate();
  opts.integrator.validate();
  if (opts.shots < 1) throw ConfigError("shots must be >= 1");
  const SpaceSpec space = seq.space;
  const ReadoutModel readout{seq.noise.readout_epsilon};
  const auto shots = static_cast<std::size_t>(opts.shots);

  Route route = opts.route;
  if (route == Route::kAuto) {
    if (seq.noise.intensity_sigma > 0.0) {
      route = Route::kDirect;
    } else if (detail::is_unitary(seq)) {
      route = Route::kKet;
    } else {
      route = Route::kCharge;
    }
  }
  if (route == Route::kKet && !detail::is_unitary(seq)) {
    throw ConfigError("the ket route needs a sequence without dissipation or shot noise");
  }
  if (route == Route::kCharge && seq.noise.intensity_sigma > 0.0) {
    throw ConfigError("shot-to-shot intensity noise needs the direct route");
  }

  Matrix rho_mean;
  std::vector<int> outcomes;
  const bool sample = !opts.exact;

  if (route == Route::kKet) {
    rho_mean = detail::run_kets(seq, opts);
  } else if (route == Route::kCharge) {
    std::vector<detail::Block> blocks;
    const std::vector<detail::ChargeTerm> terms = detail::charge_terms(seq, opts, blocks);
    const bool noisy = seq.noise.field.quasi_static();
    std::vector<cplx> mean_c(terms.size(), cplx(1.0, 0.0));
    std::vector<Eigen::Vector4cd> diag(terms.size());
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const QubitMatrix q = partial_trace_osc(terms[j].x, space.fock_dim());
      for (int k = 0; k < 4; ++k) diag[j](k) = q(k, k);
    }
    if (sample && noisy) {
      // Per-shot sector weights, reduced in a fixed order.
      std::vector<Eigen::VectorXcd> per_shot(shots);
      outcomes.assign(shots, 0);
      parallel_for(shots, opts.threads, [&](std::size_t s) {
        const ShotDraw d = draw_shot(opts.seed, s, seq.noise);
        Eigen::VectorXcd c(terms.size());
        Eigen::Vector4d p = Eigen::Vector4d::Zero();
        for (std::size_t j = 0; j < terms.size(); ++j) {
          c(j) = detail::shot_factor(terms[j].charges, blocks, d);
          p += (c(j) * diag[j]).real();
        }
        per_shot[s] = c;
        std::mt19937_64 eng = shot_engine(opts.seed, s, ShotStream::kOutcome);
        outcomes[s] = detail::sample_outcome(readout.apply(p), eng);
      });
      const Eigen::VectorXcd sum = pairwise_sum(per_shot);
      for (std::size_t j = 0; j < terms.size(); ++j) mean_c[j] = sum(j) / static_cast<double>(shots);
    } else if (noisy) {
      for (std::size_t j = 0; j < terms.size(); ++j) {
        mean_c[j] = detail::mean_factor(terms[j].charges, blocks, seq.noise.field);
      }
    }
    std::vector<Matrix> parts(terms.size());
    for (std::size_t j = 0; j < terms.size(); ++j) parts[j] = mean_c[j] * terms[j].x;
    rho_mean = pairwise_sum(parts);
  } else {
    std::vector<Matrix> per_shot(shots);
    outcomes.assign(shots, 0);
    parallel_for(shots, opts.threads, [&](std::size_t s) {
      const ShotDraw d = draw_shot(opts.seed, s, seq.noise);
      per_shot[s] = detail::run_direct_shot(seq, opts, d);
      if (sample) {
        const Eigen::Vector4d p = detail::qubit_populations(partial_trace_osc(per_shot[s], space.fock_dim()));
        std::mt19937_64 eng = shot_engine(opts.seed, s, ShotStream::kOutcome);
        outcomes[s] = detail::sample_outcome(readout.apply(p), eng);
      }
    });
    rho_mean = pairwise_sum(per_shot) / static_cast<double>(shots);
  }

  SequenceResult res{CompositeState(space, rho_mean), QubitMatrix::Zero(), MeasurementRecord{},
                     Eigen::Vector4d::Zero(), 0.0, 0.0, route};
  res.route = route;
  res.qubits = partial_trace_osc(res.rho_mean);
  res.probabilities = detail::qubit_populations(res.qubits);
  res.fidelity = fidelity_with_bell(res.qubits, seq.bell_phase);
  res.fidelity_optimal = fidelity_bell_optimal(res.qubits);
  res.record.shots = opts.shots;
  res.record.exact = opts.exact;
  if (opts.exact) {
    res.record.frequencies = readout.apply(res.probabilities);
    res.record.counts = detail::expected_counts(res.record.frequencies, opts.shots);
  } else {
    if (outcomes.empty()) {
      // Deterministic state: one outcome stream per shot.
      const Eigen::Vector4d raw = readout.apply(res.probabilities);
      outcomes.assign(shots, 0);
      parallel_for(shots, opts.threads, [&](std::size_t s) {
        std::mt19937_64 eng = shot_engine(opts.seed, s, ShotStream::kOutcome);
        outcomes[s] = detail::sample_outcome(raw, eng);
      });
    }
    for (int o : outcomes) ++res.record.counts[o];
    for (int k = 0; k < 4; ++k) {
      res.record.frequencies(k) = static_cast<double>(res.record.counts[k]) / static_cast<double>(opts.shots);
    }
  }
  return res;
}

/// Coupling multiplier that restores the ideal conditional phase when the
/// Lamb-Dicke correction or the counter-rotating term is on (n̄ = 0, no noise).
inline double calibrate_coupling_scale(const GateParams& p, const NoiseConfig& noise,
                                       const AtomModel& atom, SpaceSpec space,
                                       const SequenceOptions& opts, const IntegratorConfig& integ) {
  const NoiseConfig model = noise.silenced(/*keep_model_terms=*/true);
  SequenceOptions o = opts;
  o.include_analysis = true;
  RunOptions run;
  run.shots = 1;
  run.threads = 1;
  run.integrator = integ;
  run.route = Route::kKet;
  auto infidelity = [&](double scale) {
    o.coupling_scale = scale;
    const PulseSequence seq = build_bell_sequence(1, p, model, atom, space, o, integ);
    return 1.0 - run_sequence(seq, run).fidelity;
  };
  const auto r = boost::math::tools::brent_find_minima(infidelity, 0.9, 1.2, 40);
  return r.first;
}

// ---------------------------------------------------------------------------
// Parity analysis

struct ParityCurve {
  std::vector<double> phases;
  std::vector<double> parity;
};

struct ParityFit {
  double offset = 0.0;
  double amplitude = 0.0;  // |A|
  double phase = 0.0;      // Π = offset + |A| cos(2φ_a + phase)
};

inline double parity_of(const Eigen::Vector4d& p) { return p(0) + p(3) - p(1) - p(2); }

/// Π(φ_a) after an ideal R(π/2, φ_a) on both ions.
inline ParityCurve parity_scan(const QubitMatrix& rho, const std::vector<double>& phases) {
  ParityCurve c;
  c.phases = phases;
  for (double phi : phases) {
    const Matrix2 r = rotation_matrix(kPi / 2.0, phi);
    const QubitMatrix u = embed_on_ion(r, 1) * embed_on_ion(r, 2);
    c.parity.push_back(parity_of(detail::qubit_populations(u * rho * u.adjoint())));
  }
  return c;
}

inline ParityCurve parity_scan(const CompositeState& rho, const std::vector<double>& phases) {
  return parity_scan(partial_trace_osc(rho), phases);
}

/// Sampled parity scan: `shots` outcomes per phase through the readout model,
/// normalised back with the same model.
inline ParityCurve parity_scan_sampled(const QubitMatrix& rho, const std::vector<double>& phases,
                                       std::int64_t shots, std::uint64_t seed,
                                       const ReadoutModel& readout) {
  ParityCurve c;
  c.phases = phases;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Matrix2 r = rotation_matrix(kPi / 2.0, phases[i]);
    const QubitMatrix u = embed_on_ion(r, 1) * embed_on_ion(r, 2);
    const Eigen::Vector4d raw = readout.apply(detail::qubit_populations(u * rho * u.adjoint()));
    std::mt19937_64 eng = shot_engine(seed, i, ShotStream::kParity);
    const MeasurementRecord rec = sample_record(raw, shots, eng);
    c.parity.push_back(parity_of(normalize_readout(rec, readout).p));
  }
  return c;
}

/// Least-squares fit of Π = c + a cos 2φ + b sin 2φ.
inline ParityFit fit_parity(const ParityCurve& curve) {
  const auto n = static_cast<Eigen::Index>(curve.phases.size());
  if (n < 3) throw ConfigError("parity fit needs at least three phases");
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ph = curve.phases[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(2.0 * ph);
    a(i, 2) = std::sin(2.0 * ph);
    y(i) = curve.parity[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(y);
  ParityFit f;
  f.offset = x(0);
  f.amplitude = std::hypot(x(1), x(2));
  f.phase = std::atan2(-x(2), x(1));
  return f;
}

/// F = (P↓↓ + P↑↑)/2 + |A|/2.
inline double bell_fidelity_estimate(double even_population, double parity_amplitude) {
  if (!(even_population >= -1e-12 && even_population <= 1.0 + 1e-12) ||
      !(parity_amplitude >= 0.0 && parity_amplitude <= 1.0 + 1e-9)) {
    throw ConfigError("population and parity amplitude must lie in [0, 1]");
  }
  return 0.5 * even_population + 0.5 * parity_amplitude;
}

inline std::vector<double> uniform_phases(int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(kPi * i / n);
  return out;
}

}  // namespace iongate

#endif  // IONGATE_SEQUENCE_HPP
