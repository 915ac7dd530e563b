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

// Error channels acting during the gate and around it: photon scattering,
// motional heating and dephasing, thermal occupation through the
// Lamb-Dicke correction, intensity errors, the counter-rotating drive,
// quasi-static magnetic-field noise and single-qubit SPAM errors.

#ifndef IONGATE_NOISE_HPP
#define IONGATE_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "iongate/dynamics.hpp"
#include "iongate/errors.hpp"
#include "iongate/gate.hpp"
#include "iongate/hilbert.hpp"

namespace iongate {

/// Common-mode qubit detuning from the magnetic field, in rad/s.
struct FieldNoise {
  double amp_50hz = 0.0;
  double slow_sigma = 0.0;
  double sensitivity = 0.0;  // rad/s per tesla, informational only
  double line_frequency = 50.0;  // Hz
  /// Markovian σz dephasing per ion; D[σz] at rate/2 so coherences decay as e^{−rate·t}.
  double white_dephasing_rate = 0.0;

  bool active() const { return amp_50hz != 0.0 || slow_sigma != 0.0 || white_dephasing_rate != 0.0; }
  bool quasi_static() const { return amp_50hz != 0.0 || slow_sigma != 0.0; }
};

struct SpamConfig {
  double prep_error = 0.0;               // per-ion flip probability
  double rotation_amplitude_error = 0.0; // fractional over/under-rotation
  double rotation_detuning_error = 0.0;  // σz tilt of the rotation axis

  bool active() const {
    return prep_error != 0.0 || rotation_amplitude_error != 0.0 || rotation_detuning_error != 0.0;
  }
};

struct NoiseConfig {
  double heating_rate = 0.0;             // quanta/s
  double motional_dephasing_rate = 0.0;  // 1/s
  double nbar0 = 0.0;
  bool scattering_enabled = false;
  double intensity_error = 0.0;  // systematic fraction
  double intensity_sigma = 0.0;  // shot-to-shot fraction (Gaussian)
  bool counter_rotating_enabled = false;
  bool lamb_dicke_correction_enabled = false;
  FieldNoise field;
  SpamConfig spam;
  double readout_epsilon = 0.0;

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be a finite value >= 0");
      }
    };
    nonneg(heating_rate, "heating_rate");
    nonneg(motional_dephasing_rate, "motional_dephasing_rate");
    nonneg(nbar0, "nbar0");
    nonneg(intensity_sigma, "intensity_sigma");
    nonneg(field.amp_50hz, "amp_50hz");
    nonneg(field.slow_sigma, "slow_sigma");
    nonneg(field.white_dephasing_rate, "white_dephasing_rate");
    if (!(field.line_frequency > 0.0)) throw ConfigError("line_frequency must be > 0");
    if (!std::isfinite(intensity_error) || intensity_error <= -1.0) {
      throw ConfigError("intensity_error must be > -1");
    }
    auto prob = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    prob(spam.prep_error, "prep_error");
    prob(readout_epsilon, "readout_epsilon");
    if (!std::isfinite(spam.rotation_amplitude_error) || !std::isfinite(spam.rotation_detuning_error)) {
      throw ConfigError("rotation errors must be finite");
    }
  }

  /// Same configuration with SPAM, readout and magnetic-field noise removed.
  NoiseConfig gate_only() const {
    NoiseConfig c = *this;
    c.spam = {};
    c.readout_epsilon = 0.0;
    c.field = FieldNoise{};
    c.field.line_frequency = field.line_frequency;
    return c;
  }

  /// Every channel off; the Lamb-Dicke and counter-rotating toggles are kept
  /// only if `keep_model_terms`.
  NoiseConfig silenced(bool keep_model_terms = false) const {
    NoiseConfig c;
    c.field.line_frequency = field.line_frequency;
    if (keep_model_terms) {
      c.lamb_dicke_correction_enabled = lamb_dicke_correction_enabled;
      c.counter_rotating_enabled = counter_rotating_enabled;
    }
    return c;
  }
};

struct ScatteringRates {
  double raman_rate = 0.0;          // 1/s per ion
  double rayleigh_deph_rate = 0.0;  // 1/s per ion
  double total_rate = 0.0;          // 1/s per ion
};

/// Off-resonant scattering from both Raman beams at detuning Δ.
inline ScatteringRates scattering_rates(const GateParams& p, const AtomModel& atom) {
  check_pole_distance(p.delta_raman, atom);
  const double d = p.delta_raman;
  const double wf = atom.fine_structure_splitting;
  const double scale = atom.scattering_constant * p.intensity() * atom.linewidth;
  ScatteringRates r;
  r.total_rate = scale * ((2.0 / 3.0) / (d * d) + (1.0 / 3.0) / ((d - wf) * (d - wf)));
  const double diff = 1.0 / d - 1.0 / (d - wf);
  r.raman_rate = scale * atom.raman_fraction * diff * diff;
  if (r.raman_rate > r.total_rate * (1.0 + 1e-12)) {
    throw ModelError("raman_fraction gives a Raman rate above the total scattering rate");
  }
  r.rayleigh_deph_rate = atom.elastic_dephasing_factor * std::max(0.0, r.total_rate - r.raman_rate);
  return r;
}

/// Dissipators active while the Raman beams are on.
inline std::vector<CollapseOp> collapse_ops(const NoiseConfig& cfg, const GateParams& p,
                                            const AtomModel& atom, SpaceSpec space) {
  std::vector<CollapseOp> out;
  const LadderOps ops = ladder_ops(space);
  if (cfg.heating_rate > 0.0) {
    out.push_back({ops.a_dag, cfg.heating_rate});
    out.push_back({ops.a, cfg.heating_rate});
  }
  if (cfg.motional_dephasing_rate > 0.0) out.push_back({ops.n, cfg.motional_dephasing_rate});
  if (cfg.scattering_enabled) {
    const ScatteringRates r = scattering_rates(p, atom);
    for (int ion = 1; ion <= 2; ++ion) {
      if (r.raman_rate > 0.0) {
        out.push_back({embed_qubit_matrix(sigma_minus(), ion, space), 0.5 * r.raman_rate});
        out.push_back({embed_qubit_matrix(sigma_plus(), ion, space), 0.5 * r.raman_rate});
      }
      if (r.rayleigh_deph_rate > 0.0) {
        out.push_back({embed_qubit_op(Pauli::Z, ion, space), 0.5 * r.rayleigh_deph_rate});
      }
    }
  }
  return out;
}

/// Dissipators present whether or not the beams are on.
inline std::vector<CollapseOp> background_collapse_ops(const NoiseConfig& cfg, SpaceSpec space) {
  std::vector<CollapseOp> out;
  const LadderOps ops = ladder_ops(space);
  if (cfg.heating_rate > 0.0) {
    out.push_back({ops.a_dag, cfg.heating_rate});
    out.push_back({ops.a, cfg.heating_rate});
  }
  if (cfg.motional_dephasing_rate > 0.0) out.push_back({ops.n, cfg.motional_dephasing_rate});
  return out;
}

/// White magnetic-field dephasing, kept apart from the quasi-static part.
inline std::vector<CollapseOp> field_collapse_ops(const NoiseConfig& cfg, SpaceSpec space) {
  std::vector<CollapseOp> out;
  if (cfg.field.white_dephasing_rate > 0.0) {
    for (int ion = 1; ion <= 2; ++ion) {
      out.push_back({embed_qubit_op(Pauli::Z, ion, space), 0.5 * cfg.field.white_dephasing_rate});
    }
  }
  return out;
}

/// One quasi-static noise realisation.
struct ShotDraw {
  double phase_50hz = 0.0;
  double b_slow = 0.0;
  double intensity_draw = 0.0;
  double amp_50hz = 0.0;
  double line_omega = 2.0 * kPi * 50.0;

  /// δq(t) in rad/s, t measured from the start of the sequence.
  double detuning(double t) const { return amp_50hz * std::sin(line_omega * t + phase_50hz) + b_slow; }

  /// ∫ δq dt over [t0, t1].
  double integrated_phase(double t0, double t1) const {
    return amp_50hz / line_omega *
               (std::cos(line_omega * t0 + phase_50hz) - std::cos(line_omega * t1 + phase_50hz)) +
           b_slow * (t1 - t0);
  }
};

/// Stream identifiers so that each shot owns independent generators.
enum class ShotStream : std::uint32_t { kField = 1, kOutcome = 2, kParity = 3 };

inline std::mt19937_64 shot_engine(std::uint64_t seed, std::uint64_t shot_index, ShotStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shot_index),
                    static_cast<std::uint32_t>(shot_index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline ShotDraw draw_shot(std::uint64_t seed, std::uint64_t shot_index, const NoiseConfig& cfg) {
  std::mt19937_64 eng = shot_engine(seed, shot_index, ShotStream::kField);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ShotDraw d;
  d.phase_50hz = uni(eng);
  d.b_slow = cfg.field.slow_sigma * gauss(eng);
  d.intensity_draw = cfg.intensity_sigma * gauss(eng);
  d.amp_50hz = cfg.field.amp_50hz;
  d.line_omega = 2.0 * kPi * cfg.field.line_frequency;
  return d;
}

/// H = (δq(t_start + t)/2)(σz⁽¹⁾ + σz⁽²⁾) for a segment starting at t_start.
inline HamiltonianTerm field_noise_term(const ShotDraw& draw, double t_start, SpaceSpec space) {
  const Operator s = embed_qubit_op(Pauli::Z, 1, space) + embed_qubit_op(Pauli::Z, 2, space);
  return {0.5 * s, [draw, t_start](double t) { return cplx(draw.detuning(t_start + t), 0.0); }};
}

/// 1 − η²(n̂+1)/2 on the oscillator.
inline Operator lamb_dicke_correction(const GateParams& p, SpaceSpec space) {
  const int nf = space.fock_dim();
  Matrix m = Matrix::Zero(nf, nf);
  for (int n = 0; n < nf; ++n) m(n, n) = 1.0 - 0.5 * p.eta * p.eta * (n + 1.0);
  return embed_oscillator(m, space);
}

/// Non-rotating-wave partner of the gate drive: the same operator, detuned
/// by δ_g + 2ω_mode and rotating the other way.
inline std::vector<HamiltonianTerm> counter_rotating_term(const GateParams& p, SpaceSpec space,
                                                          const ArmOptions& opt) {
  const Operator up = force_raising_operator(p, space, opt);
  const double g = 0.5 * arm_coupling(p, opt);
  const double w = p.delta_g + 2.0 * p.mode_frequency();
  const double t0 = opt.time_offset;
  const double phi = opt.laser_phase;
  return {{up, [=](double t) { return g * std::exp(-kI * (w * (t + t0) + phi)); }},
          {up.adjoint(), [=](double t) { return g * std::exp(kI * (w * (t + t0) + phi)); }}};
}

/// Gate arm with every enabled model term and dissipator.
inline DriveSegment build_noisy_arm(const GateParams& p, const NoiseConfig& cfg,
                                    const AtomModel& atom, SpaceSpec space, ArmOptions opt) {
  if (cfg.lamb_dicke_correction_enabled) opt.motional_factor = lamb_dicke_correction(p, space);
  DriveSegment seg = build_gate_arm(p, space, opt);
  if (cfg.counter_rotating_enabled) seg.hamiltonian.append(counter_rotating_term(p, space, opt));
  seg.collapse_ops = collapse_ops(cfg, p, atom, space);
  for (auto& c : field_collapse_ops(cfg, space)) seg.collapse_ops.push_back(std::move(c));
  return seg;
}

/// Idle period: no drive, background dissipators only.
inline DriveSegment build_wait(double duration, const NoiseConfig& cfg, SpaceSpec space) {
  DriveSegment seg{duration, TimeDependentHamiltonian(space), background_collapse_ops(cfg, space)};
  for (auto& c : field_collapse_ops(cfg, space)) seg.collapse_ops.push_back(std::move(c));
  return seg;
}

/// exp(−i (θ(1+ε)/2)(cos φ X + sin φ Y + d Z)).
inline Matrix2 rotation_matrix(double theta, double phi, double amplitude_error = 0.0,
                               double detuning_error = 0.0) {
  const double nx = std::cos(phi), ny = std::sin(phi), nz = detuning_error;
  const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  const double half = 0.5 * theta * (1.0 + amplitude_error) * norm;
  Matrix2 gen = (nx * pauli_matrix(Pauli::X) + ny * pauli_matrix(Pauli::Y) +
                 nz * pauli_matrix(Pauli::Z)) /
                norm;
  return std::cos(half) * Matrix2::Identity() - kI * std::sin(half) * gen;
}

inline Matrix2 spam_rotation(double theta, double phi, const SpamConfig& spam) {
  return rotation_matrix(theta, phi, spam.rotation_amplitude_error, spam.rotation_detuning_error);
}

/// Independent bit flip with probability p on each ion.
inline QubitMatrix apply_prep_error(const QubitMatrix& rho, double p) {
  if (p == 0.0) return rho;
  QubitMatrix out = rho;
  for (int ion = 1; ion <= 2; ++ion) {
    const QubitMatrix x = embed_on_ion(pauli_matrix(Pauli::X), ion);
    out = (1.0 - p) * out + p * (x * out * x.adjoint());
  }
  return out;
}

}  // namespace iongate

#endif  // IONGATE_NOISE_HPP
