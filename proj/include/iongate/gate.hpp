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

// Light-shift geometric phase gate.
//
// A gate of duration t_g is two arms of t_g/2, one on each side of the
// spin-echo π pulse. Each arm drives the motional mode once around a closed
// phase-space loop (δ_g·t_g/2 = 2π). With the spin-dependent force
// f = ±2 on |↓↓>, |↑↑> and f = 0 on the odd-parity states, one loop imprints
// Φ = 2π(fΩ_g/2δ_g)² and two loops at Ω_g = δ_g/(2√2) give π/2 between the
// parity sectors.

#ifndef IONGATE_GATE_HPP
#define IONGATE_GATE_HPP

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "iongate/dynamics.hpp"
#include "iongate/errors.hpp"
#include "iongate/hilbert.hpp"

namespace iongate {

namespace constants {
inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
}  // namespace constants

enum class MotionalMode { kCom, kStretch };

/// Atomic constants of the Raman transition plus the two calibration
/// constants that set the absolute scale of the gate coupling and of the
/// photon-scattering rates.
struct AtomModel {
  double fine_structure_splitting;  // ω_f, rad/s
  double linewidth;                 // Γ, rad/s
  double raman_wavelength;          // m
  double ion_mass;                  // kg
  double lightshift_constant;       // K_g, (rad/s)²·m²/W
  double scattering_constant;       // K_s, (rad/s)·m²/W
  double raman_fraction = 2.0 / 9.0;       // c_R
  double elastic_dephasing_factor = 0.0;   // c_E

  /// ⁴³Ca⁺ on 4S1/2 ↔ 4P1/2 with the shipped calibration constants.
  static AtomModel calcium43() {
    return {2.0 * kPi * 6.682e12,
            2.0 * kPi * 22.4e6,
            397e-9,
            43.0 * constants::kAtomicMassUnit,
            kDefaultLightshiftConstant,
            kDefaultScatteringConstant,
            2.0 / 9.0,
            0.0};
  }

  // Calibrated so that Δ/2π = −3.0 THz at 5 mW, 27 µm gives t_g = 100 µs, and
  // so that this gate loses 4e-4 Bell fidelity to photon scattering.
  static constexpr double kDefaultLightshiftConstant = 2261807156310.2686;
  static constexpr double kDefaultScatteringConstant = 29140874619850.988;

  void validate() const {
    if (!(fine_structure_splitting > 0.0) || !(linewidth > 0.0) || !(raman_wavelength > 0.0) ||
        !(ion_mass > 0.0) || !(lightshift_constant > 0.0) || !(scattering_constant >= 0.0)) {
      throw ConfigError("atom model constants must be positive");
    }
    if (!(raman_fraction >= 0.0) || !(elastic_dephasing_factor >= 0.0) ||
        elastic_dephasing_factor > 1.0) {
      throw ConfigError("raman_fraction must be >= 0 and elastic_dephasing_factor in [0, 1]");
    }
  }
};

/// Trap and beam settings that stay fixed while Δ is varied.
struct BeamSetup {
  double power_per_beam = 5e-3;  // W
  double waist = 27e-6;          // m
  double nu_z = 1.95e6;          // Hz, axial COM frequency
  MotionalMode mode = MotionalMode::kCom;
  double beam_angle = kPi / 2.0;  // angle between the Raman beams; each at 45° to z
};

struct GateParams {
  double delta_raman;  // Δ, rad/s (signed)
  double power_per_beam;
  double waist;
  double nu_z;
  double t_g;      // s, total drive time of both arms
  double delta_g;  // rad/s, 2π·(2/t_g)
  double omega_g;  // rad/s
  double eta;
  MotionalMode mode = MotionalMode::kCom;
  double beam_angle = kPi / 2.0;

  double intensity() const { return 2.0 * power_per_beam / (kPi * waist * waist); }

  /// Angular frequency of the driven mode.
  double mode_frequency() const {
    const double w = 2.0 * kPi * nu_z;
    return mode == MotionalMode::kCom ? w : std::sqrt(3.0) * w;
  }

  double arm_duration() const { return 0.5 * t_g; }

  void validate() const {
    if (!(t_g > 0.0) || !(power_per_beam > 0.0) || !(waist > 0.0) || !(nu_z > 0.0)) {
      throw ConfigError("gate time, power, waist and trap frequency must be positive");
    }
    if (std::abs(delta_g * t_g - 4.0 * kPi) > 1e-9) {
      throw ConfigError("gate detuning must satisfy delta_g * t_g = 4π");
    }
    if (!(eta > 0.0) || !(eta < 0.3)) {
      throw ConfigError("Lamb-Dicke parameter must lie in (0, 0.3), got " + std::to_string(eta));
    }
    if (!(omega_g >= 0.0)) throw ConfigError("omega_g must be >= 0");
  }
};

/// η = |Δk| √(ħ / (2 M ω_mode)), |Δk| = 2k sin(θ/2), M = 2 m_ion.
inline double lamb_dicke(const GateParams& p, const AtomModel& atom) {
  const double k = 2.0 * kPi / atom.raman_wavelength;
  const double dk = 2.0 * k * std::sin(0.5 * p.beam_angle);
  const double mass = 2.0 * atom.ion_mass;
  return std::abs(dk) * std::sqrt(constants::kHbar / (2.0 * mass * p.mode_frequency()));
}

inline constexpr double kPoleExclusion = 2.0 * kPi * 1e9;  // rad/s

inline void check_pole_distance(double delta, const AtomModel& atom) {
  if (std::abs(delta) < kPoleExclusion ||
      std::abs(delta - atom.fine_structure_splitting) < kPoleExclusion) {
    std::ostringstream os;
    os << "Raman detuning Δ/2π = " << delta / (2.0 * kPi) * 1e-12
       << " THz is within 1 GHz of an atomic resonance";
    throw ModelError(os.str());
  }
}

/// Ω_g = K_g η I |ω_f / (Δ(Δ − ω_f))|.
inline double rabi_from_intensity(const GateParams& p, const AtomModel& atom) {
  check_pole_distance(p.delta_raman, atom);
  const double d = p.delta_raman;
  const double wf = atom.fine_structure_splitting;
  return atom.lightshift_constant * p.eta * p.intensity() * std::abs(wf / (d * (d - wf)));
}

/// Coupling for which two closed loops give conditional phase π/2.
inline double calibrate_omega(double t_g) {
  if (!(t_g > 0.0)) throw ConfigError("t_g must be > 0");
  const double delta_g = 4.0 * kPi / t_g;
  return delta_g / (2.0 * std::sqrt(2.0));
}

inline double gate_time_for_detuning(double delta, const GateParams& p, const AtomModel& atom) {
  GateParams q = p;
  q.delta_raman = delta;
  const double omega = rabi_from_intensity(q, atom);
  if (!(omega > 0.0)) throw ModelError("no gate coupling at this detuning");
  return std::sqrt(2.0) * kPi / omega;
}

/// Inverse of gate_time_for_detuning on the red-detuned branch (Δ < 0),
/// where t_g grows monotonically with |Δ|.
inline double detuning_for_gate_time(double t_g, const GateParams& p, const AtomModel& atom) {
  const double near = -kPoleExclusion * (1.0 + 1e-9);
  const double far = -2.0 * kPi * 1e16;
  const double t_min = gate_time_for_detuning(near, p, atom);
  const double t_max = gate_time_for_detuning(far, p, atom);
  if (!(t_g >= t_min && t_g <= t_max)) {
    std::ostringstream os;
    os << "gate time " << t_g * 1e6 << " us is not attainable at this intensity; attainable range is ["
       << t_min * 1e6 << ", " << t_max * 1e6 << "] us";
    throw ModelError(os.str());
  }
  const double target = std::log(t_g);
  auto f = [&](double u) { return std::log(gate_time_for_detuning(-std::exp(u), p, atom)) - target; };
  boost::math::tools::eps_tolerance<double> tol(52);
  const auto [lo, hi] =
      boost::math::tools::bisect(f, std::log(-near), std::log(-far), tol);
  return -std::exp(0.5 * (lo + hi));
}

namespace detail {
inline GateParams base_params(const BeamSetup& beams) {
  GateParams p{};
  p.power_per_beam = beams.power_per_beam;
  p.waist = beams.waist;
  p.nu_z = beams.nu_z;
  p.mode = beams.mode;
  p.beam_angle = beams.beam_angle;
  return p;
}

inline GateParams finish(GateParams p, double t_g, const AtomModel& atom) {
  p.t_g = t_g;
  p.delta_g = 4.0 * kPi / t_g;
  p.omega_g = calibrate_omega(t_g);
  p.validate();
  (void)atom;
  return p;
}
}  // namespace detail

/// Gate parameters at fixed beam intensity for a requested gate time.
inline GateParams gate_params_for_time(double t_g, const BeamSetup& beams, const AtomModel& atom) {
  atom.validate();
  GateParams p = detail::base_params(beams);
  p.eta = lamb_dicke(p, atom);
  p.t_g = t_g;
  p.delta_raman = detuning_for_gate_time(t_g, p, atom);
  return detail::finish(p, t_g, atom);
}

/// Gate parameters at fixed beam intensity for a requested Raman detuning.
inline GateParams gate_params_for_detuning(double delta, const BeamSetup& beams,
                                           const AtomModel& atom) {
  atom.validate();
  GateParams p = detail::base_params(beams);
  p.eta = lamb_dicke(p, atom);
  p.delta_raman = delta;
  return detail::finish(p, gate_time_for_detuning(delta, p, atom), atom);
}

/// K_g that maps the anchor detuning onto the anchor gate time.
inline double calibrate_lightshift_constant(double delta_anchor, double t_g_anchor,
                                            const BeamSetup& beams, AtomModel atom) {
  atom.lightshift_constant = 1.0;
  GateParams p = detail::base_params(beams);
  p.eta = lamb_dicke(p, atom);
  p.delta_raman = delta_anchor;
  return calibrate_omega(t_g_anchor) / rabi_from_intensity(p, atom);
}

/// Spin part of the force: σz⁽¹⁾ + σz⁽²⁾ (COM) or σz⁽¹⁾ − σz⁽²⁾ (stretch).
inline Operator force_spin_operator(MotionalMode mode, SpaceSpec space) {
  const Operator z1 = embed_qubit_op(Pauli::Z, 1, space);
  const Operator z2 = embed_qubit_op(Pauli::Z, 2, space);
  return mode == MotionalMode::kCom ? z1 + z2 : z1 - z2;
}

struct ArmOptions {
  double intensity_error = 0.0;
  double laser_phase = 0.0;
  /// Start time of this arm within the sequence; the drive phase is
  /// δ_g (t + time_offset) + φ_L, so 0 resets the phase.
  double time_offset = 0.0;
  /// Multiplies Ω_g; used to recalibrate against deterministic model terms.
  double coupling_scale = 1.0;
  /// Number-dependent factor M on the oscillator: the force couples via a†M.
  std::optional<Operator> motional_factor;
};

/// S ⊗ a†M, the raising half of the spin-dependent force.
inline Operator force_raising_operator(const GateParams& p, SpaceSpec space,
                                       const ArmOptions& opt) {
  const LadderOps ops = ladder_ops(space);
  const Operator s = force_spin_operator(p.mode, space);
  return opt.motional_factor ? s * (ops.a_dag * *opt.motional_factor) : s * ops.a_dag;
}

/// Effective coupling (1+ε)·scale·Ω_g.
inline double arm_coupling(const GateParams& p, const ArmOptions& opt) {
  return (1.0 + opt.intensity_error) * opt.coupling_scale * p.omega_g;
}

/// One arm: H/ħ = (Ω/2) S (a†M e^{i(δ_g(t+t0) + φ_L)} + h.c.) for t ∈ [0, t_g/2].
inline DriveSegment build_gate_arm(const GateParams& p, SpaceSpec space, const ArmOptions& opt = {}) {
  p.validate();
  const Operator up = force_raising_operator(p, space, opt);
  const double g = 0.5 * arm_coupling(p, opt);
  const double delta = p.delta_g;
  const double t0 = opt.time_offset;
  const double phi = opt.laser_phase;
  TimeDependentHamiltonian h(space);
  h.add(up, [=](double t) { return g * std::exp(kI * (delta * (t + t0) + phi)); });
  h.add(up.adjoint(), [=](double t) { return g * std::exp(-kI * (delta * (t + t0) + phi)); });
  return DriveSegment{p.arm_duration(), std::move(h), {}};
}

/// diag(e^{iπ/4}, e^{−iπ/4}, e^{−iπ/4}, e^{iπ/4}) on the qubits.
inline QubitMatrix ideal_gate_qubits() {
  QubitMatrix u = QubitMatrix::Zero();
  const cplx even = std::exp(kI * (kPi / 4.0));
  const cplx odd = std::exp(-kI * (kPi / 4.0));
  u(0, 0) = even;
  u(1, 1) = odd;
  u(2, 2) = odd;
  u(3, 3) = even;
  return u;
}

/// One arm of the ideal gate: conditional phase π/4 on the even sector.
inline QubitMatrix ideal_arm_qubits() {
  QubitMatrix u = QubitMatrix::Zero();
  u(0, 0) = std::exp(kI * (kPi / 8.0));
  u(1, 1) = std::exp(-kI * (kPi / 8.0));
  u(2, 2) = std::exp(-kI * (kPi / 8.0));
  u(3, 3) = std::exp(kI * (kPi / 8.0));
  return u;
}

inline Operator ideal_gate_unitary(SpaceSpec space) { return embed_qubits(ideal_gate_qubits(), space); }

}  // namespace iongate

#endif  // IONGATE_GATE_HPP
