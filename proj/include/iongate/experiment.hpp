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

// Error budget, gate-time and gate-count scans, and CSV output.
//
// Two run conditions are used throughout. "Measured" runs every channel in
// the configuration, including SPAM and magnetic-field noise. "Gate only"
// removes SPAM, readout and field noise, leaving the errors of the
// entangling operation itself.

#ifndef IONGATE_EXPERIMENT_HPP
#define IONGATE_EXPERIMENT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iongate/errors.hpp"
#include "iongate/gate.hpp"
#include "iongate/hilbert.hpp"
#include "iongate/noise.hpp"
#include "iongate/parallel.hpp"
#include "iongate/sequence.hpp"

namespace iongate {

/// Physical model of one run in SI units.
struct ModelConfig {
  BeamSetup beams;
  AtomModel atom = AtomModel::calcium43();
  NoiseConfig noise;
  SequenceOptions sequence;
  int fock_dim = SpaceSpec::kDefaultFockDim;
  int n_gates = 1;
  std::optional<double> t_g;          // s
  std::optional<double> delta_raman;  // rad/s

  SpaceSpec space() const { return SpaceSpec(fock_dim); }

  void validate() const {
    if (t_g.has_value() == delta_raman.has_value()) {
      throw ConfigError("exactly one of the gate time and the Raman detuning must be given");
    }
    atom.validate();
    noise.validate();
    (void)space();
  }

  GateParams gate_params() const {
    validate();
    return t_g ? gate_params_for_time(*t_g, beams, atom)
               : gate_params_for_detuning(*delta_raman, beams, atom);
  }
};

/// FNV-1a over a canonical dump of every model and run field.
inline std::string fingerprint(const ModelConfig& m, const RunOptions& run) {
  std::ostringstream os;
  os << std::hexfloat;
  auto put = [&](double v) { os << v << ';'; };
  put(m.beams.power_per_beam);
  put(m.beams.waist);
  put(m.beams.nu_z);
  put(m.beams.beam_angle);
  os << static_cast<int>(m.beams.mode) << ';';
  put(m.atom.fine_structure_splitting);
  put(m.atom.linewidth);
  put(m.atom.raman_wavelength);
  put(m.atom.ion_mass);
  put(m.atom.lightshift_constant);
  put(m.atom.scattering_constant);
  put(m.atom.raman_fraction);
  put(m.atom.elastic_dephasing_factor);
  const NoiseConfig& n = m.noise;
  for (double v : {n.heating_rate, n.motional_dephasing_rate, n.nbar0, n.intensity_error,
                   n.intensity_sigma, n.field.amp_50hz, n.field.slow_sigma, n.field.sensitivity,
                   n.field.line_frequency, n.field.white_dephasing_rate, n.spam.prep_error,
                   n.spam.rotation_amplitude_error, n.spam.rotation_detuning_error,
                   n.readout_epsilon}) {
    put(v);
  }
  os << n.scattering_enabled << n.counter_rotating_enabled << n.lamb_dicke_correction_enabled << ';';
  const SequenceOptions& s = m.sequence;
  put(s.echo_phase);
  put(s.final_phase.value_or(-1.0));
  put(s.dead_time);
  put(s.laser_phase);
  put(s.coupling_scale.value_or(-1.0));
  os << s.phase_reset << s.include_analysis << ';';
  os << m.fock_dim << ';' << m.n_gates << ';';
  put(m.t_g.value_or(-1.0));
  put(m.delta_raman.value_or(0.0));
  os << run.shots << ';' << run.seed << ';' << run.exact << ';';
  put(run.integrator.rel_tol);
  put(run.integrator.abs_tol);
  put(run.integrator.max_step);
  os << static_cast<int>(run.integrator.method);

  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct FidelityEstimate {
  double fidelity = 0.0;
  double sigma = 0.0;
  bool clamped = false;
};

inline constexpr int kParityPhases = 16;

/// Bell fidelity as it would be reported. Exact mode: direct overlap (readout
/// normalisation is exact). Sampled mode: normalised populations from the
/// record plus a sampled parity scan on the same state. σ is the binomial
/// scale √(F(1−F)/shots) in both modes.
inline FidelityEstimate estimate_fidelity(const SequenceResult& r, const PulseSequence& seq,
                                          const RunOptions& run) {
  FidelityEstimate e;
  if (run.exact) {
    e.fidelity = r.fidelity;
  } else {
    const ReadoutModel readout{seq.noise.readout_epsilon};
    const NormalizedProbabilities pop = normalize_readout(r.record, readout);
    const ParityCurve curve =
        parity_scan_sampled(r.qubits, uniform_phases(kParityPhases), run.shots, run.seed, readout);
    const ParityFit fit = fit_parity(curve);
    e.clamped = pop.clamped;
    e.fidelity = bell_fidelity_estimate(pop.p(0) + pop.p(3), std::min(1.0, fit.amplitude));
  }
  const double f = std::clamp(e.fidelity, 0.0, 1.0);
  e.sigma = std::sqrt(f * (1.0 - f) / static_cast<double>(run.shots));
  return e;
}

/// Runs the Bell sequence once for `noise` and returns the estimate.
inline FidelityEstimate run_bell(const ModelConfig& m, const GateParams& p, const NoiseConfig& noise,
                                 const RunOptions& run, int n_gates) {
  const PulseSequence seq =
      build_bell_sequence(n_gates, p, noise, m.atom, m.space(), m.sequence, run.integrator);
  return estimate_fidelity(run_sequence(seq, run), seq, run);
}

enum class Channel {
  kScattering,
  kHeating,
  kMotionalDephasing,
  kHeatingDephasing,
  kTemperature,
  kIntensity,
  kOffResonant,
  kField,
  kSpam,
};

/// `full` with everything switched off except one channel.
inline NoiseConfig isolate(const NoiseConfig& full, Channel ch) {
  NoiseConfig c = full.silenced();
  switch (ch) {
    case Channel::kScattering:
      c.scattering_enabled = full.scattering_enabled;
      break;
    case Channel::kHeating:
      c.heating_rate = full.heating_rate;
      break;
    case Channel::kMotionalDephasing:
      c.motional_dephasing_rate = full.motional_dephasing_rate;
      break;
    case Channel::kHeatingDephasing:
      c.heating_rate = full.heating_rate;
      c.motional_dephasing_rate = full.motional_dephasing_rate;
      break;
    case Channel::kTemperature:
      c.nbar0 = full.nbar0;
      c.lamb_dicke_correction_enabled = full.lamb_dicke_correction_enabled;
      break;
    case Channel::kIntensity:
      c.intensity_error = full.intensity_error;
      c.intensity_sigma = full.intensity_sigma;
      break;
    case Channel::kOffResonant:
      c.counter_rotating_enabled = full.counter_rotating_enabled;
      break;
    case Channel::kField:
      c.field = full.field;
      break;
    case Channel::kSpam:
      c.spam = full.spam;
      c.readout_epsilon = full.readout_epsilon;
      break;
  }
  return c;
}

struct BudgetRow {
  std::string channel;
  double error = 0.0;
};

struct ErrorBudget {
  std::vector<BudgetRow> rows;
  double total_modelled = 0.0;  // sum of rows
  double joint = 0.0;           // all gate channels on together
  double additivity_residual = 0.0;
  std::string config_hash;
};

namespace detail {

/// Bell error of `noise` above the noiseless baseline, floored at zero.
inline double excess_error(const ModelConfig& m, const GateParams& p, const NoiseConfig& noise,
                           const RunOptions& run, int n_gates, double baseline_fidelity) {
  return std::max(0.0, baseline_fidelity - run_bell(m, p, noise, run, n_gates).fidelity);
}

inline RunOptions exact_run(RunOptions run) {
  run.exact = true;
  return run;
}

}  // namespace detail

/// Per-channel Bell errors of the single-gate sequence, each channel alone
/// with SPAM and field noise off, plus the joint gate-only error.
inline ErrorBudget error_budget(const ModelConfig& m, const RunOptions& run_in) {
  const RunOptions run = detail::exact_run(run_in);
  const GateParams p = m.gate_params();
  const double f0 = run_bell(m, p, m.noise.silenced(), run, 1).fidelity;
  static const std::pair<const char*, Channel> kRows[] = {
      {"scattering", Channel::kScattering},   {"heating", Channel::kHeating},
      {"motional_dephasing", Channel::kMotionalDephasing},
      {"temperature", Channel::kTemperature}, {"intensity", Channel::kIntensity},
      {"offresonant", Channel::kOffResonant},
  };
  ErrorBudget b;
  b.config_hash = fingerprint(m, run_in);
  b.rows.resize(std::size(kRows));
  parallel_for(std::size(kRows), run.threads, [&](std::size_t i) {
    RunOptions inner = run;
    inner.threads = 1;
    b.rows[i] = {kRows[i].first,
                 detail::excess_error(m, p, isolate(m.noise, kRows[i].second), inner, 1, f0)};
  });
  for (const auto& r : b.rows) b.total_modelled += r.error;
  b.joint = detail::excess_error(m, p, m.noise.gate_only(), run, 1, f0);
  b.additivity_residual =
      b.total_modelled > 0.0 ? std::abs(b.joint - b.total_modelled) / b.total_modelled : 0.0;
  return b;
}

struct TgPoint {
  double t_g = 0.0;
  double delta_raman = 0.0;
  double bell_error_total = 0.0;
  double bell_error_gate_only = 0.0;
  double stat_sigma = 0.0;
  double scattering = 0.0;
  double heating_dephasing = 0.0;
  double temperature = 0.0;
  double intensity = 0.0;
  double offresonant = 0.0;
  double field_noise = 0.0;
  double spam = 0.0;
};

struct TgScan {
  std::vector<TgPoint> points;
  std::vector<std::string> warnings;  // skipped grid points
};

/// Fixed-intensity scan: each gate time sets its own Δ, Ω_g and scattering
/// rates. The total column follows `run` (sampled or exact); the gate-only
/// and per-channel columns are always exact.
inline TgScan scan_gate_time(const ModelConfig& m, const std::vector<double>& t_g_grid,
                             const RunOptions& run) {
  for (std::size_t i = 1; i < t_g_grid.size(); ++i) {
    if (!(t_g_grid[i] > t_g_grid[i - 1])) throw ConfigError("gate-time grid must be increasing");
  }
  std::vector<std::optional<TgPoint>> pts(t_g_grid.size());
  std::vector<std::string> why(t_g_grid.size());
  parallel_for(t_g_grid.size(), run.threads, [&](std::size_t i) {
    RunOptions inner = run;
    inner.threads = 1;
    const RunOptions exact = detail::exact_run(inner);
    GateParams p;
    try {
      p = gate_params_for_time(t_g_grid[i], m.beams, m.atom);
    } catch (const ModelError& e) {
      why[i] = e.what();
      return;
    }
    TgPoint pt;
    pt.t_g = p.t_g;
    pt.delta_raman = p.delta_raman;
    const double f0 = run_bell(m, p, m.noise.silenced(), exact, 1).fidelity;
    const FidelityEstimate total = run_bell(m, p, m.noise, inner, 1);
    pt.bell_error_total = std::max(0.0, 1.0 - total.fidelity);
    pt.stat_sigma = total.sigma;
    pt.bell_error_gate_only = detail::excess_error(m, p, m.noise.gate_only(), exact, 1, f0);
    auto row = [&](Channel ch) { return detail::excess_error(m, p, isolate(m.noise, ch), exact, 1, f0); };
    pt.scattering = row(Channel::kScattering);
    pt.heating_dephasing = row(Channel::kHeatingDephasing);
    pt.temperature = row(Channel::kTemperature);
    pt.intensity = row(Channel::kIntensity);
    pt.offresonant = row(Channel::kOffResonant);
    pt.field_noise = row(Channel::kField);
    pt.spam = row(Channel::kSpam);
    pts[i] = pt;
  });
  TgScan out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i]) {
      out.points.push_back(*pts[i]);
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "skipped t_g_us=%.6g: ", t_g_grid[i] * 1e6);
      out.warnings.push_back(buf + why[i]);
    }
  }
  return out;
}

struct NGatesFit {
  double a = 0.0;  // per-gate stochastic error
  double b = 0.0;  // coherent coefficient
  double implied_intensity_error = 0.0;
  double per_gate_bound = 0.0;  // ε(N_max)/N_max
};

/// Least squares for ε(N) = aN + bN², inverse-variance weighted when σs are given.
inline NGatesFit fit_n_gates(const std::vector<int>& ns, const std::vector<double>& errors,
                             const std::vector<double>& sigmas = {}) {
  if (ns.size() != errors.size() || (!sigmas.empty() && sigmas.size() != ns.size())) {
    throw ConfigError("fit inputs must have equal lengths");
  }
  const auto n = static_cast<Eigen::Index>(ns.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = sigmas.empty() ? 1.0 : 1.0 / sigmas[static_cast<std::size_t>(i)];
    if (!std::isfinite(w)) throw ConfigError("fit sigmas must be > 0");
    const double x = ns[static_cast<std::size_t>(i)];
    a(i, 0) = w * x;
    a(i, 1) = w * x * x;
    y(i) = w * errors[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2) throw ModelError("gate-count fit is degenerate: need two distinct gate counts");
  const Eigen::Vector2d x = qr.solve(y);
  NGatesFit f;
  f.a = x(0);
  f.b = x(1);
  // (Nθ)²/4 = bN² with θ = (π/2)((1+ε_I)² − 1).
  if (f.b > 0.0) f.implied_intensity_error = std::sqrt(1.0 + 2.0 * std::sqrt(f.b) / (kPi / 2.0)) - 1.0;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] > ns[imax]) imax = i;
  f.per_gate_bound = errors[imax] / ns[imax];
  return f;
}

struct NPoint {
  int n_gates = 0;
  double bell_error = 0.0;
  double stat_sigma = 0.0;
};

struct NScan {
  std::vector<NPoint> points;
  NGatesFit fit;
};

/// Bell error against the number of gates in one echo, under the gate-only
/// condition, so that SPAM does not enter the fit.
inline NScan scan_n_gates(const ModelConfig& m, const std::vector<int>& ns, const RunOptions& run) {
  for (int n : ns) {
    if (n < 1 || n % 2 == 0) throw ConfigError("gate counts must be odd and positive");
  }
  const GateParams p = m.gate_params();
  const NoiseConfig noise = m.noise.gate_only();
  ModelConfig mc = m;
  if (!mc.sequence.coupling_scale) {
    mc.sequence.coupling_scale = detail::has_model_terms(noise)
                                     ? calibrate_coupling_scale(p, noise, m.atom, m.space(), m.sequence, run.integrator)
                                     : 1.0;
  }
  NScan out;
  out.points.resize(ns.size());
  parallel_for(ns.size(), run.threads, [&](std::size_t i) {
    RunOptions inner = run;
    inner.threads = 1;
    const FidelityEstimate e = run_bell(mc, p, noise, inner, ns[i]);
    out.points[i] = {ns[i], std::max(0.0, 1.0 - e.fidelity), e.sigma};
  });
  std::vector<int> xs;
  std::vector<double> ys, ss;
  for (const auto& pt : out.points) {
    xs.push_back(pt.n_gates);
    ys.push_back(pt.bell_error);
    ss.push_back(pt.stat_sigma);
  }
  if (!xs.empty()) out.fit = fit_n_gates(xs, ys, run.exact ? std::vector<double>{} : ss);
  return out;
}

struct GateErrorInference {
  double value = 0.0;
  double sigma = 0.0;
  bool negative = false;
};

/// ε_g = measured − single-qubit contribution, σ in quadrature.
inline GateErrorInference infer_gate_error(double measured, double single_qubit,
                                           double sigma_measured = 0.0, double sigma_single = 0.0) {
  if (!(measured >= 0.0 && measured <= 1.0) || !(single_qubit >= 0.0 && single_qubit <= 1.0)) {
    throw ConfigError("errors must lie in [0, 1]");
  }
  GateErrorInference g;
  g.value = measured - single_qubit;
  g.sigma = std::hypot(sigma_measured, sigma_single);
  g.negative = g.value < 0.0;
  return g;
}

/// K_s such that the scattering-only Bell error at the configured gate equals `target`.
inline double calibrate_scattering_constant(ModelConfig m, double target, const RunOptions& run_in) {
  const RunOptions run = detail::exact_run(run_in);
  if (!(target > 0.0)) throw ConfigError("scattering target must be > 0");
  m.noise = m.noise.silenced();
  m.noise.scattering_enabled = true;
  const GateParams p = m.gate_params();
  const double f0 = run_bell(m, p, m.noise.silenced(), run, 1).fidelity;
  double ks = m.atom.scattering_constant > 0.0 ? m.atom.scattering_constant : 1e13;
  for (int it = 0; it < 6; ++it) {
    m.atom.scattering_constant = ks;
    const double e = f0 - run_bell(m, p, m.noise, run, 1).fidelity;
    if (!(e > 0.0)) throw ModelError("scattering produces no Bell error at this gate");
    const double next = ks * target / e;
    if (std::abs(next - ks) <= 1e-10 * ks) return next;
    ks = next;
  }
  return ks;
}

struct SimulationSummary {
  double t_g = 0.0;
  double delta_raman = 0.0;
  int n_gates = 1;
  FidelityEstimate estimate;
  double fidelity_direct = 0.0;   // overlap in the sequence's Bell frame
  double fidelity_optimal = 0.0;  // overlap maximised over the Bell frame
  Eigen::Vector4d raw_probabilities = Eigen::Vector4d::Zero();
  std::string config_hash;
};

/// Runs the configured sequence under the measured condition.
inline SimulationSummary simulate(const ModelConfig& m, const RunOptions& run) {
  const GateParams p = m.gate_params();
  const PulseSequence seq =
      build_bell_sequence(m.n_gates, p, m.noise, m.atom, m.space(), m.sequence, run.integrator);
  const SequenceResult r = run_sequence(seq, run);
  SimulationSummary s;
  s.t_g = p.t_g;
  s.delta_raman = p.delta_raman;
  s.n_gates = m.n_gates;
  s.estimate = estimate_fidelity(r, seq, run);
  s.fidelity_direct = r.fidelity;
  s.fidelity_optimal = r.fidelity_optimal;
  s.raw_probabilities = r.record.frequencies;
  s.config_hash = fingerprint(m, run);
  return s;
}

struct ParityScanResult {
  ParityCurve curve;
  ParityFit fit;
  double even_population = 0.0;
  double fidelity_estimate = 0.0;
  std::string config_hash;
};

/// Parity oscillation of the measured-condition Bell state over `points`
/// analysis phases in [0, π). Sampled mode draws `run.shots` per phase.
inline ParityScanResult parity_scan_experiment(const ModelConfig& m, const RunOptions& run, int points) {
  const GateParams p = m.gate_params();
  const PulseSequence seq =
      build_bell_sequence(m.n_gates, p, m.noise, m.atom, m.space(), m.sequence, run.integrator);
  const SequenceResult r = run_sequence(seq, run);
  const ReadoutModel readout{m.noise.readout_epsilon};
  ParityScanResult out;
  const std::vector<double> phases = uniform_phases(points);
  out.curve = run.exact ? parity_scan(r.qubits, phases)
                        : parity_scan_sampled(r.qubits, phases, run.shots, run.seed, readout);
  out.fit = fit_parity(out.curve);
  const Eigen::Vector4d pop = run.exact ? r.probabilities : normalize_readout(r.record, readout).p;
  out.even_population = pop(0) + pop(3);
  out.fidelity_estimate = bell_fidelity_estimate(out.even_population, std::min(1.0, out.fit.amplitude));
  out.config_hash = fingerprint(m, run);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

inline void emit_csv(const ErrorBudget& b, std::ostream& os) {
  os << "channel,error,config_hash\n";
  for (const auto& r : b.rows) os << r.channel << ',' << detail::num(r.error) << ',' << b.config_hash << '\n';
  os << "total," << detail::num(b.total_modelled) << ',' << b.config_hash << '\n';
}

inline void emit_csv(const TgScan& s, std::ostream& os) {
  os << "t_g_us,delta_THz,bell_error_total,bell_error_gate_only,stat_sigma,scattering,"
        "heating_dephasing,temperature,intensity,offresonant,field_noise,spam\n";
  for (const auto& p : s.points) {
    os << detail::num(p.t_g * 1e6) << ',' << detail::num(p.delta_raman / (2.0 * kPi) * 1e-12) << ','
       << detail::num(p.bell_error_total) << ',' << detail::num(p.bell_error_gate_only) << ','
       << detail::num(p.stat_sigma) << ',' << detail::num(p.scattering) << ','
       << detail::num(p.heating_dephasing) << ',' << detail::num(p.temperature) << ','
       << detail::num(p.intensity) << ',' << detail::num(p.offresonant) << ','
       << detail::num(p.field_noise) << ',' << detail::num(p.spam) << '\n';
  }
  for (const auto& w : s.warnings) os << "# " << w << '\n';
}

inline void emit_csv(const NScan& s, std::ostream& os) {
  os << "n_gates,bell_error,stat_sigma\n";
  for (const auto& p : s.points) {
    os << p.n_gates << ',' << detail::num(p.bell_error) << ',' << detail::num(p.stat_sigma) << '\n';
  }
  if (!s.points.empty()) {
    os << "# fit_a=" << detail::num(s.fit.a) << ",fit_b=" << detail::num(s.fit.b)
       << ",implied_intensity_error=" << detail::num(s.fit.implied_intensity_error) << '\n';
  }
}

inline void emit_csv(const SimulationSummary& s, std::ostream& os) {
  os << "quantity,value\n";
  os << "t_g_us," << detail::num(s.t_g * 1e6) << '\n';
  os << "delta_THz," << detail::num(s.delta_raman / (2.0 * kPi) * 1e-12) << '\n';
  os << "n_gates," << s.n_gates << '\n';
  os << "fidelity," << detail::num(s.estimate.fidelity) << '\n';
  os << "stat_sigma," << detail::num(s.estimate.sigma) << '\n';
  os << "bell_error," << detail::num(1.0 - s.estimate.fidelity) << '\n';
  os << "fidelity_direct," << detail::num(s.fidelity_direct) << '\n';
  os << "fidelity_frame_optimal," << detail::num(s.fidelity_optimal) << '\n';
  static const char* kOutcomes[] = {"p_dd_raw", "p_du_raw", "p_ud_raw", "p_uu_raw"};
  for (int i = 0; i < 4; ++i) os << kOutcomes[i] << ',' << detail::num(s.raw_probabilities(i)) << '\n';
  os << "config_hash," << s.config_hash << '\n';
}

inline void emit_csv(const ParityScanResult& r, std::ostream& os) {
  os << "phase_rad,parity\n";
  for (std::size_t i = 0; i < r.curve.phases.size(); ++i) {
    os << detail::num(r.curve.phases[i]) << ',' << detail::num(r.curve.parity[i]) << '\n';
  }
  os << "# offset=" << detail::num(r.fit.offset) << ",amplitude=" << detail::num(r.fit.amplitude)
     << ",even_population=" << detail::num(r.even_population)
     << ",fidelity_estimate=" << detail::num(r.fidelity_estimate) << ",config_hash=" << r.config_hash << '\n';
}

/// Writes through `emit` to `path`; I/O failures carry the system message.
template <typename Emit>
void write_file(const std::string& path, Emit&& emit) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
  emit(f);
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path + ": " + std::strerror(errno));
}

template <typename Result>
void emit_csv(const Result& r, const std::string& path) {
  write_file(path, [&](std::ostream& os) { emit_csv(r, os); });
}

}  // namespace iongate

#endif  // IONGATE_EXPERIMENT_HPP
