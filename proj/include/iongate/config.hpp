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

// Sectioned key = value run configuration.
//
//   [gate]  [atom]  [noise]  [spam]  [run]
//
// Values are stored in the units carried by the key name (t_g_us, nu_z_MHz,
// ...) and converted to SI by RunConfig::model(). Text after '#' and lines
// starting with ';' are comments. Unknown sections and keys, duplicates and out-of-range values are
// errors that name the offending line.

#ifndef IONGATE_CONFIG_HPP
#define IONGATE_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "iongate/errors.hpp"
#include "iongate/experiment.hpp"
#include "iongate/gate.hpp"

namespace iongate {

struct RunConfig {
  // [gate]
  std::optional<double> t_g_us;
  std::optional<double> delta_THz;
  double power_mW = 5.0;
  double waist_um = 27.0;
  double nu_z_MHz = 1.95;
  std::string mode = "com";
  double beam_angle_deg = 90.0;
  int n_gates = 1;
  double echo_phase_rad = kPi / 4.0;
  std::optional<double> final_phase_rad;
  double dead_time_us = 0.0;
  bool phase_reset = false;
  std::optional<double> coupling_scale;
  double laser_phase_rad = 0.0;

  // [atom]
  double fine_structure_THz = 6.682;
  double linewidth_MHz = 22.4;
  double wavelength_nm = 397.0;
  double mass_amu = 43.0;
  double lightshift_constant = AtomModel::kDefaultLightshiftConstant;
  double scattering_constant = AtomModel::kDefaultScatteringConstant;
  double raman_fraction = 2.0 / 9.0;
  double elastic_dephasing_factor = 0.0;

  // [noise]
  double heating_rate_per_s = 0.0;
  double motional_dephasing_per_s = 0.0;
  double nbar = 0.0;
  bool scattering = false;
  double intensity_error = 0.0;
  double intensity_sigma = 0.0;
  bool counter_rotating = false;
  bool lamb_dicke_correction = false;
  double field_50hz_amp_rad_per_s = 0.0;
  double field_slow_sigma_rad_per_s = 0.0;
  double field_sensitivity_rad_per_s_per_T = 0.0;
  double line_frequency_Hz = 50.0;
  double white_dephasing_per_s = 0.0;

  // [spam]
  double prep_error = 0.0;
  double rotation_amplitude_error = 0.0;
  double rotation_detuning_error = 0.0;
  double readout_error = 0.0;

  // [run]
  std::int64_t shots = 5000;
  std::uint64_t seed = 1;
  std::string run_mode = "exact";
  int fock_dim = SpaceSpec::kDefaultFockDim;
  int threads = 0;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step_us = 0.0;
  std::string integrator = "adaptive";
  std::string output;
  std::vector<double> tg_grid_us = {3.8, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0, 70.0, 100.0};
  std::vector<int> n_gates_list = {1, 3, 5, 7, 9};
  int parity_points = 16;

  bool operator==(const RunConfig&) const = default;

  /// Physical model in SI units.
  ModelConfig model() const {
    ModelConfig m;
    m.beams.power_per_beam = power_mW * 1e-3;
    m.beams.waist = waist_um * 1e-6;
    m.beams.nu_z = nu_z_MHz * 1e6;
    m.beams.mode = mode == "stretch" ? MotionalMode::kStretch : MotionalMode::kCom;
    m.beams.beam_angle = beam_angle_deg * kPi / 180.0;
    m.atom.fine_structure_splitting = 2.0 * kPi * fine_structure_THz * 1e12;
    m.atom.linewidth = 2.0 * kPi * linewidth_MHz * 1e6;
    m.atom.raman_wavelength = wavelength_nm * 1e-9;
    m.atom.ion_mass = mass_amu * constants::kAtomicMassUnit;
    m.atom.lightshift_constant = lightshift_constant;
    m.atom.scattering_constant = scattering_constant;
    m.atom.raman_fraction = raman_fraction;
    m.atom.elastic_dephasing_factor = elastic_dephasing_factor;
    NoiseConfig& n = m.noise;
    n.heating_rate = heating_rate_per_s;
    n.motional_dephasing_rate = motional_dephasing_per_s;
    n.nbar0 = nbar;
    n.scattering_enabled = scattering;
    n.intensity_error = intensity_error;
    n.intensity_sigma = intensity_sigma;
    n.counter_rotating_enabled = counter_rotating;
    n.lamb_dicke_correction_enabled = lamb_dicke_correction;
    n.field.amp_50hz = field_50hz_amp_rad_per_s;
    n.field.slow_sigma = field_slow_sigma_rad_per_s;
    n.field.sensitivity = field_sensitivity_rad_per_s_per_T;
    n.field.line_frequency = line_frequency_Hz;
    n.field.white_dephasing_rate = white_dephasing_per_s;
    n.spam.prep_error = prep_error;
    n.spam.rotation_amplitude_error = rotation_amplitude_error;
    n.spam.rotation_detuning_error = rotation_detuning_error;
    n.readout_epsilon = readout_error;
    m.sequence.echo_phase = echo_phase_rad;
    m.sequence.final_phase = final_phase_rad;
    m.sequence.dead_time = dead_time_us * 1e-6;
    m.sequence.phase_reset = phase_reset;
    m.sequence.coupling_scale = coupling_scale;
    m.sequence.laser_phase = laser_phase_rad;
    m.fock_dim = fock_dim;
    m.n_gates = n_gates;
    if (t_g_us) m.t_g = *t_g_us * 1e-6;
    if (delta_THz) m.delta_raman = 2.0 * kPi * *delta_THz * 1e12;
    return m;
  }

  RunOptions run_options() const {
    RunOptions r;
    r.shots = shots;
    r.seed = seed;
    r.exact = run_mode == "exact";
    r.threads = threads;
    r.integrator.rel_tol = rel_tol;
    r.integrator.abs_tol = abs_tol;
    r.integrator.max_step = max_step_us * 1e-6;
    r.integrator.method = integrator == "rk4" ? IntegratorMethod::kFixedRK4 : IntegratorMethod::kAdaptive;
    return r;
  }

  std::vector<double> tg_grid() const {
    std::vector<double> out;
    for (double t : tg_grid_us) out.push_back(t * 1e-6);
    return out;
  }
};

namespace config_detail {

enum class Check { kAny, kPositive, kNonNegative, kUnit, kBelowHalf, kOddPositive, kAtLeastOne, kFockDim };

using Field = std::variant<double RunConfig::*, std::optional<double> RunConfig::*, bool RunConfig::*,
                           int RunConfig::*, std::int64_t RunConfig::*, std::uint64_t RunConfig::*,
                           std::string RunConfig::*, std::vector<double> RunConfig::*,
                           std::vector<int> RunConfig::*>;

struct Key {
  const char* section;
  const char* name;
  Field field;
  Check check = Check::kAny;
  std::vector<std::string> choices = {};
};

inline const std::vector<Key>& keys() {
  using C = RunConfig;
  static const std::vector<Key> table = {
      {"gate", "t_g_us", &C::t_g_us, Check::kPositive},
      {"gate", "delta_THz", &C::delta_THz},
      {"gate", "power_mW", &C::power_mW, Check::kPositive},
      {"gate", "waist_um", &C::waist_um, Check::kPositive},
      {"gate", "nu_z_MHz", &C::nu_z_MHz, Check::kPositive},
      {"gate", "mode", &C::mode, Check::kAny, {"com", "stretch"}},
      {"gate", "beam_angle_deg", &C::beam_angle_deg, Check::kPositive},
      {"gate", "n_gates", &C::n_gates, Check::kOddPositive},
      {"gate", "echo_phase_rad", &C::echo_phase_rad},
      {"gate", "final_phase_rad", &C::final_phase_rad},
      {"gate", "dead_time_us", &C::dead_time_us, Check::kNonNegative},
      {"gate", "phase_reset", &C::phase_reset},
      {"gate", "coupling_scale", &C::coupling_scale, Check::kPositive},
      {"gate", "laser_phase_rad", &C::laser_phase_rad},
      {"atom", "fine_structure_THz", &C::fine_structure_THz, Check::kPositive},
      {"atom", "linewidth_MHz", &C::linewidth_MHz, Check::kPositive},
      {"atom", "wavelength_nm", &C::wavelength_nm, Check::kPositive},
      {"atom", "mass_amu", &C::mass_amu, Check::kPositive},
      {"atom", "lightshift_constant", &C::lightshift_constant, Check::kPositive},
      {"atom", "scattering_constant", &C::scattering_constant, Check::kNonNegative},
      {"atom", "raman_fraction", &C::raman_fraction, Check::kUnit},
      {"atom", "elastic_dephasing_factor", &C::elastic_dephasing_factor, Check::kNonNegative},
      {"noise", "heating_rate_per_s", &C::heating_rate_per_s, Check::kNonNegative},
      {"noise", "motional_dephasing_per_s", &C::motional_dephasing_per_s, Check::kNonNegative},
      {"noise", "nbar", &C::nbar, Check::kNonNegative},
      {"noise", "scattering", &C::scattering},
      {"noise", "intensity_error", &C::intensity_error},
      {"noise", "intensity_sigma", &C::intensity_sigma, Check::kNonNegative},
      {"noise", "counter_rotating", &C::counter_rotating},
      {"noise", "lamb_dicke_correction", &C::lamb_dicke_correction},
      {"noise", "field_50hz_amp_rad_per_s", &C::field_50hz_amp_rad_per_s, Check::kNonNegative},
      {"noise", "field_slow_sigma_rad_per_s", &C::field_slow_sigma_rad_per_s, Check::kNonNegative},
      {"noise", "field_sensitivity_rad_per_s_per_T", &C::field_sensitivity_rad_per_s_per_T},
      {"noise", "line_frequency_Hz", &C::line_frequency_Hz, Check::kPositive},
      {"noise", "white_dephasing_per_s", &C::white_dephasing_per_s, Check::kNonNegative},
      {"spam", "prep_error", &C::prep_error, Check::kUnit},
      {"spam", "rotation_amplitude_error", &C::rotation_amplitude_error},
      {"spam", "rotation_detuning_error", &C::rotation_detuning_error},
      {"spam", "readout_error", &C::readout_error, Check::kBelowHalf},
      {"run", "shots", &C::shots, Check::kAtLeastOne},
      {"run", "seed", &C::seed},
      {"run", "mode", &C::run_mode, Check::kAny, {"exact", "sampled"}},
      {"run", "fock_dim", &C::fock_dim, Check::kFockDim},
      {"run", "threads", &C::threads, Check::kNonNegative},
      {"run", "rel_tol", &C::rel_tol, Check::kPositive},
      {"run", "abs_tol", &C::abs_tol, Check::kPositive},
      {"run", "max_step_us", &C::max_step_us, Check::kNonNegative},
      {"run", "integrator", &C::integrator, Check::kAny, {"adaptive", "rk4"}},
      {"run", "output", &C::output},
      {"run", "tg_grid_us", &C::tg_grid_us, Check::kPositive},
      {"run", "n_gates_list", &C::n_gates_list, Check::kOddPositive},
      {"run", "parity_points", &C::parity_points, Check::kAtLeastOne},
  };
  return table;
}

inline constexpr const char* kSections[] = {"gate", "atom", "noise", "spam", "run"};

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(std::string_view text, int line, const std::string& key) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) fail(line, "invalid value '" + std::string(text) + "' for " + key);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) fail(line, key + " must be finite");
  }
  return v;
}

inline void check_value(double v, Check c, int line, const std::string& key) {
  switch (c) {
    case Check::kAny:
      return;
    case Check::kPositive:
      if (!(v > 0.0)) fail(line, key + " must be > 0");
      return;
    case Check::kNonNegative:
      if (!(v >= 0.0)) fail(line, key + " must be >= 0");
      return;
    case Check::kUnit:
      if (!(v >= 0.0 && v <= 1.0)) fail(line, key + " must lie in [0, 1]");
      return;
    case Check::kBelowHalf:
      if (!(v >= 0.0 && v < 0.5)) fail(line, key + " must lie in [0, 0.5)");
      return;
    case Check::kOddPositive:
      if (!(v >= 1.0) || std::fmod(v, 2.0) != 1.0) fail(line, key + " must be odd and positive");
      return;
    case Check::kAtLeastOne:
      if (!(v >= 1.0)) fail(line, key + " must be >= 1");
      return;
    case Check::kFockDim:
      if (!(v >= 2.0)) fail(line, key + " must be >= 2");
      return;
  }
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

inline void assign(RunConfig& c, const Key& k, std::string_view value, int line) {
  const std::string name = k.name;
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(c.*member)>;
        if constexpr (std::is_same_v<T, double>) {
          c.*member = parse_number<double>(value, line, name);
          check_value(c.*member, k.check, line, name);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
          c.*member = parse_number<double>(value, line, name);
          check_value(*(c.*member), k.check, line, name);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true") {
            c.*member = true;
          } else if (value == "false") {
            c.*member = false;
          } else {
            fail(line, name + " must be true or false");
          }
        } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::int64_t> ||
                             std::is_same_v<T, std::uint64_t>) {
          c.*member = parse_number<T>(value, line, name);
          check_value(static_cast<double>(c.*member), k.check, line, name);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!k.choices.empty()) {
            bool ok = false;
            for (const auto& ch : k.choices) ok = ok || ch == value;
            if (!ok) {
              std::string list;
              for (const auto& ch : k.choices) list += (list.empty() ? "" : "|") + ch;
              fail(line, name + " must be one of " + list);
            }
          }
          c.*member = std::string(value);
        } else {
          using E = typename T::value_type;
          T out;
          for (auto item : split_list(value)) {
            const E v = parse_number<E>(item, line, name);
            check_value(static_cast<double>(v), k.check, line, name);
            out.push_back(v);
          }
          for (std::size_t i = 1; i < out.size(); ++i) {
            if (!(out[i] > out[i - 1])) fail(line, name + " must be strictly increasing");
          }
          c.*member = std::move(out);
        }
      },
      k.field);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::optional<std::string> render_value(const RunConfig& c, const Key& k) {
  return std::visit(
      [&](auto member) -> std::optional<std::string> {
        using T = std::remove_cvref_t<decltype(c.*member)>;
        const T& v = c.*member;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
          if (!v) return std::nullopt;
          return format_double(*v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return std::string(v ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.empty()) return std::nullopt;
          return v;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string s;
          for (double x : v) s += (s.empty() ? "" : ", ") + format_double(x);
          return s;
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
          std::string s;
          for (int x : v) s += (s.empty() ? "" : ", ") + std::to_string(x);
          return s;
        } else {
          return std::to_string(v);
        }
      },
      k.field);
}

}  // namespace config_detail

/// Parses and validates a configuration text.
inline RunConfig parse_config(std::string_view text) {
  using namespace config_detail;
  RunConfig c;
  std::string section;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const char* s : kSections) known = known || section == s;
      if (!known) fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) fail(line_no, "key '" + key + "' outside of a section");
    const Key* match = nullptr;
    for (const auto& k : keys()) {
      if (section == k.section && key == k.name) match = &k;
    }
    if (match == nullptr) fail(line_no, "unknown key '" + key + "' in [" + section + "]");
    const std::string qualified = section + "." + key;
    if (seen.count(qualified)) {
      fail(line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(seen[qualified]) + ")");
    }
    seen[qualified] = line_no;
    if (value.empty()) fail(line_no, "missing value for '" + key + "'");
    assign(c, *match, value, line_no);
  }

  const bool has_tg = seen.count("gate.t_g_us") > 0;
  const bool has_delta = seen.count("gate.delta_THz") > 0;
  if (has_tg && has_delta) {
    fail(std::max(seen["gate.t_g_us"], seen["gate.delta_THz"]),
         "set exactly one of t_g_us and delta_THz, not both");
  }
  if (!has_tg && !has_delta) fail(line_no, "missing required key: one of [gate] t_g_us or delta_THz");
  if (c.integrator == "rk4" && !(c.max_step_us > 0.0)) {
    fail(seen.count("run.integrator") ? seen["run.integrator"] : line_no, "rk4 requires max_step_us > 0");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text form; parse_config(render_config(c)) == c.
inline std::string render_config(const RunConfig& c) {
  using namespace config_detail;
  std::string out;
  for (const char* s : kSections) {
    out += out.empty() ? "" : "\n";
    out += "[" + std::string(s) + "]\n";
    for (const auto& k : keys()) {
      if (std::string_view(k.section) != s) continue;
      if (auto v = render_value(c, k)) out += std::string(k.name) + " = " + *v + "\n";
    }
  }
  return out;
}

}  // namespace iongate

#endif  // IONGATE_CONFIG_HPP
