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

// Command-line front end.
//
//   iongate <simulate|budget|scan-tg|scan-n|parity-scan|calibrate> -c <config>
//           [-o <path>] [--seed <u64>] [--shots <n>] [--exact] [--fock-dim <n>]
//
// Exit codes: 0 success, 1 usage error, 2 configuration error, 3 run failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "iongate/config.hpp"
#include "iongate/errors.hpp"
#include "iongate/experiment.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct CommonFlags {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> shots;
  bool exact = false;
  std::optional<int> fock_dim;
  std::optional<int> threads;
};

struct CalibrateFlags {
  double anchor_delta_THz = -3.0;
  double anchor_tg_us = 100.0;
  double scattering_target = 4e-4;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "Configuration file")->required();
  cmd->add_option("-o,--output", f.output, "Output path (default: [run] output, else stdout)");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--shots", f.shots, "Shots per point")->check(CLI::PositiveNumber);
  cmd->add_flag("--exact", f.exact, "Exact outcome probabilities instead of sampling");
  cmd->add_option("--fock-dim", f.fock_dim, "Oscillator truncation")->check(CLI::Range(2, 400));
  cmd->add_option("--threads", f.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

iongate::RunConfig load(const CommonFlags& f) {
  iongate::RunConfig c = iongate::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.shots) c.shots = *f.shots;
  if (f.exact) c.run_mode = "exact";
  if (f.fock_dim) c.fock_dim = *f.fock_dim;
  if (f.threads) c.threads = *f.threads;
  if (!f.output.empty()) c.output = f.output;
  c.model().validate();
  return c;
}

template <typename Result>
void write(const Result& r, const std::string& path) {
  if (path.empty() || path == "-") {
    iongate::emit_csv(r, std::cout);
    std::cout.flush();
  } else {
    iongate::emit_csv(r, path);
  }
}

std::string calibrated_fragment(const iongate::RunConfig& c, const CalibrateFlags& cal) {
  using namespace iongate;
  iongate::RunConfig anchored = c;
  anchored.t_g_us.reset();
  anchored.delta_THz = cal.anchor_delta_THz;
  ModelConfig m = anchored.model();
  const double kg = calibrate_lightshift_constant(m.delta_raman.value(), cal.anchor_tg_us * 1e-6, m.beams, m.atom);
  m.atom.lightshift_constant = kg;
  const double ks = calibrate_scattering_constant(m, cal.scattering_target, anchored.run_options());
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# Delta/2pi = %.17g THz -> t_g = %.17g us; scattering-only Bell error %.17g\n"
                "[atom]\nlightshift_constant = %.17g\nscattering_constant = %.17g\n",
                cal.anchor_delta_THz, cal.anchor_tg_us, cal.scattering_target, kg, ks);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit light-shift gate simulator and error-budget engine", "iongate"};
  app.require_subcommand(1);
  CommonFlags flags;
  CalibrateFlags cal;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the Bell sequence and report its fidelity");
  CLI::App* budget = app.add_subcommand("budget", "Per-channel error budget of one gate");
  CLI::App* scan_tg = app.add_subcommand("scan-tg", "Bell error against gate time");
  CLI::App* scan_n = app.add_subcommand("scan-n", "Bell error against number of gates");
  CLI::App* parity = app.add_subcommand("parity-scan", "Parity oscillation of the output state");
  CLI::App* calibrate = app.add_subcommand("calibrate", "Solve the light-shift and scattering constants");
  for (CLI::App* cmd : {simulate, budget, scan_tg, scan_n, parity, calibrate}) add_common(cmd, flags);
  calibrate->add_option("--anchor-delta-THz", cal.anchor_delta_THz, "Anchor Raman detuning / 2pi");
  calibrate->add_option("--anchor-tg-us", cal.anchor_tg_us, "Gate time at the anchor detuning")
      ->check(CLI::PositiveNumber);
  calibrate->add_option("--scattering-target", cal.scattering_target, "Scattering-only Bell error at the anchor")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\nerror: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const iongate::RunConfig c = load(flags);
    const iongate::ModelConfig m = c.model();
    const iongate::RunOptions run = c.run_options();
    if (simulate->parsed()) {
      write(iongate::simulate(m, run), c.output);
    } else if (budget->parsed()) {
      write(iongate::error_budget(m, run), c.output);
    } else if (scan_tg->parsed()) {
      const iongate::TgScan s = iongate::scan_gate_time(m, c.tg_grid(), run);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
      write(s, c.output);
    } else if (scan_n->parsed()) {
      write(iongate::scan_n_gates(m, c.n_gates_list, run), c.output);
    } else if (parity->parsed()) {
      write(iongate::parity_scan_experiment(m, run, c.parity_points), c.output);
    } else if (calibrate->parsed()) {
      const std::string text = calibrated_fragment(c, cal);
      if (c.output.empty() || c.output == "-") {
        std::cout << text;
      } else {
        iongate::write_file(c.output, [&](std::ostream& os) { os << text; });
      }
    }
  } catch (const iongate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRun;
  }
  return 0;
}
