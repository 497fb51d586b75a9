// SPDX-License-Identifier: Apache-2.0
//
// riscc - RIS-assisted sensing/communication/computation network simulator
// Copyright (C) 2026 riscc contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "riscc/riscc.hpp"

namespace {

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"riscc - RIS-assisted ISCC network simulator and optimizer"};
  app.require_subcommand(1);

  // energy-sweep
  std::string sweep_users = "4,8,12,16";
  std::string sweep_elements = "0,20,40";
  int sweep_trials = 100;
  std::uint64_t sweep_seed = 7;
  std::string sweep_optimizer = "ao";
  std::string sweep_out;
  int sweep_jobs = default_jobs();
  auto* sweep = app.add_subcommand("energy-sweep",
                                   "Mean energy vs user count for several RIS sizes");
  sweep->add_option("--users", sweep_users, "Comma-separated user counts");
  sweep->add_option("--elements", sweep_elements, "Comma-separated RIS element counts");
  sweep->add_option("--trials", sweep_trials, "Trials per (users, elements) cell");
  sweep->add_option("--seed", sweep_seed, "Master seed");
  sweep->add_option("--optimizer", sweep_optimizer, "ao|cem")
      ->check(CLI::IsMember({"ao", "cem"}));
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--jobs", sweep_jobs, "Worker pool width");

  // beampattern
  std::string bp_config;
  std::string bp_angles = "-90:90:1";
  int bp_trials = 50;
  std::uint64_t bp_seed = 7;
  std::string bp_optimizer = "ao";
  std::string bp_out;
  auto* bp = app.add_subcommand("beampattern",
                                "Mean radar beampattern with and without the RIS");
  bp->add_option("--config", bp_config, "Scenario JSON file (defaults otherwise)");
  bp->add_option("--angles", bp_angles, "Angle grid lo:hi:step in degrees");
  bp->add_option("--trials", bp_trials, "Number of trials to average");
  bp->add_option("--seed", bp_seed, "Master seed");
  bp->add_option("--optimizer", bp_optimizer, "ao|cem")
      ->check(CLI::IsMember({"ao", "cem"}));
  bp->add_option("--out", bp_out, "Output directory")->required();

  // env-trace
  std::string tr_config;
  std::uint64_t tr_seed = 7;
  int tr_n = 100;
  std::string tr_out;
  auto* tr = app.add_subcommand("env-trace",
                                "Record (state, action, reward) conformance episodes");
  tr->add_option("--config", tr_config, "Scenario JSON file (defaults otherwise)");
  tr->add_option("--seed", tr_seed, "Master seed");
  tr->add_option("--n", tr_n, "Number of episodes");
  tr->add_option("--out", tr_out, "Output JSON-lines file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      riscc::SweepConfig cfg;
      cfg.users = riscc::parse_int_list(sweep_users);
      cfg.elements = riscc::parse_int_list(sweep_elements);
      cfg.trials = sweep_trials;
      cfg.seed = sweep_seed;
      cfg.optimizer = sweep_optimizer;
      cfg.jobs = sweep_jobs;
      const auto records = riscc::run_energy_sweep(cfg, sweep_out);
      double wall = 0.0;
      for (const auto& r : records) wall += r.wall_time_s;
      std::cerr << "energy-sweep: " << records.size() << " trials -> " << sweep_out
                << " (cpu time " << riscc::format_double(wall) << " s)\n";
    } else if (bp->parsed()) {
      riscc::BeampatternConfig cfg;
      if (!bp_config.empty()) cfg.base = riscc::load_scenario(bp_config);
      cfg.angles_deg = riscc::parse_angle_grid(bp_angles);
      cfg.trials = bp_trials;
      cfg.seed = bp_seed;
      cfg.optimizer = bp_optimizer;
      const auto res = riscc::run_beampattern(cfg, bp_out);
      std::cerr << "beampattern: " << res.angles_deg.size() << " angles x " << bp_trials
                << " trials -> " << bp_out << "\n";
    } else if (tr->parsed()) {
      std::optional<riscc::Scenario> base;
      if (!tr_config.empty()) base = riscc::load_scenario(tr_config);
      const auto lines = riscc::run_env_trace(base, tr_seed, tr_n, tr_out);
      std::cerr << "env-trace: " << lines.size() << " episodes -> " << tr_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
