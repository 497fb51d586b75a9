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

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "riscc/optimize.hpp"

namespace riscc {

// Per-trial seeds are derived by hashing, so sweep cells are independent
// and individually re-runnable.
inline std::uint64_t derive_trial_seed(std::uint64_t master, int k_users, int m_ris,
                                       int trial) {
  return derive_seed({master, static_cast<std::uint64_t>(k_users),
                      static_cast<std::uint64_t>(m_ris),
                      static_cast<std::uint64_t>(trial)});
}

struct TrialRecord {
  std::uint64_t master_seed = 0;
  int trial_index = 0;
  std::uint64_t scenario_digest = 0;
  int k_users = 0;
  int m_ris = 0;
  std::string optimizer;
  double total_energy_j = 0.0;
  int n_violations = 0;
  double mean_beampattern_w = 0.0;
  double wall_time_s = 0.0;  // in-memory only; kept out of the CSV so reruns are byte-identical
};

namespace detail {

template <typename Fn>
void parallel_for_jobs(int n_jobs, int width, Fn&& fn) {
  width = std::max(1, std::min(width, n_jobs));
  if (width == 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(width);
  for (int t = 0; t < width; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite value about to be persisted: ") + what);
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace detail

inline std::pair<ControlVector, EvaluationReport> run_optimizer(const Scenario& s,
                                                                const ChannelSet& c,
                                                                const std::string& tag,
                                                                std::uint64_t seed) {
  if (tag == "ao") {
    ControlVector ctrl = plan_offloading(s, c, zero_phases(s.m_ris));
    EvaluationReport rep = evaluate(s, c, ctrl);
    return {std::move(ctrl), std::move(rep)};
  }
  if (tag == "cem") {
    CemConfig cfg;
    cfg.seed = seed;
    CemResult r = cem_optimize(s, c, cfg);
    return {std::move(r.control), std::move(r.report)};
  }
  throw std::invalid_argument("unknown optimizer tag: " + tag);
}

inline TrialRecord run_single_trial(std::uint64_t master, int k_users, int m_ris,
                                    int trial, const std::string& optimizer) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = derive_trial_seed(master, k_users, m_ris, trial);
  const Scenario s = build_default_scenario(k_users, m_ris, seed);
  const ChannelSet c = sample_channels(s, seed);
  const auto [ctrl, rep] = run_optimizer(s, c, optimizer, seed);

  TrialRecord r;
  r.master_seed = master;
  r.trial_index = trial;
  r.scenario_digest = scenario_digest(s);
  r.k_users = k_users;
  r.m_ris = m_ris;
  r.optimizer = optimizer;
  r.total_energy_j = rep.total_energy_j;
  r.n_violations = rep.n_violations;
  r.mean_beampattern_w = rep.beampattern_w.mean();
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct SummaryRow {
  int k_users = 0;
  int m_ris = 0;
  std::string optimizer;
  int n_trials = 0;
  double mean_total_energy_j = 0.0;
  double stderr_total_energy_j = 0.0;
};

// Mean and standard error per (K, M) cell, in row order.
inline std::vector<SummaryRow> summarize_trials(const std::vector<TrialRecord>& records) {
  std::vector<SummaryRow> rows;
  for (const TrialRecord& r : records) {
    if (rows.empty() || rows.back().k_users != r.k_users || rows.back().m_ris != r.m_ris) {
      SummaryRow row;
      row.k_users = r.k_users;
      row.m_ris = r.m_ris;
      row.optimizer = r.optimizer;
      rows.push_back(row);
    }
  }
  for (SummaryRow& row : rows) {
    double sum = 0.0;
    int n = 0;
    for (const TrialRecord& r : records)
      if (r.k_users == row.k_users && r.m_ris == row.m_ris) {
        sum += r.total_energy_j;
        ++n;
      }
    const double mean = sum / n;
    double ss = 0.0;
    for (const TrialRecord& r : records)
      if (r.k_users == row.k_users && r.m_ris == row.m_ris)
        ss += (r.total_energy_j - mean) * (r.total_energy_j - mean);
    row.n_trials = n;
    row.mean_total_energy_j = mean;
    row.stderr_total_energy_j = n > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(double(n)) : 0.0;
  }
  return rows;
}

struct SweepConfig {
  std::vector<int> users;
  std::vector<int> elements;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string optimizer = "ao";
  int jobs = 1;
};

// Runs the K x M x trial grid on a worker pool. Results are collected and
// emitted in (K, M, trial) order, so the CSVs do not depend on scheduling.
inline std::vector<TrialRecord> run_energy_sweep(const SweepConfig& cfg,
                                                 const std::filesystem::path& out_dir) {
  if (cfg.trials < 1) throw std::invalid_argument("energy sweep: trials must be >= 1");
  if (cfg.users.empty() || cfg.elements.empty())
    throw std::invalid_argument("energy sweep: users and elements must be non-empty");

  struct Job {
    int k, m, trial;
  };
  std::vector<Job> jobs;
  for (int k : cfg.users)
    for (int m : cfg.elements)
      for (int t = 0; t < cfg.trials; ++t) jobs.push_back({k, m, t});

  std::vector<TrialRecord> records(jobs.size());
  detail::parallel_for_jobs(static_cast<int>(jobs.size()), cfg.jobs, [&](int i) {
    records[i] =
        run_single_trial(cfg.seed, jobs[i].k, jobs[i].m, jobs[i].trial, cfg.optimizer);
  });

  std::filesystem::create_directories(out_dir);
  {
    auto out = detail::open_out(out_dir / "trials.csv");
    out << "master_seed,trial_index,scenario_digest,k_users,m_ris,optimizer,"
           "total_energy_j,n_violations,mean_beampattern_w\n";
    for (const TrialRecord& r : records) {
      detail::require_finite(r.total_energy_j, "total_energy_j");
      detail::require_finite(r.mean_beampattern_w, "mean_beampattern_w");
      out << r.master_seed << ',' << r.trial_index << ',' << r.scenario_digest << ','
          << r.k_users << ',' << r.m_ris << ',' << r.optimizer << ','
          << format_double(r.total_energy_j) << ',' << r.n_violations << ','
          << format_double(r.mean_beampattern_w) << '\n';
    }
  }
  {
    auto out = detail::open_out(out_dir / "summary.csv");
    out << "k_users,m_ris,optimizer,n_trials,mean_total_energy_j,stderr_total_energy_j\n";
    for (const SummaryRow& row : summarize_trials(records)) {
      detail::require_finite(row.mean_total_energy_j, "mean_total_energy_j");
      detail::require_finite(row.stderr_total_energy_j, "stderr_total_energy_j");
      out << row.k_users << ',' << row.m_ris << ',' << row.optimizer << ','
          << row.n_trials << ',' << format_double(row.mean_total_energy_j) << ','
          << format_double(row.stderr_total_energy_j) << '\n';
    }
  }
  return records;
}

struct BeampatternConfig {
  std::optional<Scenario> base;  // fixed world; absent draws defaults per trial
  std::vector<double> angles_deg;
  int trials = 50;
  std::uint64_t seed = 0;
  std::string optimizer = "ao";
  int k_users = 16;  // used only when base is absent
  int m_ris = 40;
};

struct BeampatternResult {
  std::vector<double> angles_deg;
  std::vector<double> mean_no_ris_w;  // per angle
  std::vector<double> mean_ris_w;
  // per trial, user-mean gain at the sensing angle (feeds paired comparisons)
  std::vector<double> trial_sense_gain_no_ris;
  std::vector<double> trial_sense_gain_ris;
};

// Mean per-user beampattern across trials for the RIS and no-RIS
// configurations. The no-RIS baseline is the identical pipeline with
// m_ris = 0.
inline BeampatternResult run_beampattern(const BeampatternConfig& cfg,
                                         const std::filesystem::path& out_dir) {
  if (cfg.angles_deg.empty())
    throw std::invalid_argument("beampattern: angle grid must be non-empty");
  if (cfg.trials < 1) throw std::invalid_argument("beampattern: trials must be >= 1");

  BeampatternResult res;
  res.angles_deg = cfg.angles_deg;
  res.mean_no_ris_w.assign(cfg.angles_deg.size(), 0.0);
  res.mean_ris_w.assign(cfg.angles_deg.size(), 0.0);

  std::optional<Scenario> written_base;
  for (int variant = 0; variant < 2; ++variant) {  // 0 = no-RIS, 1 = RIS
    const bool with_ris = variant == 1;
    auto& curve = with_ris ? res.mean_ris_w : res.mean_no_ris_w;
    auto& sense_gain = with_ris ? res.trial_sense_gain_ris : res.trial_sense_gain_no_ris;
    const int m_cfg = cfg.base ? cfg.base->m_ris : cfg.m_ris;
    const int m_eff = with_ris ? m_cfg : 0;
    const int k_eff = cfg.base ? cfg.base->k_users() : cfg.k_users;
    long samples = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      const std::uint64_t trial_seed = derive_trial_seed(cfg.seed, k_eff, m_eff, t);
      Scenario s;
      if (cfg.base) {
        s = *cfg.base;
        s.m_ris = m_eff;
      } else {
        s = build_default_scenario(k_eff, m_eff, trial_seed);
      }
      if (with_ris && !written_base) written_base = s;
      const ChannelSet c = sample_channels(s, trial_seed);
      const auto [ctrl, rep] = run_optimizer(s, c, cfg.optimizer, trial_seed);
      double at_sense = 0.0;
      for (int k = 0; k < s.k_users(); ++k) {
        const Beamformer bf = detail::safe_beamformer(effective_channel(c, ctrl.phases, k),
                                                      s, ctrl.alpha_sense(k));
        for (std::size_t a = 0; a < cfg.angles_deg.size(); ++a)
          curve[a] += beampattern(bf, s.p_max_w, cfg.angles_deg[a] * kPi / 180.0);
        at_sense += beampattern(bf, s.p_max_w, s.sense_angle_rad);
        ++samples;
      }
      sense_gain.push_back(at_sense / s.k_users());
    }
    for (double& v : curve) v /= static_cast<double>(samples);
  }

  std::filesystem::create_directories(out_dir);
  if (cfg.base)
    save_scenario(*cfg.base, (out_dir / "scenario.json").string());
  else if (written_base)
    save_scenario(*written_base, (out_dir / "scenario.json").string());

  const auto db_rel = [](double v, double peak) {
    // clamped so deep nulls never persist -inf
    return 10.0 * std::log10(std::max(v / peak, 1e-30));
  };
  const double peak_no = *std::max_element(res.mean_no_ris_w.begin(), res.mean_no_ris_w.end());
  const double peak_ris = *std::max_element(res.mean_ris_w.begin(), res.mean_ris_w.end());
  auto out = detail::open_out(out_dir / "beampattern.csv");
  out << "angle_deg,mean_gain_no_ris_w,mean_gain_ris_w,mean_gain_no_ris_db_rel,"
         "mean_gain_ris_db_rel\n";
  for (std::size_t a = 0; a < res.angles_deg.size(); ++a) {
    detail::require_finite(res.mean_no_ris_w[a], "mean_gain_no_ris_w");
    detail::require_finite(res.mean_ris_w[a], "mean_gain_ris_w");
    out << format_double(res.angles_deg[a]) << ',' << format_double(res.mean_no_ris_w[a])
        << ',' << format_double(res.mean_ris_w[a]) << ','
        << format_double(db_rel(res.mean_no_ris_w[a], peak_no)) << ','
        << format_double(db_rel(res.mean_ris_w[a], peak_ris)) << '\n';
  }
  return res;
}

// JSON-lines (state, action, reward) conformance fixture for external
// agents; replaying the recorded episode seeds and actions reproduces the
// rewards exactly.
inline std::vector<nlohmann::json> run_env_trace(const std::optional<Scenario>& base,
                                                 std::uint64_t seed, int n_actions,
                                                 const std::filesystem::path& out_file) {
  if (n_actions < 1) throw std::invalid_argument("env trace: n_actions must be >= 1");
  const Scenario s = base ? *base : build_default_scenario(16, 40, seed);
  Environment env(s);

  std::vector<nlohmann::json> lines;
  lines.reserve(n_actions);
  for (int i = 0; i < n_actions; ++i) {
    const std::uint64_t ep_seed = derive_seed({seed, static_cast<std::uint64_t>(i), 0xE9ull});
    const MdpState state = env.reset(ep_seed);
    Rng rng(derive_seed({ep_seed, 0xAC710Bull}));
    const MdpAction action = random_action(env.scenario(), rng);
    const auto [reward, rep] = env.step(action);
    detail::require_finite(reward, "reward");
    nlohmann::json line;
    line["episode"] = i;
    line["episode_seed"] = ep_seed;
    line["state"] = std::vector<double>(state.features.data(),
                                        state.features.data() + state.features.size());
    line["action"] = std::vector<double>(action.raw.data(),
                                         action.raw.data() + action.raw.size());
    line["reward"] = reward;
    lines.push_back(std::move(line));
  }

  if (out_file.has_parent_path()) std::filesystem::create_directories(out_file.parent_path());
  auto out = detail::open_out(out_file);
  for (const nlohmann::json& line : lines) out << line.dump() << '\n';
  return lines;
}

// ---------------------------------------------------------------------------
// CLI argument helpers.
// ---------------------------------------------------------------------------

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::invalid_argument("empty integer list: " + text);
  return out;
}

// "lo:hi:step" inclusive arithmetic grid, e.g. "-90:90:1".
inline std::vector<double> parse_angle_grid(const std::string& text) {
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
    throw std::invalid_argument("angle grid must be lo:hi:step, got " + text);
  const double lo = std::stod(a), hi = std::stod(b), step = std::stod(c);
  if (step <= 0.0 || hi < lo) throw std::invalid_argument("bad angle grid: " + text);
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + 1e-9) break;
    grid.push_back(v);
  }
  return grid;
}

}  // namespace riscc
