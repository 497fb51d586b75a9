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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "riscc/common.hpp"

namespace riscc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// One computation task: payload size in bits and CPU cycles per bit.
struct Task {
  double bits = 0.0;
  double cycles_per_bit = 0.0;
  double cycles() const { return bits * cycles_per_bit; }
};

// Immutable world description: geometry, array sizes, radio and compute
// constants, per-user tasks. validate() enforces the construction
// invariants; everything downstream assumes they hold.
struct Scenario {
  Vec2 bs_position;
  Vec2 ris_position;
  std::vector<Vec2> user_positions;
  int n_bs = 0;
  int n_ue = 0;
  int m_ris = 0;
  double bandwidth_hz = 0.0;
  double noise_power_dbm = 0.0;  // total noise over the full bandwidth
  double p_max_w = 0.0;
  double alpha_direct = 0.0;
  double alpha_reflect = 0.0;
  double pl0_db = 0.0;  // reference path loss at 1 m
  double rician_k_db = 0.0;
  double f_local_hz = 0.0;
  double f_edge_hz = 0.0;
  double kappa = 0.0;  // effective switched-capacitance coefficient
  double t_max_s = 0.0;
  double sense_angle_rad = 0.0;
  double sense_floor_frac = 0.0;
  std::vector<Task> tasks;

  int k_users() const { return static_cast<int>(user_positions.size()); }

  void validate() const {
    if (user_positions.empty())
      throw std::invalid_argument("scenario: at least one user required");
    if (tasks.size() != user_positions.size())
      throw std::invalid_argument("scenario: exactly one task per user required");
    if (n_bs < 1 || n_ue < 1)
      throw std::invalid_argument("scenario: antenna counts must be >= 1");
    if (m_ris < 0) throw std::invalid_argument("scenario: m_ris must be >= 0");
    if (bandwidth_hz <= 0.0 || p_max_w <= 0.0 || t_max_s <= 0.0 ||
        f_local_hz <= 0.0 || f_edge_hz <= 0.0)
      throw std::invalid_argument(
          "scenario: bandwidth, power budget, latency bound and CPU rates must be positive");
    if (kappa < 0.0) throw std::invalid_argument("scenario: kappa must be >= 0");
    if (sense_floor_frac < 0.0 || sense_floor_frac > 1.0)
      throw std::invalid_argument("scenario: sense_floor_frac outside [0, 1]");
    for (const Task& t : tasks) {
      if (t.bits <= 0.0 || t.cycles_per_bit <= 0.0)
        throw std::invalid_argument("scenario: task sizes must be positive");
      // local-only execution must always be a feasible fallback
      if (t.cycles() / f_local_hz > t_max_s)
        throw std::invalid_argument(
            "scenario: task cannot finish locally within t_max_s");
    }
  }
};

// Case-study defaults; user positions and tasks are drawn from the seed,
// everything else is fixed. Pure: same (k_users, m_ris, seed) gives the
// identical value.
inline Scenario build_default_scenario(int k_users, int m_ris, std::uint64_t seed) {
  if (k_users < 1)
    throw std::invalid_argument("build_default_scenario: k_users must be >= 1");
  if (m_ris < 0)
    throw std::invalid_argument("build_default_scenario: m_ris must be >= 0");

  Scenario s;
  s.bs_position = {-200.0, 0.0};
  s.ris_position = {0.0, 0.0};
  s.n_bs = 16;
  s.n_ue = 16;
  s.m_ris = m_ris;
  s.bandwidth_hz = 2.0e6;
  s.noise_power_dbm = -115.0;
  s.p_max_w = 0.5;
  s.alpha_direct = 3.6;
  s.alpha_reflect = 2.2;
  s.pl0_db = -30.0;
  s.rician_k_db = 10.0;
  s.f_local_hz = 1.0e9;
  s.f_edge_hz = 1.0e10;
  s.kappa = 1.0e-28;
  s.t_max_s = 1.0;
  s.sense_angle_rad = 0.0;
  s.sense_floor_frac = 0.5;

  Rng rng(derive_seed({seed, 0x5CE9A7ull}));
  s.user_positions.reserve(k_users);
  for (int k = 0; k < k_users; ++k) {
    // uniform over a 10 m disk centered on (0, 30)
    const double r = 10.0 * std::sqrt(rng.uniform01());
    const double phi = kTwoPi * rng.uniform01();
    s.user_positions.push_back({r * std::cos(phi), 30.0 + r * std::sin(phi)});
  }
  s.tasks.reserve(k_users);
  for (int k = 0; k < k_users; ++k) {
    Task t;
    t.bits = rng.uniform(4.0e5, 5.0e5);
    t.cycles_per_bit = static_cast<double>(rng.uniform_int(800, 1000));
    s.tasks.push_back(t);
  }
  s.validate();
  return s;
}

// Stable content hash over all fields; equal scenarios hash equal.
inline std::uint64_t scenario_digest(const Scenario& s) {
  DigestBuilder d;
  d.f64(s.bs_position.x);
  d.f64(s.bs_position.y);
  d.f64(s.ris_position.x);
  d.f64(s.ris_position.y);
  d.i64(s.k_users());
  for (const Vec2& u : s.user_positions) {
    d.f64(u.x);
    d.f64(u.y);
  }
  d.i64(s.n_bs);
  d.i64(s.n_ue);
  d.i64(s.m_ris);
  d.f64(s.bandwidth_hz);
  d.f64(s.noise_power_dbm);
  d.f64(s.p_max_w);
  d.f64(s.alpha_direct);
  d.f64(s.alpha_reflect);
  d.f64(s.pl0_db);
  d.f64(s.rician_k_db);
  d.f64(s.f_local_hz);
  d.f64(s.f_edge_hz);
  d.f64(s.kappa);
  d.f64(s.t_max_s);
  d.f64(s.sense_angle_rad);
  d.f64(s.sense_floor_frac);
  for (const Task& t : s.tasks) {
    d.f64(t.bits);
    d.f64(t.cycles_per_bit);
  }
  return d.value();
}

inline void to_json(nlohmann::json& j, const Vec2& v) { j = {v.x, v.y}; }
inline void from_json(const nlohmann::json& j, Vec2& v) {
  v.x = j.at(0).get<double>();
  v.y = j.at(1).get<double>();
}

inline void to_json(nlohmann::json& j, const Task& t) {
  j = {{"bits", t.bits}, {"cycles_per_bit", t.cycles_per_bit}};
}
inline void from_json(const nlohmann::json& j, Task& t) {
  j.at("bits").get_to(t.bits);
  j.at("cycles_per_bit").get_to(t.cycles_per_bit);
}

inline void to_json(nlohmann::json& j, const Scenario& s) {
  j = nlohmann::json{{"bs_position", s.bs_position},
                     {"ris_position", s.ris_position},
                     {"user_positions", s.user_positions},
                     {"n_bs", s.n_bs},
                     {"n_ue", s.n_ue},
                     {"m_ris", s.m_ris},
                     {"bandwidth_hz", s.bandwidth_hz},
                     {"noise_power_dbm", s.noise_power_dbm},
                     {"p_max_w", s.p_max_w},
                     {"alpha_direct", s.alpha_direct},
                     {"alpha_reflect", s.alpha_reflect},
                     {"pl0_db", s.pl0_db},
                     {"rician_k_db", s.rician_k_db},
                     {"f_local_hz", s.f_local_hz},
                     {"f_edge_hz", s.f_edge_hz},
                     {"kappa", s.kappa},
                     {"t_max_s", s.t_max_s},
                     {"sense_angle_rad", s.sense_angle_rad},
                     {"sense_floor_frac", s.sense_floor_frac},
                     {"tasks", s.tasks}};
}

inline void from_json(const nlohmann::json& j, Scenario& s) {
  j.at("bs_position").get_to(s.bs_position);
  j.at("ris_position").get_to(s.ris_position);
  j.at("user_positions").get_to(s.user_positions);
  j.at("n_bs").get_to(s.n_bs);
  j.at("n_ue").get_to(s.n_ue);
  j.at("m_ris").get_to(s.m_ris);
  j.at("bandwidth_hz").get_to(s.bandwidth_hz);
  j.at("noise_power_dbm").get_to(s.noise_power_dbm);
  j.at("p_max_w").get_to(s.p_max_w);
  j.at("alpha_direct").get_to(s.alpha_direct);
  j.at("alpha_reflect").get_to(s.alpha_reflect);
  j.at("pl0_db").get_to(s.pl0_db);
  j.at("rician_k_db").get_to(s.rician_k_db);
  j.at("f_local_hz").get_to(s.f_local_hz);
  j.at("f_edge_hz").get_to(s.f_edge_hz);
  j.at("kappa").get_to(s.kappa);
  j.at("t_max_s").get_to(s.t_max_s);
  j.at("sense_angle_rad").get_to(s.sense_angle_rad);
  j.at("sense_floor_frac").get_to(s.sense_floor_frac);
  j.at("tasks").get_to(s.tasks);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  nlohmann::json j;
  in >> j;
  Scenario s = j.get<Scenario>();
  s.validate();
  return s;
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << nlohmann::json(s).dump(2) << '\n';
}

}  // namespace riscc
