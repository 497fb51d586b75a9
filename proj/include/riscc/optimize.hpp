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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riscc/mec.hpp"

namespace riscc {

inline constexpr int kPhaseGridSize = 64;  // ~6-bit RIS quantization

// Sum over users of ||H_k(theta) w_k||^2, the passive-beamforming objective.
inline double channel_objective(const ChannelSet& c, const PhaseConfig& phases,
                                const std::vector<Beamformer>& bfs) {
  double j = 0.0;
  for (int k = 0; k < c.k_users(); ++k)
    j += (effective_channel(c, phases, k) * bfs[k].w).squaredNorm();
  return j;
}

// One-element-at-a-time maximization of the channel objective over a
// 64-point phase grid, keeping the current phase when no grid point beats
// it. Each accepted update is therefore non-decreasing; a decrease means
// the incremental bookkeeping broke and throws. Deterministic.
inline PhaseConfig phase_coordinate_ascent(const Scenario& s, const ChannelSet& c,
                                           const std::vector<Beamformer>& bfs,
                                           const PhaseConfig& init, int passes) {
  if (s.m_ris < 1)
    throw std::invalid_argument("phase_coordinate_ascent: scenario has no RIS elements");
  if (init.size() != s.m_ris)
    throw std::invalid_argument("phase_coordinate_ascent: init length != m_ris");
  if (static_cast<int>(bfs.size()) != s.k_users() || c.k_users() != s.k_users())
    throw std::invalid_argument("phase_coordinate_ascent: dimension mismatch");
  if (passes < 1) throw std::invalid_argument("phase_coordinate_ascent: passes must be >= 1");

  const int K = s.k_users();
  const int M = s.m_ris;
  PhaseConfig phases;
  phases.theta.resize(M);
  for (int m = 0; m < M; ++m) phases.theta(m) = wrap_two_pi(init.theta(m));

  // v_k = H_k(theta) w_k, updated in place per element change;
  // q_k = g_ue_ris[k] w_k gives each element's input weight.
  std::vector<Eigen::VectorXcd> v(K), q(K);
  for (int k = 0; k < K; ++k) {
    v[k] = effective_channel(c, phases, k) * bfs[k].w;
    q[k] = c.g_ue_ris[k] * bfs[k].w;
  }

  double j_prev = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXcd> d(K), b(K);
  for (int pass = 0; pass < passes; ++pass) {
    for (int m = 0; m < M; ++m) {
      // J(theta_m) = base + 2 Re(e^{j theta_m} cross)
      double base = 0.0;
      std::complex<double> cross{0.0, 0.0};
      const std::complex<double> cur = std::polar(1.0, phases.theta(m));
      for (int k = 0; k < K; ++k) {
        d[k] = c.g_ris_bs.col(m) * q[k](m);
        b[k] = v[k] - cur * d[k];
        base += b[k].squaredNorm() + d[k].squaredNorm();
        cross += b[k].dot(d[k]);
      }
      double best_theta = phases.theta(m);
      double best_val = (cur * cross).real();
      for (int g = 0; g < kPhaseGridSize; ++g) {
        const double theta = kTwoPi * g / kPhaseGridSize;
        const double val = (std::polar(1.0, theta) * cross).real();
        if (val > best_val) {
          best_val = val;
          best_theta = theta;
        }
      }
      phases.theta(m) = best_theta;
      const std::complex<double> upd = std::polar(1.0, best_theta);
      for (int k = 0; k < K; ++k) v[k] = b[k] + upd * d[k];
      const double j_now = base + 2.0 * best_val;
      if (j_now < j_prev - 1e-9 * std::max(1.0, std::abs(j_prev)))
        throw std::logic_error("phase_coordinate_ascent: objective decreased");
      j_prev = j_now;
    }
  }
  return phases;
}

namespace detail {

inline double offload_energy_from_gain(const Task& t, const Scenario& s, double gain,
                                       double p_w, int n_offloaders) {
  return p_w * t.bits / rate_from_gain(s, gain, p_w, n_offloaders);
}

}  // namespace detail

// Joint decision procedure: alternate blend-weight selection with phase
// coordinate ascent, refresh the blends against the settled phases, then
// grow the offload set greedily by the largest per-user energy saving
// (candidate cost evaluated at the grown offloader count, ties to the
// lower index). Members that the final count pushes over the latency
// bound are forced back to local execution. Deterministic.
inline ControlVector plan_offloading(const Scenario& s, const ChannelSet& c,
                                     const PhaseConfig& init, int outer_iterations = 3) {
  const int K = s.k_users();
  if (c.k_users() != K || init.size() != s.m_ris || c.m_ris() != s.m_ris)
    throw std::invalid_argument("plan_offloading: dimension mismatch");

  PhaseConfig phases;
  phases.theta.resize(s.m_ris);
  for (int m = 0; m < s.m_ris; ++m) phases.theta(m) = wrap_two_pi(init.theta(m));

  std::vector<double> alphas(K, 1.0);
  std::vector<Beamformer> bfs(K);
  const auto refresh_blends = [&]() {
    for (int k = 0; k < K; ++k) {
      const Eigen::MatrixXcd h = effective_channel(c, phases, k);
      alphas[k] = min_alpha_for_floor(h, s);
      bfs[k] = detail::safe_beamformer(h, s, alphas[k]);
    }
  };

  if (s.m_ris > 0) {
    for (int it = 0; it < outer_iterations; ++it) {
      refresh_blends();
      phases = phase_coordinate_ascent(s, c, bfs, phases, 1);
    }
  }
  refresh_blends();  // blends must match the phases actually returned

  std::vector<double> gain(K), e_local(K);
  for (int k = 0; k < K; ++k) {
    gain[k] = detail::beamformed_gain(effective_channel(c, phases, k), bfs[k]);
    e_local[k] = local_cost(s.tasks[k], s).energy_j;
  }

  std::vector<bool> offload(K, false);
  int n_off = 0;
  while (true) {
    int best_k = -1;
    double best_saving = 0.0;
    for (int k = 0; k < K; ++k) {
      if (offload[k]) continue;
      const auto p = detail::min_power_from_gain(s.tasks[k], s, gain[k], n_off + 1);
      if (!p) continue;
      const double saving =
          e_local[k] - detail::offload_energy_from_gain(s.tasks[k], s, gain[k], *p, n_off + 1);
      if (saving > best_saving) {
        best_saving = saving;
        best_k = k;
      }
    }
    if (best_k < 0) break;
    offload[best_k] = true;
    ++n_off;
  }

  // the final count may exceed what earlier members were admitted under
  while (true) {
    bool dropped = false;
    for (int k = 0; k < K; ++k) {
      if (offload[k] && !detail::min_power_from_gain(s.tasks[k], s, gain[k], n_off)) {
        offload[k] = false;
        --n_off;
        dropped = true;
      }
    }
    if (!dropped) break;
  }

  ControlVector ctrl;
  ctrl.phases = phases;
  ctrl.offload = offload;
  ctrl.alpha_sense = Eigen::Map<const Eigen::VectorXd>(alphas.data(), K);
  ctrl.power_w.setConstant(K, s.p_max_w);
  for (int k = 0; k < K; ++k)
    if (offload[k])
      ctrl.power_w(k) = *detail::min_power_from_gain(s.tasks[k], s, gain[k], n_off);
  return ctrl;
}

// ---------------------------------------------------------------------------
// Single-step decision environment (contextual bandit framing of the MDP).
// ---------------------------------------------------------------------------

inline int state_dim(int k_users) { return 6 * k_users; }
inline int action_dim(int k_users, int m_ris) { return m_ris + 3 * k_users; }

// Flat observation, fixed layout for given (K, M):
// [bits | cycles_per_bit | ||h_k||_F^2 | cascade power proxy | user x | user y]
struct MdpState {
  Eigen::VectorXd features;
};

inline MdpState encode_state(const Scenario& s, const ChannelSet& c) {
  const int K = s.k_users();
  MdpState st;
  st.features.resize(state_dim(K));
  for (int k = 0; k < K; ++k) {
    st.features(k) = s.tasks[k].bits;
    st.features(K + k) = s.tasks[k].cycles_per_bit;
    st.features(2 * K + k) = c.h_direct[k].squaredNorm();
    double cascade = 0.0;
    for (int m = 0; m < s.m_ris; ++m)
      cascade += c.g_ris_bs.col(m).squaredNorm() * c.g_ue_ris[k].row(m).squaredNorm();
    st.features(3 * K + k) = cascade;
    st.features(4 * K + k) = s.user_positions[k].x;
    st.features(5 * K + k) = s.user_positions[k].y;
  }
  return st;
}

// Flat action, layout [theta(M) | offload(K) | power(K) | alpha(K)].
struct MdpAction {
  Eigen::VectorXd raw;
};

inline constexpr double kPowerFloorFrac = 1e-6;  // decode floor as a fraction of p_max

// Decode clamps instead of rejecting: phases wrap mod 2*pi, offload
// thresholds at 0.5, powers clamp to (0, p_max], alphas to [0, 1].
inline ControlVector decode_action(const Scenario& s, const MdpAction& a) {
  const int K = s.k_users();
  const int M = s.m_ris;
  if (a.raw.size() != action_dim(K, M))
    throw std::invalid_argument("decode_action: wrong action length");
  ControlVector ctrl;
  ctrl.phases.theta.resize(M);
  for (int m = 0; m < M; ++m) ctrl.phases.theta(m) = wrap_two_pi(a.raw(m));
  ctrl.offload.resize(K);
  ctrl.power_w.resize(K);
  ctrl.alpha_sense.resize(K);
  for (int k = 0; k < K; ++k) {
    ctrl.offload[k] = a.raw(M + k) > 0.5;
    ctrl.power_w(k) = std::clamp(a.raw(M + K + k), kPowerFloorFrac * s.p_max_w, s.p_max_w);
    ctrl.alpha_sense(k) = std::clamp(a.raw(M + 2 * K + k), 0.0, 1.0);
  }
  return ctrl;
}

inline double reward_from_report(const EvaluationReport& rep) {
  return -rep.total_energy_j - 10.0 * rep.n_violations;
}

inline MdpAction random_action(const Scenario& s, Rng& rng) {
  const int K = s.k_users();
  const int M = s.m_ris;
  MdpAction a;
  a.raw.resize(action_dim(K, M));
  for (int m = 0; m < M; ++m) a.raw(m) = rng.uniform(0.0, kTwoPi);
  for (int k = 0; k < K; ++k) a.raw(M + k) = rng.uniform01();
  for (int k = 0; k < K; ++k) a.raw(M + K + k) = s.p_max_w * (1.0 - rng.uniform01());
  for (int k = 0; k < K; ++k) a.raw(M + 2 * K + k) = rng.uniform01();
  return a;
}

// Episodes are one step long: reset draws a fresh world (tasks re-rolled
// from the default ranges, fading re-sampled over the fixed geometry),
// step scores one decoded control. Pure given (seed, action), so external
// agents can replay traces exactly.
class Environment {
 public:
  explicit Environment(Scenario base) : base_(std::move(base)) {
    base_.validate();
    reset(0);
  }

  MdpState reset(std::uint64_t seed) {
    current_ = base_;
    Rng rng(derive_seed({scenario_digest(base_), seed, 0x7A5Bull}));
    for (Task& t : current_.tasks) {
      t.bits = rng.uniform(4.0e5, 5.0e5);
      t.cycles_per_bit = static_cast<double>(rng.uniform_int(800, 1000));
    }
    current_.validate();
    channels_ = sample_channels(current_, seed);
    return encode_state(current_, channels_);
  }

  std::pair<double, EvaluationReport> step(const MdpAction& a) const {
    EvaluationReport rep = evaluate(current_, channels_, decode_action(current_, a));
    const double reward = reward_from_report(rep);
    return {reward, std::move(rep)};
  }

  const Scenario& scenario() const { return current_; }
  const ChannelSet& channels() const { return channels_; }

 private:
  Scenario base_;
  Scenario current_;
  ChannelSet channels_;
};

// ---------------------------------------------------------------------------
// Cross-entropy method over the flat action space.
// ---------------------------------------------------------------------------

struct CemConfig {
  int population = 64;
  int elites = 8;
  int iterations = 50;
  std::vector<double> init_std;  // per coordinate; empty selects defaults
  std::uint64_t seed = 0;

  void validate(int dim) const {
    if (elites < 1 || elites > population)
      throw std::invalid_argument("cem: need 1 <= elites <= population");
    if (iterations < 1) throw std::invalid_argument("cem: iterations must be >= 1");
    if (!init_std.empty() && static_cast<int>(init_std.size()) != dim)
      throw std::invalid_argument("cem: init_std length != action dimension");
  }
};

struct CemResult {
  ControlVector control;
  EvaluationReport report;
  double best_reward = 0.0;
  std::vector<double> best_reward_history;  // per iteration, non-decreasing
};

// Refit the diagonal Gaussian to the elite rows (population-variance
// formula, so a single elite collapses to zero spread). With
// elites == rows this is the plain sample mean/std.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> cem_refit(
    const Eigen::MatrixXd& samples, const Eigen::VectorXd& rewards, int n_elites) {
  const int pop = static_cast<int>(samples.rows());
  const int dim = static_cast<int>(samples.cols());
  if (rewards.size() != pop || n_elites < 1 || n_elites > pop)
    throw std::invalid_argument("cem_refit: bad shapes");
  std::vector<int> order(pop);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rewards(a) > rewards(b); });
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (int e = 0; e < n_elites; ++e) mean += samples.row(order[e]).transpose();
  mean /= n_elites;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (int e = 0; e < n_elites; ++e) {
    const Eigen::VectorXd dev = samples.row(order[e]).transpose() - mean;
    var += dev.cwiseProduct(dev);
  }
  var /= n_elites;
  return {mean, var.cwiseSqrt()};
}

namespace detail {

inline void cem_default_distribution(const Scenario& s, Eigen::VectorXd& mu,
                                     Eigen::VectorXd& sigma) {
  const int K = s.k_users();
  const int M = s.m_ris;
  mu.resize(action_dim(K, M));
  sigma.resize(action_dim(K, M));
  for (int m = 0; m < M; ++m) {
    mu(m) = kPi;
    sigma(m) = kPi;
  }
  for (int k = 0; k < K; ++k) {
    mu(M + k) = 0.5;
    sigma(M + k) = 0.5;
    mu(M + K + k) = 0.5 * s.p_max_w;
    sigma(M + K + k) = 0.5 * s.p_max_w;
    mu(M + 2 * K + k) = 0.5;
    sigma(M + 2 * K + k) = 0.5;
  }
}

}  // namespace detail

// Sample, score, refit to elites, repeat; returns the best action ever
// seen. Best-so-far reward is non-decreasing by construction and checked.
// Deterministic per cfg.seed.
inline CemResult cem_optimize(const Scenario& s, const ChannelSet& c,
                              const CemConfig& cfg) {
  const int dim = action_dim(s.k_users(), s.m_ris);
  cfg.validate(dim);

  Eigen::VectorXd mu, sigma;
  detail::cem_default_distribution(s, mu, sigma);
  if (!cfg.init_std.empty())
    sigma = Eigen::Map<const Eigen::VectorXd>(cfg.init_std.data(), dim);
  const Eigen::VectorXd sigma_floor = 1e-4 * sigma;

  Rng rng(derive_seed({cfg.seed, 0xCE9Dull}));
  Eigen::MatrixXd samples(cfg.population, dim);
  Eigen::VectorXd rewards(cfg.population);

  CemResult result;
  result.best_reward = -std::numeric_limits<double>::infinity();
  MdpAction best_action;
  result.best_reward_history.reserve(cfg.iterations);

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int i = 0; i < cfg.population; ++i)
      for (int j = 0; j < dim; ++j) samples(i, j) = mu(j) + sigma(j) * rng.normal();
    for (int i = 0; i < cfg.population; ++i) {
      MdpAction a;
      a.raw = samples.row(i).transpose();
      const EvaluationReport rep = evaluate(s, c, decode_action(s, a));
      rewards(i) = reward_from_report(rep);
      if (rewards(i) > result.best_reward) {
        result.best_reward = rewards(i);
        best_action = std::move(a);
      }
    }
    auto [new_mu, new_sigma] = cem_refit(samples, rewards, cfg.elites);
    mu = std::move(new_mu);
    sigma = new_sigma.cwiseMax(sigma_floor);
    if (!result.best_reward_history.empty() &&
        result.best_reward < result.best_reward_history.back())
      throw std::logic_error("cem_optimize: best-so-far reward decreased");
    result.best_reward_history.push_back(result.best_reward);
  }

  result.control = decode_action(s, best_action);
  result.report = evaluate(s, c, result.control);
  return result;
}

}  // namespace riscc
