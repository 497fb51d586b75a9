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
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "riscc/beamforming.hpp"
#include "riscc/channel.hpp"
#include "riscc/scenario.hpp"
#include "riscc/sensing.hpp"

namespace riscc {

// One complete joint decision: RIS phases plus per-user offload flag,
// transmit power (meaningful when offloading) and sensing blend weight.
struct ControlVector {
  PhaseConfig phases;
  std::vector<bool> offload;
  Eigen::VectorXd power_w;
  Eigen::VectorXd alpha_sense;
};

struct EvaluationReport {
  Eigen::VectorXd rate_bps;       // 0 for local users
  Eigen::VectorXd latency_s;
  Eigen::VectorXd energy_j;
  Eigen::VectorXd beampattern_w;  // gain at the sensing angle, full budget
  std::vector<bool> feasible;
  double total_energy_j = 0.0;
  int n_violations = 0;           // latency and sensing-floor breaches, counted per constraint
};

inline double noise_power_w(const Scenario& s) { return dbm_to_watt(s.noise_power_dbm); }

namespace detail {

// Orthogonal equal-bandwidth access: each offloader gets W/n with the
// matching slice of the constant-PSD noise; the BS combines with MRC.
inline double rate_from_gain(const Scenario& s, double gain, double p_w, int n_offloaders) {
  const double share_bw = s.bandwidth_hz / n_offloaders;
  const double noise_w = noise_power_w(s) * (share_bw / s.bandwidth_hz);
  return share_bw * std::log2(1.0 + p_w * gain / noise_w);
}

inline double beamformed_gain(const Eigen::MatrixXcd& h_eff, const Beamformer& bf) {
  return (h_eff * bf.w).squaredNorm();
}

inline std::optional<double> min_power_from_gain(const Task& t, const Scenario& s,
                                                 double gain, int n_offloaders) {
  const double t_exec = t.cycles() * n_offloaders / s.f_edge_hz;
  if (t_exec >= s.t_max_s) return std::nullopt;
  const auto latency_ok = [&](double p) {
    const double r = rate_from_gain(s, gain, p, n_offloaders);
    return r > 0.0 && t.bits / r + t_exec <= s.t_max_s;
  };
  if (!latency_ok(s.p_max_w)) return std::nullopt;
  double lo = 0.0;
  double hi = s.p_max_w;
  for (int it = 0; it < 200 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (latency_ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

inline double offload_rate(const Scenario& s, const Eigen::MatrixXcd& h_eff,
                           const Beamformer& bf, double p_w, int n_offloaders) {
  if (n_offloaders < 1)
    throw std::invalid_argument("offload_rate: n_offloaders must be >= 1");
  if (p_w <= 0.0) throw std::invalid_argument("offload_rate: power must be positive");
  return detail::rate_from_gain(s, detail::beamformed_gain(h_eff, bf), p_w, n_offloaders);
}

struct CostBreakdown {
  double latency_s = 0.0;
  double energy_j = 0.0;
};

inline CostBreakdown local_cost(const Task& t, const Scenario& s) {
  const double cycles = t.cycles();
  return {cycles / s.f_local_hz, s.kappa * s.f_local_hz * s.f_local_hz * cycles};
}

// Upload plus equal-share edge execution; the user pays only the upload
// energy, result download is ignored.
inline CostBreakdown offload_cost(const Task& t, double rate_bps, double p_w,
                                  const Scenario& s, int n_offloaders) {
  if (rate_bps <= 0.0) throw std::invalid_argument("offload_cost: rate must be positive");
  const double t_up = t.bits / rate_bps;
  const double t_exec = t.cycles() / (s.f_edge_hz / n_offloaders);
  return {t_up + t_exec, p_w * t_up};
}

// Smallest transmit power in (0, p_max] meeting the latency bound, or
// nullopt when even the full budget fails. Bisection to 1e-6 relative; the
// return sits on the feasible side, so its latency never exceeds t_max.
inline std::optional<double> min_power_for_latency(const Task& t, const Scenario& s,
                                                   const Eigen::MatrixXcd& h_eff,
                                                   const Beamformer& bf,
                                                   int n_offloaders) {
  if (n_offloaders < 1)
    throw std::invalid_argument("min_power_for_latency: n_offloaders must be >= 1");
  return detail::min_power_from_gain(t, s, detail::beamformed_gain(h_eff, bf),
                                     n_offloaders);
}

// Pure joint scoring of one control on one sampled world. Builds each
// user's beamformer from its blend weight, branches on the offload flag,
// and flags latency and sensing-floor violations.
inline EvaluationReport evaluate(const Scenario& s, const ChannelSet& c,
                                 const ControlVector& ctrl) {
  const int K = s.k_users();
  if (c.k_users() != K || static_cast<int>(ctrl.offload.size()) != K ||
      ctrl.power_w.size() != K || ctrl.alpha_sense.size() != K ||
      ctrl.phases.size() != s.m_ris || c.m_ris() != s.m_ris)
    throw std::invalid_argument("evaluate: dimension mismatch");

  int n_off = 0;
  for (int k = 0; k < K; ++k) n_off += ctrl.offload[k] ? 1 : 0;

  EvaluationReport rep;
  rep.rate_bps.setZero(K);
  rep.latency_s.setZero(K);
  rep.energy_j.setZero(K);
  rep.beampattern_w.setZero(K);
  rep.feasible.assign(K, true);
  const double floor_w = sensing_floor(s);

  for (int k = 0; k < K; ++k) {
    const Eigen::MatrixXcd h = effective_channel(c, ctrl.phases, k);
    const Beamformer bf = detail::safe_beamformer(h, s, ctrl.alpha_sense(k));
    rep.beampattern_w(k) = beampattern(bf, s.p_max_w, s.sense_angle_rad);

    if (ctrl.offload[k]) {
      const double rate =
          detail::rate_from_gain(s, detail::beamformed_gain(h, bf), ctrl.power_w(k), n_off);
      if (rate > 0.0) {
        const CostBreakdown cost = offload_cost(s.tasks[k], rate, ctrl.power_w(k), s, n_off);
        rep.rate_bps(k) = rate;
        rep.latency_s(k) = cost.latency_s;
        rep.energy_j(k) = cost.energy_j;
      } else {
        // dead link: the upload never completes; charge the full window
        rep.latency_s(k) = std::numeric_limits<double>::infinity();
        rep.energy_j(k) = ctrl.power_w(k) * s.t_max_s;
      }
    } else {
      const CostBreakdown cost = local_cost(s.tasks[k], s);
      rep.latency_s(k) = cost.latency_s;
      rep.energy_j(k) = cost.energy_j;
    }

    if (rep.latency_s(k) > s.t_max_s) {
      rep.feasible[k] = false;
      ++rep.n_violations;
    }
    if (!meets_sensing_floor(rep.beampattern_w(k), floor_w)) {
      rep.feasible[k] = false;
      ++rep.n_violations;
    }
    rep.total_energy_j += rep.energy_j(k);
  }
  return rep;
}

}  // namespace riscc
