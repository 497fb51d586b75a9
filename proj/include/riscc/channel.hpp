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
#include <complex>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riscc/common.hpp"
#include "riscc/scenario.hpp"
#include "riscc/sensing.hpp"

namespace riscc {

// RIS reflection phases, one per element. Reflection coefficient per
// element is exp(j*theta_m), unit modulus by construction.
struct PhaseConfig {
  Eigen::VectorXd theta;
  int size() const { return static_cast<int>(theta.size()); }
};

inline PhaseConfig zero_phases(int m_ris) {
  PhaseConfig p;
  p.theta = Eigen::VectorXd::Zero(m_ris);
  return p;
}

// Sampled links for one scenario. Path loss amplitudes are folded into the
// entries. Immutable after sampling.
struct ChannelSet {
  std::vector<Eigen::MatrixXcd> h_direct;  // per user, n_bs x n_ue
  Eigen::MatrixXcd g_ris_bs;               // n_bs x m_ris
  std::vector<Eigen::MatrixXcd> g_ue_ris;  // per user, m_ris x n_ue
  int k_users() const { return static_cast<int>(h_direct.size()); }
  int m_ris() const { return static_cast<int>(g_ris_bs.cols()); }
};

// Log-distance path loss; distances below the 1 m reference are rejected.
inline double pathloss_db(double d_m, double exponent, double pl0_db) {
  if (d_m < 1.0)
    throw std::invalid_argument("pathloss_db: distance below the 1 m reference");
  return pl0_db - 10.0 * exponent * std::log10(d_m);
}

namespace detail {

// sin of the a->b direction against the x axis; all arrays are x-axis ULAs.
inline double link_sin(const Vec2& a, const Vec2& b) {
  const double d = distance(a, b);
  double s = (b.x - a.x) / d;
  if (s > 1.0) s = 1.0;
  if (s < -1.0) s = -1.0;
  return s;
}

// Geometric LoS component: a_rx(arrival) * a_tx(departure)^H.
inline Eigen::MatrixXcd los_outer(const Vec2& tx, int n_tx, const Vec2& rx, int n_rx) {
  const Eigen::VectorXcd a_rx = steering_from_sin(link_sin(rx, tx), n_rx);
  const Eigen::VectorXcd a_tx = steering_from_sin(link_sin(tx, rx), n_tx);
  return a_rx * a_tx.adjoint();
}

}  // namespace detail

// Draw all links. Direct user->BS links are Rayleigh; both RIS hops are
// Rician with a geometry-derived LoS term. Deterministic per
// (scenario digest, seed); every draw order below is part of that contract.
inline ChannelSet sample_channels(const Scenario& s, std::uint64_t seed) {
  s.validate();
  Rng rng(derive_seed({scenario_digest(s), seed}));
  const int K = s.k_users();

  ChannelSet c;
  c.h_direct.reserve(K);
  for (int k = 0; k < K; ++k) {
    const double d = distance(s.user_positions[k], s.bs_position);
    const double amp = std::sqrt(db_to_linear(pathloss_db(d, s.alpha_direct, s.pl0_db)));
    Eigen::MatrixXcd h(s.n_bs, s.n_ue);
    for (int i = 0; i < s.n_bs; ++i)
      for (int j = 0; j < s.n_ue; ++j) h(i, j) = amp * rng.complex_normal();
    c.h_direct.push_back(std::move(h));
  }

  if (s.m_ris == 0) {
    c.g_ris_bs.resize(s.n_bs, 0);
    c.g_ue_ris.assign(K, Eigen::MatrixXcd(0, s.n_ue));
    return c;
  }

  const double k_lin = db_to_linear(s.rician_k_db);
  const double w_los = std::sqrt(k_lin / (k_lin + 1.0));
  const double w_nlos = std::sqrt(1.0 / (k_lin + 1.0));

  {
    const double d = distance(s.ris_position, s.bs_position);
    const double amp = std::sqrt(db_to_linear(pathloss_db(d, s.alpha_reflect, s.pl0_db)));
    const Eigen::MatrixXcd los =
        detail::los_outer(s.ris_position, s.m_ris, s.bs_position, s.n_bs);
    c.g_ris_bs.resize(s.n_bs, s.m_ris);
    for (int i = 0; i < s.n_bs; ++i)
      for (int j = 0; j < s.m_ris; ++j)
        c.g_ris_bs(i, j) = amp * (w_los * los(i, j) + w_nlos * rng.complex_normal());
  }

  c.g_ue_ris.reserve(K);
  for (int k = 0; k < K; ++k) {
    const double d = distance(s.user_positions[k], s.ris_position);
    const double amp = std::sqrt(db_to_linear(pathloss_db(d, s.alpha_reflect, s.pl0_db)));
    const Eigen::MatrixXcd los =
        detail::los_outer(s.user_positions[k], s.n_ue, s.ris_position, s.m_ris);
    Eigen::MatrixXcd g(s.m_ris, s.n_ue);
    for (int i = 0; i < s.m_ris; ++i)
      for (int j = 0; j < s.n_ue; ++j)
        g(i, j) = amp * (w_los * los(i, j) + w_nlos * rng.complex_normal());
    c.g_ue_ris.push_back(std::move(g));
  }
  return c;
}

// H_k = h_direct[k] + g_ris_bs * diag(exp(j*theta)) * g_ue_ris[k].
// With m_ris = 0 this is h_direct[k] exactly. Phases may be any reals;
// storage-normalized configs are a caller convention.
inline Eigen::MatrixXcd effective_channel(const ChannelSet& c, const PhaseConfig& p,
                                          int user) {
  if (user < 0 || user >= c.k_users())
    throw std::out_of_range("effective_channel: user index out of range");
  if (p.size() != c.m_ris())
    throw std::invalid_argument("effective_channel: phase count != m_ris");
  Eigen::MatrixXcd h = c.h_direct[user];
  const int m = p.size();
  if (m == 0) return h;
  Eigen::VectorXcd refl(m);
  for (int i = 0; i < m; ++i) refl(i) = std::polar(1.0, p.theta(i));
  h.noalias() += c.g_ris_bs * refl.asDiagonal() * c.g_ue_ris[user];
  return h;
}

// Debug dump: row-major (re, im) pairs. Not a stable format.
inline void dump_channels_csv(const ChannelSet& c, std::ostream& os) {
  const auto dump = [&os](const char* name, int user, const Eigen::MatrixXcd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        os << name << ',' << user << ',' << i << ',' << j << ','
           << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag())
           << '\n';
  };
  for (int k = 0; k < c.k_users(); ++k) dump("h_direct", k, c.h_direct[k]);
  dump("g_ris_bs", -1, c.g_ris_bs);
  for (int k = 0; k < c.k_users(); ++k) dump("g_ue_ris", k, c.g_ue_ris[k]);
}

}  // namespace riscc
