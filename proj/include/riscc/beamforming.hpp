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
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "riscc/scenario.hpp"
#include "riscc/sensing.hpp"

namespace riscc {

// Dominant right singular vector of H, phase-rotated so a(sense_angle)^H u
// is real non-negative. The rotation fixes the gauge so that blending with
// the matched direction never cancels.
inline Eigen::VectorXcd rate_direction(const Eigen::MatrixXcd& h, double sense_angle_rad) {
  if (h.size() == 0 || h.norm() == 0.0)
    throw std::invalid_argument("rate_direction: zero channel");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeThinV);
  Eigen::VectorXcd u = svd.matrixV().col(0);
  const Eigen::VectorXcd a = steering_vector(sense_angle_rad, static_cast<int>(u.size()));
  const std::complex<double> proj = a.dot(u);
  if (std::abs(proj) > 0.0) u *= std::conj(proj) / std::abs(proj);
  return u;
}

namespace detail {

inline Beamformer matched_beamformer(double sense_angle_rad, int n) {
  const Eigen::VectorXcd a = steering_vector(sense_angle_rad, n);
  return Beamformer{a / std::sqrt(double(n))};
}

// Blend of the matched sensing direction and a rate direction u.
inline Beamformer mix_beamformer(const Eigen::VectorXcd& u, double sense_angle_rad,
                                 double alpha) {
  if (alpha == 1.0) return matched_beamformer(sense_angle_rad, static_cast<int>(u.size()));
  const int n = static_cast<int>(u.size());
  const Eigen::VectorXcd a = steering_vector(sense_angle_rad, n);
  const Eigen::VectorXcd v = alpha / std::sqrt(double(n)) * a + (1.0 - alpha) * u;
  return Beamformer{v / v.norm()};
}

// evaluate() must score arbitrary controls, including the degenerate
// zero-channel world where no rate direction exists; there the blend
// collapses to the matched beamformer.
inline Beamformer safe_beamformer(const Eigen::MatrixXcd& h, const Scenario& s,
                                  double alpha) {
  if (h.size() == 0 || h.norm() == 0.0)
    return matched_beamformer(s.sense_angle_rad, s.n_ue);
  return mix_beamformer(rate_direction(h, s.sense_angle_rad), s.sense_angle_rad, alpha);
}

}  // namespace detail

// alpha = 1 gives the matched sensing beamformer, alpha = 0 the
// rate-optimal one; intermediate values trade beampattern gain for rate.
inline Beamformer build_beamformer(const Eigen::MatrixXcd& h, const Scenario& s,
                                   double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("build_beamformer: alpha outside [0, 1]");
  return detail::mix_beamformer(rate_direction(h, s.sense_angle_rad),
                                s.sense_angle_rad, alpha);
}

// Smallest blend weight whose beampattern at the sensing angle, driven at
// the full power budget, meets the floor. The gain is non-decreasing in
// alpha (the rotation in rate_direction guarantees it), so bisection to
// 1e-4 applies; the returned value is always on the feasible side. A zero
// channel degenerates to the matched beamformer, alpha = 1.
inline double min_alpha_for_floor(const Eigen::MatrixXcd& h, const Scenario& s) {
  if (h.size() == 0 || h.norm() == 0.0) return 1.0;
  const double floor_w = sensing_floor(s);
  const Eigen::VectorXcd u = rate_direction(h, s.sense_angle_rad);
  const auto meets = [&](double alpha) {
    const Beamformer bf = detail::mix_beamformer(u, s.sense_angle_rad, alpha);
    return meets_sensing_floor(beampattern(bf, s.p_max_w, s.sense_angle_rad), floor_w);
  };
  if (meets(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (meets(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace riscc
