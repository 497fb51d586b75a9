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

#include "riscc/common.hpp"
#include "riscc/scenario.hpp"

namespace riscc {

namespace detail {

inline Eigen::VectorXcd steering_from_sin(double sin_angle, int n) {
  Eigen::VectorXcd a(n);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, kPi * i * sin_angle);
  return a;
}

}  // namespace detail

// Half-wavelength ULA steering vector: element i = exp(j*pi*i*sin(angle)),
// so ||a||^2 = n.
inline Eigen::VectorXcd steering_vector(double angle_rad, int n) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  return detail::steering_from_sin(std::sin(angle_rad), n);
}

// Per-user transmit beamformer; unit 2-norm within 1e-9.
struct Beamformer {
  Eigen::VectorXcd w;
};

// Transmit beampattern gain toward an angle: p * |a(angle)^H w|^2.
inline double beampattern(const Beamformer& bf, double p_w, double angle_rad) {
  if (p_w <= 0.0) throw std::invalid_argument("beampattern: power must be positive");
  if (std::abs(bf.w.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("beampattern: beamformer must be unit-norm");
  const Eigen::VectorXcd a = steering_vector(angle_rad, static_cast<int>(bf.w.size()));
  return p_w * std::norm(a.dot(bf.w));
}

// Largest attainable gain, p*n, reached by the matched beamformer a/sqrt(n).
inline double max_beampattern(double p_w, int n) {
  if (p_w <= 0.0) throw std::invalid_argument("max_beampattern: power must be positive");
  if (n < 1) throw std::invalid_argument("max_beampattern: n must be >= 1");
  return p_w * n;
}

// Required gain at the sensing angle, as a fraction of the attainable max.
inline double sensing_floor(const Scenario& s) {
  return s.sense_floor_frac * max_beampattern(s.p_max_w, s.n_ue);
}

// Floor comparisons share one slack so a blend chosen to sit exactly on the
// floor is never re-flagged as violating it.
inline bool meets_sensing_floor(double gain_w, double floor_w) {
  return gain_w + 1e-9 * (1.0 + floor_w) >= floor_w;
}

}  // namespace riscc
