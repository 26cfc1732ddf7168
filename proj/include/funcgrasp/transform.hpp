/*
 * Copyright 2026 the funcgrasp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

#include "funcgrasp/random.hpp"

namespace funcgrasp {

using Transform = Eigen::Isometry3d;

inline Transform make_transform(const Eigen::Matrix3d& rotation,
                                const Eigen::Vector3d& translation) {
  Transform t = Transform::Identity();
  t.linear() = rotation;
  t.translation() = translation;
  return t;
}

inline Transform translation(const Eigen::Vector3d& t) {
  return make_transform(Eigen::Matrix3d::Identity(), t);
}

inline Eigen::Matrix3d rotation_about(const Eigen::Vector3d& unit_axis, double angle) {
  return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

/// Exponential coordinates -> rotation matrix (angle = |r|).
inline Eigen::Matrix3d exp_rotation(const Eigen::Vector3d& r) {
  const double angle = r.norm();
  if (angle < 1e-14) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, r / angle).toRotationMatrix();
}

inline Eigen::Vector3d log_rotation(const Eigen::Matrix3d& rotation) {
  Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

/// Wraps exponential coordinates to the equivalent vector with angle <= pi.
inline Eigen::Vector3d wrap_exp_coords(const Eigen::Vector3d& r) {
  double angle = r.norm();
  if (angle <= M_PI || angle < 1e-14) return r;
  const Eigen::Vector3d axis = r / angle;
  angle = std::fmod(angle, 2.0 * M_PI);
  if (angle > M_PI) angle -= 2.0 * M_PI;
  return axis * angle;
}

/// Uniform random rotation (Shoemake quaternion method).
inline Eigen::Matrix3d random_rotation(Rng& rng) {
  const double u1 = rng.uniform01();
  const double u2 = rng.uniform01();
  const double u3 = rng.uniform01();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  Eigen::Quaterniond q(a * std::sin(2.0 * M_PI * u2), a * std::cos(2.0 * M_PI * u2),
                       b * std::sin(2.0 * M_PI * u3), b * std::cos(2.0 * M_PI * u3));
  return q.toRotationMatrix();
}

/// Max-norm of R^T R - I; zero for a perfectly orthonormal matrix.
inline double orthonormality_error(const Eigen::Matrix3d& rotation) {
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace funcgrasp
