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

#include <optional>
#include <string>
#include <vector>

#include "funcgrasp/random.hpp"
#include "funcgrasp/transform.hpp"

namespace funcgrasp {

using JointConfig = Eigen::VectorXd;

/// One revolute joint of a serial chain. `origin` is the fixed transform from
/// the parent joint frame (or chain base) to this joint's frame; the joint
/// rotates about `axis` expressed in its own frame. Lengths in mm, angles in
/// radians.
struct JointSpec {
  std::string name;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Transform origin = Transform::Identity();
  double lower = -M_PI;
  double upper = M_PI;

  double midpoint() const { return 0.5 * (lower + upper); }
  double range() const { return upper - lower; }
};

/// Serial chain of revolute joints.
struct KinematicChain {
  std::vector<JointSpec> joints;
  Transform base_frame = Transform::Identity();
  Transform end_offset = Transform::Identity();

  int dof() const { return static_cast<int>(joints.size()); }

  /// Upper bound on the end-effector distance from the base origin.
  double total_reach() const;

  JointConfig midpoint_config() const;
  JointConfig clamp_to_limits(const JointConfig& q) const;
  JointConfig random_config(Rng& rng) const;

  /// Throws ConfigError on unit-axis / limit-order / orthonormality violations.
  void validate() const;
};

struct FkResult {
  Transform end_effector = Transform::Identity();
  /// Frame of link i = frame after joint i's rotation is applied.
  std::vector<Transform> link_frames;
};

/// Product of the chain's homogeneous transforms at configuration q.
FkResult forward_kinematics(const KinematicChain& chain, const JointConfig& q);

/// End-effector transform only (no per-link bookkeeping).
Transform forward_kinematics_end(const KinematicChain& chain, const JointConfig& q);

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Geometric Jacobian at the end-effector, world frame. Rows 0-2 are linear
/// velocity (mm per unit joint rate), rows 3-5 angular. Column i is
/// (z_i x (p_end - p_i), z_i).
Jacobian chain_jacobian(const KinematicChain& chain, const JointConfig& q);

/// Joint-limit avoidance weights w_i = 1 + |dH/dq_i| with
/// H = sum (hi-lo)^2 / (4 (hi-q)(q-lo)); w -> w_max at the limits.
Eigen::VectorXd joint_limit_weights(const KinematicChain& chain, const JointConfig& q);

inline constexpr double kJointWeightMax = 1e6;

/// Jacobian with column i scaled by w_i^(-1/2); near-limit joints contribute
/// progressively less mobility.
Jacobian weighted_jacobian(const KinematicChain& chain, const JointConfig& q);

/// Grades how easily the end-effector moves along unit direction t at q:
/// sum_i |t . v_i| * lambda_i over the eigenpairs of the weighted linear
/// Jacobian Gram matrix. Absolute values make the score independent of
/// eigenvector sign choices. Non-negative; 0 at singular configurations.
double directional_manipulability(const KinematicChain& chain, const JointConfig& q,
                                  const Eigen::Vector3d& t);

struct IkOptions {
  double tol_mm = 1.0;
  int max_iters = 100;
  int restarts = 5;
};

/// Position-only damped least-squares IK on the joint-limit-weighted Jacobian.
/// Returns an in-limit configuration with ||fk(q) - target|| <= tol_mm, or
/// nullopt when the target is unreachable within the restart budget.
std::optional<JointConfig> solve_ik(const KinematicChain& chain,
                                    const Eigen::Vector3d& target_position,
                                    const JointConfig& seed, const IkOptions& opts,
                                    Rng& rng);

/// Damped least-squares on the scalar residual ||fk(q)|| - target_distance.
/// Used when the chain's base orientation is free (a rotation about the base
/// parent origin can then place the end-effector anywhere at that distance),
/// which reduces position IK to distance matching.
std::optional<JointConfig> solve_ik_distance(const KinematicChain& chain,
                                             double target_distance_mm,
                                             const JointConfig& seed,
                                             const IkOptions& opts, Rng& rng);

/// Chain traversed tip-to-base: base at the end-effector frame, joints in
/// reverse order, limits negated and swapped. At reverse_config(q) its FK is
/// the exact inverse of the forward FK at q.
KinematicChain reverse_chain(const KinematicChain& chain);

/// Configuration of reverse_chain(chain) equivalent to q (reversed order,
/// negated values). Involution: applying it twice returns q.
JointConfig reverse_config(const JointConfig& q);

}  // namespace funcgrasp
