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

#include "funcgrasp/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "funcgrasp/common.hpp"

namespace funcgrasp {

double KinematicChain::total_reach() const {
  double reach = base_frame.translation().norm() + end_offset.translation().norm();
  for (const JointSpec& joint : joints) reach += joint.origin.translation().norm();
  return reach;
}

namespace {

// Max end-effector distance from the base frame origin.
double reach_from_base(const KinematicChain& chain) {
  double reach = chain.end_offset.translation().norm();
  for (const JointSpec& joint : chain.joints) reach += joint.origin.translation().norm();
  return reach;
}

}  // namespace

JointConfig KinematicChain::midpoint_config() const {
  JointConfig q(dof());
  for (int i = 0; i < dof(); ++i) q[i] = joints[i].midpoint();
  return q;
}

JointConfig KinematicChain::clamp_to_limits(const JointConfig& q) const {
  JointConfig out = q;
  for (int i = 0; i < dof(); ++i)
    out[i] = std::clamp(q[i], joints[i].lower, joints[i].upper);
  return out;
}

JointConfig KinematicChain::random_config(Rng& rng) const {
  JointConfig q(dof());
  for (int i = 0; i < dof(); ++i) q[i] = rng.uniform(joints[i].lower, joints[i].upper);
  return q;
}

void KinematicChain::validate() const {
  if (joints.empty()) throw ConfigError("kinematic chain has no joints");
  for (const JointSpec& joint : joints) {
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9)
      throw ConfigError("joint '" + joint.name + "': axis is not unit length");
    if (!(joint.lower < joint.upper))
      throw ConfigError("joint '" + joint.name + "': lower limit must be below upper");
    if (orthonormality_error(joint.origin.linear()) > 1e-9 ||
        std::abs(joint.origin.linear().determinant() - 1.0) > 1e-9)
      throw ConfigError("joint '" + joint.name + "': origin rotation is not a proper rotation");
  }
  if (!(total_reach() > 0.0)) throw ConfigError("kinematic chain has zero reach");
}

namespace {

void check_dimensions(const KinematicChain& chain, const JointConfig& q) {
  if (q.size() != chain.dof())
    throw ConfigError("joint vector size " + std::to_string(q.size()) +
                      " does not match chain dof " + std::to_string(chain.dof()));
  if (!q.allFinite()) throw ConfigError("joint vector contains non-finite values");
}

}  // namespace

FkResult forward_kinematics(const KinematicChain& chain, const JointConfig& q) {
  check_dimensions(chain, q);
  FkResult result;
  result.link_frames.reserve(chain.joints.size());
  Transform t = chain.base_frame;
  for (int i = 0; i < chain.dof(); ++i) {
    t = t * chain.joints[i].origin;
    t = t * make_transform(rotation_about(chain.joints[i].axis, q[i]), Eigen::Vector3d::Zero());
    result.link_frames.push_back(t);
  }
  result.end_effector = t * chain.end_offset;
  return result;
}

Transform forward_kinematics_end(const KinematicChain& chain, const JointConfig& q) {
  check_dimensions(chain, q);
  Transform t = chain.base_frame;
  for (int i = 0; i < chain.dof(); ++i) {
    t = t * chain.joints[i].origin;
    t = t * make_transform(rotation_about(chain.joints[i].axis, q[i]), Eigen::Vector3d::Zero());
  }
  return t * chain.end_offset;
}

Jacobian chain_jacobian(const KinematicChain& chain, const JointConfig& q) {
  check_dimensions(chain, q);
  const int n = chain.dof();
  std::vector<Eigen::Vector3d> axes(n), positions(n);
  Transform t = chain.base_frame;
  for (int i = 0; i < n; ++i) {
    t = t * chain.joints[i].origin;
    axes[i] = t.linear() * chain.joints[i].axis;
    positions[i] = t.translation();
    t = t * make_transform(rotation_about(chain.joints[i].axis, q[i]), Eigen::Vector3d::Zero());
  }
  const Eigen::Vector3d p_end = (t * chain.end_offset).translation();

  Jacobian jac(6, n);
  for (int i = 0; i < n; ++i) {
    jac.col(i).head<3>() = axes[i].cross(p_end - positions[i]);
    jac.col(i).tail<3>() = axes[i];
  }
  return jac;
}

Eigen::VectorXd joint_limit_weights(const KinematicChain& chain, const JointConfig& q) {
  check_dimensions(chain, q);
  Eigen::VectorXd weights(chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    const JointSpec& joint = chain.joints[i];
    const double hi = joint.upper, lo = joint.lower;
    if (q[i] <= lo || q[i] >= hi) {
      weights[i] = kJointWeightMax;
      continue;
    }
    // dH/dq for H = (hi-lo)^2 / (4 (hi-q)(q-lo))
    const double range2 = (hi - lo) * (hi - lo);
    const double a = hi - q[i], b = q[i] - lo;
    const double grad = range2 * (2.0 * q[i] - hi - lo) / (4.0 * a * a * b * b);
    weights[i] = std::min(1.0 + std::abs(grad), kJointWeightMax);
  }
  return weights;
}

Jacobian weighted_jacobian(const KinematicChain& chain, const JointConfig& q) {
  Jacobian jac = chain_jacobian(chain, q);
  const Eigen::VectorXd weights = joint_limit_weights(chain, q);
  for (int i = 0; i < chain.dof(); ++i) jac.col(i) /= std::sqrt(weights[i]);
  return jac;
}

double directional_manipulability(const KinematicChain& chain, const JointConfig& q,
                                  const Eigen::Vector3d& t) {
  Eigen::Vector3d direction = t;
  const double norm = direction.norm();
  if (std::abs(norm - 1.0) > 1e-6) {
    if (norm < 1e-12) throw ConfigError("task direction is a zero vector");
    std::cerr << "funcgrasp: warning: task direction not unit length (|t| = " << norm
              << "), normalizing\n";
    direction /= norm;
  } else if (norm != 1.0) {
    direction /= norm;
  }

  const Jacobian jac = weighted_jacobian(chain, q);
  const Eigen::Matrix3d gram =
      jac.topRows<3>() * jac.topRows<3>().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(gram);
  double score = 0.0;
  bool any = false;
  for (int i = 0; i < 3; ++i) {
    const double lambda = std::max(eig.eigenvalues()[i], 0.0);
    if (lambda >= 1e-12) any = true;
    score += std::abs(direction.dot(eig.eigenvectors().col(i))) * lambda;
  }
  return any ? score : 0.0;
}

std::optional<JointConfig> solve_ik(const KinematicChain& chain,
                                    const Eigen::Vector3d& target_position,
                                    const JointConfig& seed, const IkOptions& opts,
                                    Rng& rng) {
  if (!target_position.allFinite()) throw ConfigError("IK target is not finite");
  check_dimensions(chain, seed);

  if ((target_position - chain.base_frame.translation()).norm() >
      reach_from_base(chain) + opts.tol_mm)
    return std::nullopt;

  constexpr double kDampingMin = 1e-3;
  constexpr double kDampingMax = 1e6;
  constexpr double kMaxStepRad = 1.2;
  constexpr int kMaxConsecutiveRejects = 20;

  for (int attempt = 0; attempt < std::max(1, opts.restarts); ++attempt) {
    JointConfig q =
        attempt == 0 ? chain.clamp_to_limits(seed) : chain.random_config(rng);
    double damping = 1.0;
    double err = (target_position - forward_kinematics_end(chain, q).translation()).norm();
    int rejects = 0;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
      if (err <= opts.tol_mm) return q;

      const Jacobian jw = weighted_jacobian(chain, q);
      const Eigen::Matrix<double, 3, Eigen::Dynamic> jlin = jw.topRows<3>();
      const Eigen::Vector3d e =
          target_position - forward_kinematics_end(chain, q).translation();
      const Eigen::Matrix3d a =
          jlin * jlin.transpose() + damping * damping * Eigen::Matrix3d::Identity();
      Eigen::VectorXd step = jlin.transpose() * a.ldlt().solve(e);
      const double step_max = step.cwiseAbs().maxCoeff();
      if (step_max > kMaxStepRad) step *= kMaxStepRad / step_max;

      // Backtracking: a rejected full step often succeeds at half scale.
      bool improved = false;
      double scale = 1.0;
      for (int back = 0; back < 3; ++back, scale *= 0.5) {
        const JointConfig q_new = chain.clamp_to_limits(q + scale * step);
        const double err_new =
            (target_position - forward_kinematics_end(chain, q_new).translation()).norm();
        if (err_new < err) {
          q = q_new;
          err = err_new;
          improved = true;
          break;
        }
      }
      if (improved) {
        damping = std::max(damping * 0.5, kDampingMin);
        rejects = 0;
      } else {
        damping = std::min(damping * 2.5, kDampingMax);
        if (++rejects > kMaxConsecutiveRejects) break;
      }
    }
    if (err <= opts.tol_mm) return q;
  }
  return std::nullopt;
}

std::optional<JointConfig> solve_ik_distance(const KinematicChain& chain,
                                             double target_distance_mm,
                                             const JointConfig& seed,
                                             const IkOptions& opts, Rng& rng) {
  if (!std::isfinite(target_distance_mm) || target_distance_mm < 0.0)
    throw ConfigError("IK target distance must be finite and non-negative");
  check_dimensions(chain, seed);
  if (target_distance_mm > chain.total_reach() + opts.tol_mm) return std::nullopt;

  constexpr double kDampingMin = 1e-4;
  constexpr double kDampingMax = 1e8;
  constexpr double kMaxStepRad = 1.2;
  constexpr int kMaxConsecutiveRejects = 20;

  const auto residual = [&](const JointConfig& q) {
    return forward_kinematics_end(chain, q).translation().norm() - target_distance_mm;
  };

  for (int attempt = 0; attempt < std::max(1, opts.restarts); ++attempt) {
    JointConfig q =
        attempt == 0 ? chain.clamp_to_limits(seed) : chain.random_config(rng);
    double damping = 1.0;
    double err = residual(q);
    int rejects = 0;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
      if (std::abs(err) <= opts.tol_mm) return q;

      const Transform end = forward_kinematics_end(chain, q);
      const double norm = end.translation().norm();
      if (norm < 1e-9) break;  // gradient undefined at the origin
      const Jacobian jw = weighted_jacobian(chain, q);
      const Eigen::RowVectorXd grad =
          (end.translation() / norm).transpose() * jw.topRows<3>();
      const double denom = grad.squaredNorm() + damping * damping;
      Eigen::VectorXd step = grad.transpose() * (-err / denom);
      const double step_max = step.cwiseAbs().maxCoeff();
      if (step_max > kMaxStepRad) step *= kMaxStepRad / step_max;

      bool improved = false;
      double scale = 1.0;
      for (int back = 0; back < 3; ++back, scale *= 0.5) {
        const JointConfig q_new = chain.clamp_to_limits(q + scale * step);
        const double err_new = residual(q_new);
        if (std::abs(err_new) < std::abs(err)) {
          q = q_new;
          err = err_new;
          improved = true;
          break;
        }
      }
      if (improved) {
        damping = std::max(damping * 0.5, kDampingMin);
        rejects = 0;
      } else {
        damping = std::min(damping * 2.5, kDampingMax);
        if (++rejects > kMaxConsecutiveRejects) break;
      }
    }
    if (std::abs(err) <= opts.tol_mm) return q;
  }
  return std::nullopt;
}

KinematicChain reverse_chain(const KinematicChain& chain) {
  const int n = chain.dof();
  KinematicChain reversed;
  reversed.base_frame = chain.end_offset.inverse();
  reversed.joints.resize(n);
  for (int i = 0; i < n; ++i) {
    const JointSpec& src = chain.joints[n - 1 - i];
    JointSpec& dst = reversed.joints[i];
    dst.name = src.name;
    dst.axis = src.axis;
    dst.origin = i == 0 ? Transform::Identity() : chain.joints[n - i].origin.inverse();
    dst.lower = -src.upper;
    dst.upper = -src.lower;
  }
  reversed.end_offset = chain.joints[0].origin.inverse() * chain.base_frame.inverse();
  return reversed;
}

JointConfig reverse_config(const JointConfig& q) {
  return -q.reverse();
}

}  // namespace funcgrasp
