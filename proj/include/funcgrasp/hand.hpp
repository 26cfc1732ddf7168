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

#include <string>
#include <vector>

#include "funcgrasp/kinematics.hpp"

namespace funcgrasp {

/// A designated point + outward normal on a hand link, used by the contact
/// and functional energies. link < 0 places the contact on the palm itself.
struct VirtualContact {
  int finger = -1;  // -1 = palm
  int link = -1;    // link index within the finger; link i follows joint i
  Eigen::Vector3d local_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d local_normal = Eigen::Vector3d::UnitZ();
  bool functional = false;

  bool on_palm() const { return finger < 0; }
};

/// Low-dimensional posture subspace: q(a) = clamp(origin + sum_j a_j e_j).
struct EigengraspBasis {
  Eigen::VectorXd origin_posture;            // full joint dimension
  std::vector<Eigen::VectorXd> basis_vectors;
  std::vector<std::array<double, 2>> amplitude_bounds;  // per amplitude [lo, hi]

  int dimension() const { return static_cast<int>(basis_vectors.size()); }
};

/// Multi-finger hand: palm frame plus one serial chain per finger, virtual
/// contacts for the energies, and an eigengrasp basis for the planner. The
/// palm frame is the identity reference; a posed hand is obtained by applying
/// a wrist transform to everything.
struct HandModel {
  std::string name;
  Transform palm_frame = Transform::Identity();
  std::vector<KinematicChain> fingers;
  int functional_finger = 0;
  int functional_link = 0;  // distal link of the functional finger
  std::vector<VirtualContact> virtual_contacts;
  EigengraspBasis eigengrasp;
  /// Per-finger joint-space closing direction used when finalizing a grasp;
  /// empty entries default to +1 on every joint.
  std::vector<Eigen::VectorXd> closing_directions;

  int total_dof() const;
  int finger_offset(int finger) const;  // index of the finger's first joint in q_full

  Eigen::VectorXd clamp_to_limits(const Eigen::VectorXd& q_full) const;
  Eigen::VectorXd finger_slice(const Eigen::VectorXd& q_full, int finger) const;

  Eigen::VectorXd closing_direction(int finger) const;

  /// Structural validation: functional finger with >= 2 joints, valid contact
  /// references, independent eigengrasp basis. Throws ConfigError.
  void validate() const;
};

/// The functional finger's chain traversed fingertip-to-palm; the reachability
/// sampler anchors this at the functional meeting point.
KinematicChain reverse_chain(const HandModel& hand);

/// World frames of every finger link (and the palm) for a posed hand.
struct PosedHand {
  Transform palm;                              // = wrist * palm_frame
  std::vector<FkResult> fingers;               // frames include the wrist
};

PosedHand pose_hand(const HandModel& hand, const Transform& wrist,
                    const Eigen::VectorXd& q_full);

/// World frame of the link carrying a virtual contact.
Transform contact_link_frame(const PosedHand& posed, const VirtualContact& contact);

}  // namespace funcgrasp
