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

#include "funcgrasp/hand.hpp"

#include <Eigen/QR>
#include <cmath>

#include "funcgrasp/common.hpp"

namespace funcgrasp {

int HandModel::total_dof() const {
  int n = 0;
  for (const KinematicChain& finger : fingers) n += finger.dof();
  return n;
}

int HandModel::finger_offset(int finger) const {
  int offset = 0;
  for (int f = 0; f < finger; ++f) offset += fingers[f].dof();
  return offset;
}

Eigen::VectorXd HandModel::clamp_to_limits(const Eigen::VectorXd& q_full) const {
  Eigen::VectorXd out = q_full;
  int k = 0;
  for (const KinematicChain& finger : fingers)
    for (const JointSpec& joint : finger.joints) {
      out[k] = std::clamp(q_full[k], joint.lower, joint.upper);
      ++k;
    }
  return out;
}

Eigen::VectorXd HandModel::finger_slice(const Eigen::VectorXd& q_full, int finger) const {
  return q_full.segment(finger_offset(finger), fingers[finger].dof());
}

Eigen::VectorXd HandModel::closing_direction(int finger) const {
  if (finger < static_cast<int>(closing_directions.size()) &&
      closing_directions[finger].size() == fingers[finger].dof())
    return closing_directions[finger];
  return Eigen::VectorXd::Ones(fingers[finger].dof());
}

void HandModel::validate() const {
  if (fingers.empty()) throw ConfigError("hand '" + name + "' has no fingers");
  for (const KinematicChain& finger : fingers) finger.validate();

  if (functional_finger < 0 || functional_finger >= static_cast<int>(fingers.size()))
    throw ConfigError("hand '" + name + "': functional finger index out of range");
  const KinematicChain& functional = fingers[functional_finger];
  if (functional.dof() < 2)
    throw ConfigError("hand '" + name + "': functional finger needs at least 2 joints");
  if (functional_link < 0 || functional_link >= functional.dof())
    throw ConfigError("hand '" + name + "': functional link index out of range");

  bool has_functional_contact = false;
  for (const VirtualContact& contact : virtual_contacts) {
    if (std::abs(contact.local_normal.norm() - 1.0) > 1e-9)
      throw ConfigError("hand '" + name + "': virtual contact normal is not unit length");
    if (!contact.on_palm()) {
      if (contact.finger >= static_cast<int>(fingers.size()))
        throw ConfigError("hand '" + name + "': virtual contact references missing finger");
      if (contact.link < 0 || contact.link >= fingers[contact.finger].dof())
        throw ConfigError("hand '" + name + "': virtual contact references missing link");
    }
    if (contact.functional) {
      if (contact.on_palm() || contact.finger != functional_finger ||
          contact.link != functional_link)
        throw ConfigError("hand '" + name +
                          "': functional contacts must sit on the functional link");
      has_functional_contact = true;
    }
  }
  if (virtual_contacts.empty())
    throw ConfigError("hand '" + name + "' declares no virtual contacts");
  if (!has_functional_contact)
    throw ConfigError("hand '" + name + "' needs a functional virtual contact");

  const int n = total_dof();
  if (eigengrasp.dimension() < 1)
    throw ConfigError("hand '" + name + "': eigengrasp basis is empty");
  if (eigengrasp.origin_posture.size() != n)
    throw ConfigError("hand '" + name + "': eigengrasp origin has wrong dimension");
  Eigen::MatrixXd basis(n, eigengrasp.dimension());
  for (int j = 0; j < eigengrasp.dimension(); ++j) {
    if (eigengrasp.basis_vectors[j].size() != n)
      throw ConfigError("hand '" + name + "': eigengrasp vector has wrong dimension");
    basis.col(j) = eigengrasp.basis_vectors[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  qr.setThreshold(1e-9);
  if (qr.rank() < eigengrasp.dimension())
    throw ConfigError("hand '" + name + "': eigengrasp basis vectors are dependent");
  if (eigengrasp.amplitude_bounds.size() != static_cast<size_t>(eigengrasp.dimension()))
    throw ConfigError("hand '" + name + "': amplitude bounds count mismatch");
  for (const auto& [lo, hi] : eigengrasp.amplitude_bounds)
    if (!(lo < hi))
      throw ConfigError("hand '" + name + "': amplitude bounds out of order");

  for (size_t f = 0; f < closing_directions.size(); ++f)
    if (closing_directions[f].size() != 0 &&
        closing_directions[f].size() != fingers[f].dof())
      throw ConfigError("hand '" + name + "': closing direction has wrong dimension");
}

KinematicChain reverse_chain(const HandModel& hand) {
  return reverse_chain(hand.fingers[hand.functional_finger]);
}

PosedHand pose_hand(const HandModel& hand, const Transform& wrist,
                    const Eigen::VectorXd& q_full) {
  if (q_full.size() != hand.total_dof())
    throw ConfigError("full joint vector size does not match hand dof");
  PosedHand posed;
  posed.palm = wrist * hand.palm_frame;
  posed.fingers.reserve(hand.fingers.size());
  for (size_t f = 0; f < hand.fingers.size(); ++f) {
    FkResult fk = forward_kinematics(
        hand.fingers[f], hand.finger_slice(q_full, static_cast<int>(f)));
    fk.end_effector = posed.palm * fk.end_effector;
    for (Transform& frame : fk.link_frames) frame = posed.palm * frame;
    posed.fingers.push_back(std::move(fk));
  }
  return posed;
}

Transform contact_link_frame(const PosedHand& posed, const VirtualContact& contact) {
  if (contact.on_palm()) return posed.palm;
  return posed.fingers[contact.finger].link_frames[contact.link];
}

}  // namespace funcgrasp
