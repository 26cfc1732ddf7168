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

#include "funcgrasp/energy.hpp"

#include <cmath>

#include "funcgrasp/common.hpp"

namespace funcgrasp {

void EnergyWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
    throw ConfigError("energy weights must be non-negative");
  if (std::abs(alpha + beta + gamma - 1.0) > 1e-9)
    throw ConfigError("energy weights must sum to 1");
}

std::vector<WorldContact> world_contacts(const HandModel& hand, const Transform& wrist,
                                         const Eigen::VectorXd& q_full) {
  const PosedHand posed = pose_hand(hand, wrist, q_full);
  std::vector<WorldContact> contacts;
  contacts.reserve(hand.virtual_contacts.size());
  for (const VirtualContact& contact : hand.virtual_contacts) {
    const Transform frame = contact_link_frame(posed, contact);
    WorldContact world;
    world.position = frame * contact.local_position;
    world.normal = frame.linear() * contact.local_normal;
    world.functional = contact.functional;
    contacts.push_back(world);
  }
  return contacts;
}

namespace {

double proximity_term(const WorldContact& contact, const MeshQuery& query, double k_align) {
  const ClosestHit hit = query.closest_point(contact.position);
  Eigen::Vector3d toward;
  if (hit.distance > 1e-9) {
    toward = (hit.point - contact.position) / hit.distance;
  } else {
    toward = -hit.normal;  // on the surface: into the object
  }
  const double alignment = std::max(0.0, contact.normal.dot(toward));
  return hit.distance + k_align * (1.0 - alignment);
}

}  // namespace

double contact_energy(const std::vector<WorldContact>& contacts,
                      const MeshQuery& object_query, double k_align) {
  double energy = 0.0;
  int used = 0;
  for (const WorldContact& contact : contacts) {
    if (contact.functional) continue;
    energy += proximity_term(contact, object_query, k_align);
    ++used;
  }
  if (used == 0) throw ConfigError("contact energy needs a non-functional contact");
  return energy;
}

double functional_energy(const std::vector<WorldContact>& contacts,
                         const MeshQuery& region_query, double k_align) {
  double energy = 0.0;
  int used = 0;
  for (const WorldContact& contact : contacts) {
    if (!contact.functional) continue;
    energy += proximity_term(contact, region_query, k_align);
    ++used;
  }
  if (used == 0) throw ConfigError("functional energy needs a functional contact");
  return energy;
}

double palm_energy(const Eigen::Vector3d& palm_point, const ApproachHeatmap& heatmap,
                   const MeshQuery& object_query, const PalmEnergyParams& params) {
  const HeatmapQuery q = query_score(heatmap, object_query, palm_point);
  if (q.score > params.score_threshold)
    return q.distance_mm - params.heatmap_gain * q.score;
  return params.max_energy;
}

double hybrid_energy(const EnergyWeights& weights, double e_contact, double e_functional,
                     double e_palm) {
  return weights.alpha * e_contact + weights.beta * e_functional + weights.gamma * e_palm;
}

}  // namespace funcgrasp
