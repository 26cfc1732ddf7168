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

#include <vector>

#include "funcgrasp/hand.hpp"
#include "funcgrasp/heatmap.hpp"
#include "funcgrasp/mesh.hpp"

namespace funcgrasp {

/// Blend weights for the hybrid grasp energy; must sum to 1.
struct EnergyWeights {
  double alpha = 0.75;  // contact
  double beta = 0.2;    // functional
  double gamma = 0.05;  // palm

  void validate() const;
};

struct PalmEnergyParams {
  double score_threshold = 0.3;  // heatmap score below this is unusable
  double heatmap_gain = 50.0;    // mm of distance one unit of score is worth
  double max_energy = 1e5;
};

struct EnergyBreakdown {
  double contact = 0.0;
  double functional = 0.0;
  double palm = 0.0;
  double hybrid = 0.0;
  bool collision = false;  // hybrid overridden to max_energy
};

struct WorldContact {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  bool functional = false;
};

/// Virtual contacts transformed to world coordinates for a posed hand.
std::vector<WorldContact> world_contacts(const HandModel& hand, const Transform& wrist,
                                         const Eigen::VectorXd& q_full);

inline constexpr double kAlignGainDefault = 100.0;  // mm

/// Sum over non-functional contacts of distance plus misalignment penalty:
/// d + k_align * (1 - max(0, n . o)), o = unit vector toward the closest
/// object point (at d = 0 the inward surface direction). Zero exactly for
/// touching, perfectly aligned contacts.
double contact_energy(const std::vector<WorldContact>& contacts,
                      const MeshQuery& object_query, double k_align = kAlignGainDefault);

/// Same formula restricted to functional contacts, measured against the
/// functional region's faces only.
double functional_energy(const std::vector<WorldContact>& contacts,
                         const MeshQuery& region_query, double k_align = kAlignGainDefault);

/// Heatmap anchor term: distance - gain * score when the interpolated score
/// clears the threshold, max_energy otherwise. May be negative near
/// high-score regions.
double palm_energy(const Eigen::Vector3d& palm_point, const ApproachHeatmap& heatmap,
                   const MeshQuery& object_query, const PalmEnergyParams& params);

/// E = alpha * E_c + beta * E_f + gamma * E_p, exactly.
double hybrid_energy(const EnergyWeights& weights, double e_contact, double e_functional,
                     double e_palm);

}  // namespace funcgrasp
