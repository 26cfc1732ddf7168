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

#include <cstdint>
#include <vector>

#include "funcgrasp/energy.hpp"
#include "funcgrasp/hand.hpp"
#include "funcgrasp/heatmap.hpp"
#include "funcgrasp/mesh.hpp"

namespace funcgrasp {

/// Search state: 6 wrist parameters (position mm + rotation as exponential
/// coordinates) plus N eigengrasp amplitudes.
struct PlannerState {
  Eigen::Vector3d wrist_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d wrist_rotation = Eigen::Vector3d::Zero();  // exp coords
  Eigen::VectorXd amplitudes;

  Transform wrist() const {
    return make_transform(exp_rotation(wrist_rotation), wrist_position);
  }
};

struct AnnealingSchedule {
  int steps = 70000;
  double t0 = 1000.0;
  double t_final_ratio = 1e-4;  // T_final / T0 under exponential cooling
  double step_position_mm = 30.0;
  double step_rotation_rad = 0.4;
  double step_amplitude = 0.3;
  double shell_factor = 1.5;  // wrist confined to this multiple of the bounding sphere
  int trace_stride = 100;

  void validate() const;
};

struct EvaluationParams {
  EnergyWeights weights;
  PalmEnergyParams palm;
  double k_align = kAlignGainDefault;
  double collision_penetration_mm = 2.0;
};

/// Immutable inputs shared by every energy evaluation of one planning run.
struct PlannerScene {
  const HandModel& hand;
  const TriangleMesh& mesh;
  const MeshQuery& object_query;
  const MeshQuery& region_query;
  const FunctionalRegion& region;
  const ApproachHeatmap& heatmap;
  EvaluationParams params;
};

struct GraspCandidate {
  PlannerState state;
  Eigen::VectorXd q_full;
  EnergyBreakdown energy;
  std::uint64_t seed = 0;
  int steps_used = 0;
  std::vector<double> trace;  // best hybrid energy every trace_stride steps
};

/// q = clamp_to_limits(origin + sum_j a_j e_j).
Eigen::VectorXd amplitudes_to_joints(const HandModel& hand, const Eigen::VectorXd& amplitudes);

/// Hybrid energy of a state; any virtual contact deeper than
/// collision_penetration_mm inside the object overrides the hybrid value to
/// max_energy (terms are still reported).
EnergyBreakdown evaluate_state(const PlannerState& state, const PlannerScene& scene);

/// Always accepts downhill moves; uphill with probability exp(-delta / T).
bool metropolis_accept(double delta_energy, double temperature, Rng& rng);

/// Simulated annealing over the 6+N state with Gaussian proposals shrinking
/// proportionally to temperature. Deterministic for a given seed. Throws
/// PlanningRefusal when the heatmap has no selected cluster.
GraspCandidate anneal(const PlannerScene& scene, const AnnealingSchedule& schedule,
                      std::uint64_t seed);

struct FinalizeParams {
  double close_step_rad = 0.01;
  double contact_threshold_mm = 0.5;
  int max_steps_per_finger = 400;
};

struct FinalizeResult {
  Eigen::VectorXd q_closed;
  bool non_grasping = false;  // no virtual contact reached the surface
};

/// Advances each finger along its closing direction in small joint steps
/// until one of its virtual contacts reaches the surface (the functional
/// finger aims for the functional region) or its limits stop it.
FinalizeResult finalize_grasp(const GraspCandidate& candidate, const PlannerScene& scene,
                              const FinalizeParams& params = {});

}  // namespace funcgrasp
