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

#include "funcgrasp/planner.hpp"

#include <algorithm>
#include <cmath>

#include "funcgrasp/common.hpp"

namespace funcgrasp {

void AnnealingSchedule::validate() const {
  if (steps < 1) throw ConfigError("annealing steps must be >= 1");
  if (!(t0 > 0.0)) throw ConfigError("annealing t0 must be positive");
  if (!(t_final_ratio > 0.0 && t_final_ratio < 1.0))
    throw ConfigError("annealing t_final_ratio must be in (0, 1)");
  if (shell_factor < 1.0) throw ConfigError("wrist shell factor must be >= 1");
  if (trace_stride < 1) throw ConfigError("trace stride must be >= 1");
}

Eigen::VectorXd amplitudes_to_joints(const HandModel& hand,
                                     const Eigen::VectorXd& amplitudes) {
  const EigengraspBasis& basis = hand.eigengrasp;
  if (amplitudes.size() != basis.dimension())
    throw ConfigError("amplitude vector size does not match eigengrasp dimension");
  Eigen::VectorXd q = basis.origin_posture;
  for (int j = 0; j < basis.dimension(); ++j) q += amplitudes[j] * basis.basis_vectors[j];
  return hand.clamp_to_limits(q);
}

EnergyBreakdown evaluate_state(const PlannerState& state, const PlannerScene& scene) {
  const Eigen::VectorXd q_full = amplitudes_to_joints(scene.hand, state.amplitudes);
  const Transform wrist = state.wrist();
  const std::vector<WorldContact> contacts = world_contacts(scene.hand, wrist, q_full);

  EnergyBreakdown breakdown;
  breakdown.contact = contact_energy(contacts, scene.object_query, scene.params.k_align);
  breakdown.functional =
      functional_energy(contacts, scene.region_query, scene.params.k_align);
  const Eigen::Vector3d palm_point = (wrist * scene.hand.palm_frame).translation();
  breakdown.palm =
      palm_energy(palm_point, scene.heatmap, scene.object_query, scene.params.palm);

  double deepest = 0.0;
  for (const WorldContact& contact : contacts)
    deepest = std::min(deepest, scene.object_query.signed_distance(contact.position));
  if (-deepest > scene.params.collision_penetration_mm) {
    breakdown.collision = true;
    breakdown.hybrid = scene.params.palm.max_energy;
  } else {
    breakdown.hybrid = hybrid_energy(scene.params.weights, breakdown.contact,
                                     breakdown.functional, breakdown.palm);
  }
  return breakdown;
}

bool metropolis_accept(double delta_energy, double temperature, Rng& rng) {
  if (delta_energy <= 0.0) return true;
  if (temperature <= 0.0) return false;
  return rng.uniform01() < std::exp(-delta_energy / temperature);
}

namespace {

Eigen::VectorXd clamp_amplitudes(const EigengraspBasis& basis, const Eigen::VectorXd& a) {
  Eigen::VectorXd out = a;
  for (int j = 0; j < basis.dimension(); ++j)
    out[j] = std::clamp(a[j], basis.amplitude_bounds[j][0], basis.amplitude_bounds[j][1]);
  return out;
}

}  // namespace

GraspCandidate anneal(const PlannerScene& scene, const AnnealingSchedule& schedule,
                      std::uint64_t seed) {
  schedule.validate();
  scene.params.weights.validate();
  if (!scene.heatmap.selected_cluster.has_value())
    throw PlanningRefusal("heatmap has no selected cluster; cannot plan");

  Eigen::Vector3d center;
  double radius = 0.0;
  scene.mesh.bounding_sphere(center, radius);
  const double shell = schedule.shell_factor * radius;

  Rng rng(seed);
  const EigengraspBasis& basis = scene.hand.eigengrasp;

  PlannerState state;
  {
    Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
    while (dir.norm() < 1e-9) dir = {rng.normal(), rng.normal(), rng.normal()};
    const double r = shell * std::cbrt(rng.uniform01());
    state.wrist_position = center + r * dir.normalized();
    state.wrist_rotation = log_rotation(random_rotation(rng));
    state.amplitudes.resize(basis.dimension());
    for (int j = 0; j < basis.dimension(); ++j)
      state.amplitudes[j] =
          rng.uniform(basis.amplitude_bounds[j][0], basis.amplitude_bounds[j][1]);
  }

  EnergyBreakdown current = evaluate_state(state, scene);
  PlannerState best_state = state;
  EnergyBreakdown best = current;

  GraspCandidate candidate;
  candidate.seed = seed;
  candidate.steps_used = schedule.steps;
  candidate.trace.reserve(schedule.steps / schedule.trace_stride + 1);

  const double cooling = std::pow(schedule.t_final_ratio, 1.0 / schedule.steps);
  double temperature = schedule.t0;
  for (int step = 0; step < schedule.steps; ++step) {
    const double ratio = temperature / schedule.t0;

    PlannerState proposal = state;
    for (int k = 0; k < 3; ++k)
      proposal.wrist_position[k] += rng.normal() * schedule.step_position_mm * ratio;
    const Eigen::Vector3d offset = proposal.wrist_position - center;
    if (offset.norm() > shell)
      proposal.wrist_position = center + offset * (shell / offset.norm());
    for (int k = 0; k < 3; ++k)
      proposal.wrist_rotation[k] += rng.normal() * schedule.step_rotation_rad * ratio;
    proposal.wrist_rotation = wrap_exp_coords(proposal.wrist_rotation);
    for (int j = 0; j < basis.dimension(); ++j)
      proposal.amplitudes[j] += rng.normal() * schedule.step_amplitude * ratio;
    proposal.amplitudes = clamp_amplitudes(basis, proposal.amplitudes);

    const EnergyBreakdown evaluated = evaluate_state(proposal, scene);
    if (metropolis_accept(evaluated.hybrid - current.hybrid, temperature, rng)) {
      state = proposal;
      current = evaluated;
      if (current.hybrid < best.hybrid) {
        best = current;
        best_state = state;
      }
    }
    if ((step + 1) % schedule.trace_stride == 0) candidate.trace.push_back(best.hybrid);

    temperature *= cooling;
  }

  candidate.state = best_state;
  candidate.energy = best;
  candidate.q_full = amplitudes_to_joints(scene.hand, best_state.amplitudes);
  return candidate;
}

FinalizeResult finalize_grasp(const GraspCandidate& candidate, const PlannerScene& scene,
                              const FinalizeParams& params) {
  const HandModel& hand = scene.hand;
  const Transform wrist = candidate.state.wrist();

  FinalizeResult result;
  result.q_closed = amplitudes_to_joints(hand, candidate.state.amplitudes);

  // Per-finger sweep with per-joint freezing: a joint stops once the next
  // step would push one of the links it drives into the object; distal
  // joints keep curling, so the finger wraps instead of halting at the first
  // graze.
  for (int f = 0; f < static_cast<int>(hand.fingers.size()); ++f) {
    Eigen::VectorXd direction = hand.closing_direction(f);
    const double biggest = direction.cwiseAbs().maxCoeff();
    if (biggest < 1e-12) continue;
    direction /= biggest;  // 0.01 rad per step on the fastest joint

    const bool functional = f == hand.functional_finger;
    const int offset = hand.finger_offset(f);
    const KinematicChain& chain = hand.fingers[f];

    // Contact indices on this finger, grouped by the innermost joint that
    // moves them (a contact on link l moves with joints 0..l).
    std::vector<int> finger_contacts;
    for (size_t c = 0; c < hand.virtual_contacts.size(); ++c)
      if (!hand.virtual_contacts[c].on_palm() && hand.virtual_contacts[c].finger == f)
        finger_contacts.push_back(static_cast<int>(c));

    const auto functional_reached = [&](const Eigen::VectorXd& q_full) {
      if (!functional) return false;
      const std::vector<WorldContact> contacts = world_contacts(hand, wrist, q_full);
      for (int c : finger_contacts)
        if (hand.virtual_contacts[c].functional &&
            scene.region_query.closest_point(contacts[c].position).distance <
                params.contact_threshold_mm)
          return true;
      return false;
    };

    std::vector<bool> frozen(chain.dof(), false);
    for (int j = 0; j < chain.dof(); ++j)
      if (std::abs(direction[j]) < 1e-12) frozen[j] = true;

    for (int step = 0; step < params.max_steps_per_finger; ++step) {
      if (functional_reached(result.q_closed)) break;
      bool moved = false;
      for (int j = 0; j < chain.dof(); ++j) {
        if (frozen[j]) continue;
        Eigen::VectorXd q_next = result.q_closed;
        q_next[offset + j] =
            std::clamp(q_next[offset + j] + params.close_step_rad * direction[j],
                       chain.joints[j].lower, chain.joints[j].upper);
        if (std::abs(q_next[offset + j] - result.q_closed[offset + j]) < 1e-12) {
          frozen[j] = true;  // at the limit
          continue;
        }
        // Would any contact this joint drives cross into the object?
        const std::vector<WorldContact> contacts = world_contacts(hand, wrist, q_next);
        bool blocked = false;
        for (int c : finger_contacts) {
          if (hand.virtual_contacts[c].link < j) continue;
          if (scene.object_query.signed_distance(contacts[c].position) <
              -0.5 * params.contact_threshold_mm) {
            blocked = true;
            break;
          }
        }
        if (blocked) {
          frozen[j] = true;
          continue;
        }
        result.q_closed = q_next;
        moved = true;
      }
      if (!moved) break;
    }
  }

  // Grasping iff some virtual contact ended within the contact threshold.
  const std::vector<WorldContact> contacts = world_contacts(hand, wrist, result.q_closed);
  result.non_grasping = true;
  for (const WorldContact& contact : contacts)
    if (scene.object_query.signed_distance(contact.position) < params.contact_threshold_mm) {
      result.non_grasping = false;
      break;
    }
  return result;
}

}  // namespace funcgrasp
