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

#include <doctest.h>

#include <memory>

#include "funcgrasp/builtin.hpp"
#include "funcgrasp/common.hpp"
#include "funcgrasp/planner.hpp"
#include "test_util.hpp"

using namespace funcgrasp;

namespace {

/// Two-finger planar hand: functional finger on +x, gripper finger opposing
/// on -x, both curling toward +z. Palm contact at the frame origin keeps the
/// collision-boundary arithmetic exact.
HandModel toy_hand() {
  HandModel hand;
  hand.name = "toy_two_finger";

  const auto make_finger = [](double mount) {
    KinematicChain chain;
    JointSpec base;
    base.name = "flex_base";
    base.axis = -Eigen::Vector3d::UnitY();
    base.origin = translation({8, 0, 0});
    base.lower = -0.3;
    base.upper = 1.9;
    JointSpec mid = base;
    mid.name = "flex_mid";
    mid.origin = translation({40, 0, 0});
    mid.lower = 0.0;
    chain.joints = {base, mid};
    chain.end_offset = translation({30, 0, 0});
    chain.base_frame = translation({mount, 0, 0});
    return chain;
  };

  KinematicChain functional = make_finger(25);
  KinematicChain opposing = make_finger(25);
  opposing.base_frame =
      make_transform(rotation_about(Eigen::Vector3d::UnitZ(), M_PI), {-25, 0, 0});
  hand.fingers = {functional, opposing};
  hand.functional_finger = 0;
  hand.functional_link = 1;

  VirtualContact palm;
  palm.finger = -1;
  palm.local_position = {0, 0, 0};
  palm.local_normal = {0, 0, 1};
  VirtualContact f0_mid;
  f0_mid.finger = 0;
  f0_mid.link = 0;
  f0_mid.local_position = {20, 0, 0};
  f0_mid.local_normal = {0, 0, 1};
  VirtualContact f0_tip = f0_mid;
  f0_tip.link = 1;
  f0_tip.local_position = {28, 0, 0};
  f0_tip.functional = true;
  VirtualContact f1_mid = f0_mid;
  f1_mid.finger = 1;
  VirtualContact f1_tip = f1_mid;
  f1_tip.link = 1;
  f1_tip.local_position = {28, 0, 0};
  hand.virtual_contacts = {palm, f0_mid, f0_tip, f1_mid, f1_tip};

  hand.eigengrasp.origin_posture = Eigen::VectorXd::Zero(4);
  hand.eigengrasp.origin_posture << 0.3, 0.25, 0.3, 0.25;
  Eigen::VectorXd flex(4);
  flex << 0.0, 0.0, 1.0, 1.0;  // close the opposing finger
  Eigen::VectorXd func_flex(4);
  func_flex << 1.0, 1.0, 0.0, 0.0;
  hand.eigengrasp.basis_vectors = {flex, func_flex};
  hand.eigengrasp.amplitude_bounds = {{-0.5, 1.55}, {-0.5, 1.55}};

  hand.closing_directions = {Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2)};
  hand.validate();
  return hand;
}

struct ToyScene {
  HandModel hand;
  TriangleMesh disk;
  FunctionalRegion region;
  std::unique_ptr<MeshQuery> object_query;
  std::unique_ptr<MeshQuery> region_query;
  ApproachHeatmap heatmap;
  EvaluationParams params;

  PlannerScene scene() const {
    return PlannerScene{hand,   disk,    *object_query, *region_query,
                        region, heatmap, params};
  }
};

std::unique_ptr<ToyScene> build_toy_scene() {
  auto toy = std::make_unique<ToyScene>();
  toy->hand = toy_hand();
  toy->disk = make_cylinder_mesh(35.0, 16.0, 36, 3);
  toy->region.face_ids = select_faces_by_sphere(toy->disk, {35.0, 0.0, 8.0}, 10.0);
  toy->region.task_direction = Eigen::Vector3d(-1, 0, 0);
  toy->region.meeting_point = region_meeting_point(toy->disk, toy->region.face_ids);
  toy->object_query = std::make_unique<MeshQuery>(toy->disk);
  toy->region_query = std::make_unique<MeshQuery>(toy->disk, toy->region.face_ids);

  HeatmapParams params;
  params.n_points = 200;
  params.trials = 3;
  params.seed = 811;
  params.min_cluster_size = 10;
  params.min_samples = 5;
  toy->heatmap = generate_heatmap(toy->hand, toy->disk, toy->region, params, 2);
  return toy;
}

const ToyScene& shared_toy_scene() {
  static const std::unique_ptr<ToyScene> scene = build_toy_scene();
  return *scene;
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("amplitudes map to clamped joint vectors") {
  const HandModel hand = builtin_hand_four_finger();
  const int n_amps = hand.eigengrasp.dimension();

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(n_amps);
  CHECK((amplitudes_to_joints(hand, zero) - hand.eigengrasp.origin_posture).norm() ==
        0.0);

  // Driving far past the bounds clamps flexion joints, leaves spread alone.
  Eigen::VectorXd big = Eigen::VectorXd::Zero(n_amps);
  big[0] = 100.0;
  const Eigen::VectorXd q = amplitudes_to_joints(hand, big);
  for (int f = 0; f < 4; ++f) {
    const int at = hand.finger_offset(f);
    if (f == hand.functional_finger) continue;
    CHECK(q[at + 1] == doctest::Approx(hand.fingers[f].joints[1].upper));
    CHECK(q[at + 2] == doctest::Approx(hand.fingers[f].joints[2].upper));
    CHECK(q[at + 0] ==
          doctest::Approx(hand.eigengrasp.origin_posture[at + 0]));
  }

  // An identity basis over the full dof recovers any in-limit posture.
  HandModel full = builtin_hand_four_finger();
  const int n = full.total_dof();
  full.eigengrasp.origin_posture = Eigen::VectorXd::Zero(n);
  full.eigengrasp.basis_vectors.clear();
  for (int j = 0; j < n; ++j)
    full.eigengrasp.basis_vectors.push_back(Eigen::VectorXd::Unit(n, j));
  full.eigengrasp.amplitude_bounds.assign(n, {-2.0, 2.0});
  Rng rng(501);
  Eigen::VectorXd target(n);
  int k = 0;
  for (const KinematicChain& finger : full.fingers)
    for (const JointSpec& joint : finger.joints)
      target[k++] = rng.uniform(joint.lower, joint.upper);
  CHECK((amplitudes_to_joints(full, target) - target).norm() < 1e-12);
}

TEST_CASE("metropolis acceptance statistics match exp(-dE/T)") {
  Rng rng(502);
  const double temperature = 10.0;
  for (double delta : {2.0, 5.0, 12.0}) {
    const double p = std::exp(-delta / temperature);
    int accepted = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i)
      if (metropolis_accept(delta, temperature, rng)) ++accepted;
    const double sigma = std::sqrt(p * (1.0 - p) / trials);
    CHECK(std::abs(accepted / static_cast<double>(trials) - p) <= 3.0 * sigma);
  }
  for (int i = 0; i < 100; ++i) CHECK(metropolis_accept(-0.5, temperature, rng));
  CHECK(metropolis_accept(0.0, temperature, rng));
}

TEST_CASE("collision override boundary sits exactly at the threshold") {
  const ToyScene& toy = shared_toy_scene();
  PlannerScene scene = toy.scene();
  scene.params.collision_penetration_mm = 2.0;

  // Palm contact is at the wrist origin; the disk's top face is z = 16.
  PlannerState state;
  state.amplitudes = Eigen::VectorXd::Zero(2);
  state.amplitudes << -0.3, -0.25;  // straighten the fingers away from the disk

  state.wrist_position = Eigen::Vector3d(0, 0, 14.0);  // exactly 2.0 mm deep
  const EnergyBreakdown at_boundary = evaluate_state(state, scene);
  CHECK(!at_boundary.collision);

  state.wrist_position = Eigen::Vector3d(0, 0, 13.99);
  const EnergyBreakdown past = evaluate_state(state, scene);
  CHECK(past.collision);
  CHECK(past.hybrid == doctest::Approx(scene.params.palm.max_energy));

  state.wrist_position = Eigen::Vector3d(0, 0, 120.0);  // far away: no override
  const EnergyBreakdown far = evaluate_state(state, scene);
  CHECK(!far.collision);
  CHECK(far.contact > 0.0);
}

TEST_CASE("anneal: determinism, monotone trace, refusal without cluster") {
  const ToyScene& toy = shared_toy_scene();
  REQUIRE(toy.heatmap.selected_cluster.has_value());
  const PlannerScene scene = toy.scene();

  AnnealingSchedule schedule;
  schedule.steps = 4000;
  schedule.t0 = 500.0;

  const GraspCandidate a = anneal(scene, schedule, 9001);
  const GraspCandidate b = anneal(scene, schedule, 9001);
  CHECK(a.energy.hybrid == b.energy.hybrid);
  CHECK((a.state.wrist_position - b.state.wrist_position).norm() == 0.0);
  CHECK((a.state.amplitudes - b.state.amplitudes).norm() == 0.0);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i] == b.trace[i]);

  for (size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] <= a.trace[i - 1]);

  // Stored energy is bit-identical to a fresh evaluation of the stored state.
  const EnergyBreakdown recomputed = evaluate_state(a.state, scene);
  CHECK(recomputed.hybrid == a.energy.hybrid);
  CHECK(recomputed.contact == a.energy.contact);
  CHECK(recomputed.functional == a.energy.functional);
  CHECK(recomputed.palm == a.energy.palm);

  ApproachHeatmap empty = toy.heatmap;
  empty.selected_cluster.reset();
  const PlannerScene refused{toy.hand,   toy.disk, *toy.object_query,
                             *toy.region_query, toy.region, empty,
                             toy.params};
  CHECK_THROWS_AS(anneal(refused, schedule, 1), PlanningRefusal);
}

TEST_CASE("anneal beats uniform random search on the toy scenario") {
  const ToyScene& toy = shared_toy_scene();
  const PlannerScene scene = toy.scene();

  AnnealingSchedule schedule;
  schedule.steps = 70000;
  schedule.t0 = 500.0;

  Eigen::Vector3d center;
  double radius = 0.0;
  toy.disk.bounding_sphere(center, radius);
  const double shell = schedule.shell_factor * radius;

  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull}) {
    const GraspCandidate annealed = anneal(scene, schedule, seed);

    Rng rng(seed + 1000);
    double best_random = std::numeric_limits<double>::max();
    PlannerState state;
    state.amplitudes = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < schedule.steps; ++i) {
      Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
      while (dir.norm() < 1e-9) dir = {rng.normal(), rng.normal(), rng.normal()};
      state.wrist_position = center + shell * std::cbrt(rng.uniform01()) * dir.normalized();
      state.wrist_rotation = log_rotation(random_rotation(rng));
      for (int j = 0; j < 2; ++j)
        state.amplitudes[j] = rng.uniform(toy.hand.eigengrasp.amplitude_bounds[j][0],
                                          toy.hand.eigengrasp.amplitude_bounds[j][1]);
      best_random = std::min(best_random, evaluate_state(state, scene).hybrid);
    }
    CHECK(annealed.energy.hybrid < best_random);
  }
}

TEST_CASE("palm-only weights drive the wrist into the selected cluster") {
  const ToyScene& toy = shared_toy_scene();
  PlannerScene scene = toy.scene();
  scene.params.weights.alpha = 0.0;
  scene.params.weights.beta = 0.0;
  scene.params.weights.gamma = 1.0;

  AnnealingSchedule schedule;
  schedule.steps = 5000;
  schedule.t0 = 500.0;

  int converged = 0;
  for (std::uint64_t seed : {21ull, 22ull, 23ull, 24ull, 25ull}) {
    const GraspCandidate candidate = anneal(scene, schedule, seed);
    const Eigen::Vector3d palm =
        (candidate.state.wrist() * toy.hand.palm_frame).translation();
    const HeatmapQuery q = query_score(toy.heatmap, *toy.object_query, palm);
    if (q.score > scene.params.palm.score_threshold) ++converged;
  }
  CHECK(converged >= 4);
}

TEST_CASE("finalize: touching fingers stay put, closing reaches the disk") {
  const ToyScene& toy = shared_toy_scene();
  const PlannerScene scene = toy.scene();

  // Hand wrapped around the disk rim from above, palm 20 mm over the top.
  GraspCandidate candidate;
  candidate.state.amplitudes = Eigen::VectorXd::Zero(2);
  candidate.state.wrist_position = Eigen::Vector3d(0, 0, 16.0 + 20.0);
  candidate.state.wrist_rotation = Eigen::Vector3d(M_PI, 0, 0);  // palm faces the disk
  candidate.q_full = amplitudes_to_joints(toy.hand, candidate.state.amplitudes);

  FinalizeParams params;
  const FinalizeResult closed = finalize_grasp(candidate, scene, params);
  CHECK(!closed.non_grasping);

  // The closing sweep decreased each moving finger's tip distance monotonically
  // (convex object): replay the sweep and record the distances.
  {
    Eigen::VectorXd q = candidate.q_full;
    const Transform wrist = candidate.state.wrist();
    double previous = std::numeric_limits<double>::max();
    for (int step = 0; step < 200; ++step) {
      const std::vector<WorldContact> contacts = world_contacts(toy.hand, wrist, q);
      const double tip_distance =
          scene.object_query.closest_point(contacts[4].position).distance;
      if (tip_distance < params.contact_threshold_mm) break;
      CHECK(tip_distance <= previous + 1e-9);
      previous = tip_distance;
      for (int j = 0; j < 2; ++j) {
        const int at = toy.hand.finger_offset(1) + j;
        q[at] = std::clamp(q[at] + params.close_step_rad,
                           toy.hand.fingers[1].joints[j].lower,
                           toy.hand.fingers[1].joints[j].upper);
      }
    }
  }

  // Already-touching fingers do not move.
  GraspCandidate touching = candidate;
  touching.q_full = closed.q_closed;
  // Rebuild amplitudes is not possible in general; finalize reads amplitudes,
  // so emulate by setting the origin posture to the closed config.
  HandModel pre_closed = toy.hand;
  pre_closed.eigengrasp.origin_posture = closed.q_closed;
  const PlannerScene scene_closed{pre_closed, toy.disk,   *toy.object_query,
                                  *toy.region_query, toy.region, toy.heatmap,
                                  toy.params};
  GraspCandidate zero;
  zero.state.amplitudes = Eigen::VectorXd::Zero(2);
  zero.state.wrist_position = candidate.state.wrist_position;
  zero.state.wrist_rotation = candidate.state.wrist_rotation;
  const FinalizeResult again = finalize_grasp(zero, scene_closed, params);
  CHECK((again.q_closed - closed.q_closed).cwiseAbs().maxCoeff() < 0.011);

  // Object far outside the sweep: flagged, not thrown.
  GraspCandidate lost = candidate;
  lost.state.wrist_position = Eigen::Vector3d(500, 500, 400);
  lost.state.wrist_rotation = Eigen::Vector3d::Zero();
  const FinalizeResult missed = finalize_grasp(lost, scene, params);
  CHECK(missed.non_grasping);
}

}  // TEST_SUITE
