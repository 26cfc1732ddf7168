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

#include "funcgrasp/builtin.hpp"
#include "funcgrasp/quality.hpp"
#include "test_util.hpp"

using namespace funcgrasp;

namespace {

Contact rim_contact(double angle, double mu, int edges = 8, double torsion = 0.2) {
  Contact contact;
  contact.position = Eigen::Vector3d(std::cos(angle), std::sin(angle), 0.0);
  contact.normal = -contact.position.normalized();  // inward
  contact.mu = mu;
  contact.cone_edges = edges;
  contact.torsion_coeff = torsion;
  return contact;
}

/// Three soft contacts at 120 degrees on a unit-radius rim.
std::vector<Contact> symmetric_rim(double mu) {
  return {rim_contact(0.0, mu), rim_contact(2.0 * M_PI / 3.0, mu),
          rim_contact(4.0 * M_PI / 3.0, mu)};
}

}  // namespace

TEST_SUITE("quality") {

TEST_CASE("contact wrenches: degenerate cone, zero arm, cone bound") {
  Contact frictionless;
  frictionless.position = {10, 0, 0};
  frictionless.normal = {0, 0, 1};
  frictionless.mu = 0.0;
  frictionless.torsion_coeff = 0.0;
  const std::vector<Wrench> single = contact_wrenches(frictionless, {0, 0, 0}, 5.0);
  REQUIRE(single.size() == 1);
  CHECK((single[0].head<3>() - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);

  // Contact at the torque origin: only the torsion wrenches carry torque.
  Contact centered;
  centered.position = {0, 0, 0};
  centered.normal = {0, 0, 1};
  centered.mu = 0.6;
  centered.torsion_coeff = 0.5;
  const std::vector<Wrench> wrenches = contact_wrenches(centered, {0, 0, 0}, 2.0);
  REQUIRE(wrenches.size() == 10);
  for (size_t i = 0; i + 2 < wrenches.size(); ++i)
    CHECK(wrenches[i].tail<3>().norm() < 1e-12);
  CHECK(wrenches[8].tail<3>().norm() == doctest::Approx(0.25));  // e / lambda
  CHECK((wrenches[8] + wrenches[9]).norm() < 1e-12);

  // Every edge force stays on the friction cone boundary.
  Contact generic;
  generic.position = {3, -4, 7};
  generic.normal = Eigen::Vector3d(0.3, -0.5, 0.81).normalized();
  generic.mu = 0.8;
  generic.cone_edges = 64;
  generic.torsion_coeff = 0.0;
  for (const Wrench& w : contact_wrenches(generic, {0, 0, 0}, 1.0)) {
    const Eigen::Vector3d f = w.head<3>();
    const double fn = f.dot(generic.normal);
    const double ft = (f - fn * generic.normal).norm();
    CHECK(fn == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ft <= generic.mu * fn + 1e-9);
    CHECK(ft == doctest::Approx(generic.mu).epsilon(1e-9));
  }
}

TEST_CASE("epsilon: single contact cannot close") {
  const std::vector<Contact> one = {rim_contact(0.0, 0.8)};
  const WrenchSet set = build_wrench_set(one, {0, 0, 0}, 1.0);
  CHECK(epsilon_quality(set) == 0.0);
}

TEST_CASE("epsilon: one-sided frictionless contacts cannot close") {
  std::vector<Contact> same_side;
  for (double x : {-0.5, 0.0, 0.5}) {
    Contact c;
    c.position = {x, 0.3 * x, 1.0};
    c.normal = {0, 0, -1};  // all pushing -z
    c.mu = 0.0;
    c.torsion_coeff = 0.0;
    same_side.push_back(c);
  }
  const WrenchSet set = build_wrench_set(same_side, {0, 0, 0}, 1.0);
  CHECK(epsilon_quality(set) == 0.0);
}

TEST_CASE("epsilon: symmetric rim grasp closes and grows with friction") {
  EpsilonOptions opts;
  opts.directions = 16384;  // unit-test budget; acceptance runs the full size

  double previous = 0.0;
  for (double mu : {0.2, 0.5, 0.8}) {
    const WrenchSet set = build_wrench_set(symmetric_rim(mu), {0, 0, 0}, 1.0);
    const double eps = epsilon_quality(set, opts);
    if (mu == 0.5) CHECK(eps > 0.0);
    CHECK(eps >= previous - 1e-9);
    previous = eps;
  }
}

TEST_CASE("epsilon: sampled estimate within 10% of the 10x-density estimate") {
  EpsilonOptions coarse;
  coarse.directions = 8192;
  EpsilonOptions dense = coarse;
  dense.directions = coarse.directions * 10;

  for (double mu : {0.5, 0.8}) {
    const WrenchSet set = build_wrench_set(symmetric_rim(mu), {0, 0, 0}, 1.0);
    const double sampled = epsilon_quality(set, coarse);
    const double oracle = epsilon_quality(set, dense);
    REQUIRE(oracle > 0.0);
    CHECK(std::abs(sampled - oracle) <= 0.10 * oracle);
  }
}

TEST_CASE("epsilon is invariant under a rigid rotation of the grasp") {
  const std::vector<Contact> contacts = symmetric_rim(0.6);
  const WrenchSet set = build_wrench_set(contacts, {0, 0, 0}, 1.0);
  EpsilonOptions opts;
  opts.directions = 16384;
  const double base = epsilon_quality(set, opts);
  REQUIRE(base > 0.0);

  Rng rng(601);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::Matrix3d rot = random_rotation(rng);
    std::vector<Contact> rotated = contacts;
    for (Contact& c : rotated) {
      c.position = rot * c.position;
      c.normal = rot * c.normal;
    }
    const WrenchSet rotated_set = build_wrench_set(rotated, {0, 0, 0}, 1.0);
    const double eps = epsilon_quality(rotated_set, opts);
    CHECK(std::abs(eps - base) <= 0.05 * base);
  }
}

TEST_CASE("nu: rank-deficient sets have zero volume") {
  std::vector<Contact> parallel;
  for (double x : {-1.0, 0.0, 1.0}) {
    Contact c;
    c.position = {x, 0, 0};
    c.normal = {0, 0, 1};
    c.mu = 0.0;  // forces all along +z, torques along y: rank 2
    c.torsion_coeff = 0.0;
    parallel.push_back(c);
  }
  const WrenchSet set = build_wrench_set(parallel, {0, 0, 0}, 1.0);
  CHECK(set.affine_rank() < 6);
  const NuEstimate estimate = nu_quality(set, 10000, 1);
  CHECK(estimate.nu == 0.0);
}

TEST_CASE("nu: scaling wrenches by 2 scales the volume by 2^6") {
  const WrenchSet set = build_wrench_set(symmetric_rim(0.8), {0, 0, 0}, 1.0);
  WrenchSet doubled = set;
  for (Wrench& w : doubled.wrenches) w *= 2.0;

  const int samples = 120000;
  const NuEstimate base = nu_quality(set, samples, 7);
  const NuEstimate big = nu_quality(doubled, samples, 8);
  REQUIRE(base.nu > 0.0);
  const double expected = 64.0 * base.nu;
  const double tolerance = 3.0 * std::sqrt(64.0 * 64.0 * base.standard_error *
                                               base.standard_error +
                                           big.standard_error * big.standard_error);
  CHECK(std::abs(big.nu - expected) <= tolerance);
}

TEST_CASE("nu is deterministic and worker-count independent") {
  const WrenchSet set = build_wrench_set(symmetric_rim(0.5), {0, 0, 0}, 1.0);
  const NuEstimate one = nu_quality(set, 30000, 42, 1);
  const NuEstimate four = nu_quality(set, 30000, 42, 4);
  CHECK(one.nu == four.nu);
  CHECK(one.standard_error == four.standard_error);
}

TEST_CASE("detect contacts: threshold and surface projection") {
  const HandModel hand = builtin_hand_four_finger();
  const TriangleMesh cube = make_box_mesh({-500, -500, -500}, {500, 500, 500}, 250.0);
  const MeshQuery query(cube);
  FrictionParams friction;

  // Rest posture, wrist placed so the palm contact sits 0.2 mm above +z face.
  const Eigen::VectorXd q = Eigen::VectorXd::Zero(hand.total_dof());
  {
    const Transform wrist =
        make_transform(rotation_about(Eigen::Vector3d::UnitX(), M_PI), {0, 0, 512.2});
    const std::vector<Contact> contacts =
        detect_contacts(q, hand, wrist, query, friction);
    REQUIRE(!contacts.empty());
    for (const Contact& contact : contacts) {
      CHECK(query.closest_point(contact.position).distance < 1e-6);
      CHECK(contact.mu == friction.mu);
      CHECK(contact.cone_edges == friction.cone_edges);
      CHECK(contact.torsion_coeff == doctest::Approx(friction.torsion_coeff()));
      // Inward means against the outward surface normal.
      CHECK(contact.normal.dot(query.closest_point(contact.position).normal) < 0.0);
    }
  }
  {
    const Transform wrist =
        make_transform(rotation_about(Eigen::Vector3d::UnitX(), M_PI), {0, 0, 517.0});
    const std::vector<Contact> contacts =
        detect_contacts(q, hand, wrist, query, friction);
    CHECK(contacts.empty());  // 5 mm gap: nothing within threshold
  }
}

TEST_CASE("quality report wiring: empty contacts and closed rim grasp") {
  const QualityReport empty = evaluate_quality({}, {0, 0, 0}, 1.0);
  CHECK(empty.epsilon == 0.0);
  CHECK(!empty.force_closure);

  QualityOptions opts;
  opts.epsilon.directions = 16384;
  opts.nu_samples = 60000;
  const QualityReport report = evaluate_quality(symmetric_rim(0.8), {0, 0, 0}, 1.0, opts);
  CHECK(report.force_closure);
  CHECK(report.epsilon > 0.0);
  CHECK(report.epsilon < 1.0);
  CHECK(report.nu > 0.0);
  CHECK(report.method == "direction-sampling");
}

}  // TEST_SUITE
