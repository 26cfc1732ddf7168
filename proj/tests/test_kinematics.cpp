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

#include "funcgrasp/common.hpp"
#include "funcgrasp/kinematics.hpp"
#include "test_util.hpp"

using namespace funcgrasp;
using test::planar_chain;
using test::random_chain;

TEST_SUITE("kinematics") {

TEST_CASE("fk: straight planar 2-link reaches (200, 0, 0)") {
  const KinematicChain chain = planar_chain({100.0, 100.0});
  JointConfig q(2);
  q << 0.0, 0.0;
  const Transform end = forward_kinematics_end(chain, q);
  CHECK((end.translation() - Eigen::Vector3d(200, 0, 0)).norm() < 1e-12);

  q << M_PI / 2.0, 0.0;
  const Transform rotated = forward_kinematics_end(chain, q);
  CHECK((rotated.translation() - Eigen::Vector3d(0, 200, 0)).norm() < 1e-9);
}

TEST_CASE("fk matches the homogeneous matrix-product oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const KinematicChain chain = random_chain(rng, 4);
    const JointConfig q = chain.random_config(rng);
    const Transform end = forward_kinematics_end(chain, q);
    const test::Mat4 oracle = test::fk_oracle(chain, q);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(end.translation()[i] - oracle[i][3]) < 1e-9);
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(end.linear()(i, j) - oracle[i][j]) < 1e-12);
    }
  }
}

TEST_CASE("fk rotations stay orthonormal") {
  Rng rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    const KinematicChain chain = random_chain(rng, 2 + trial % 5);
    const JointConfig q = chain.random_config(rng);
    const FkResult fk = forward_kinematics(chain, q);
    CHECK(orthonormality_error(fk.end_effector.linear()) < 1e-9);
    for (const Transform& frame : fk.link_frames)
      CHECK(orthonormality_error(frame.linear()) < 1e-9);
  }
}

TEST_CASE("fk rejects mismatched joint vectors") {
  const KinematicChain chain = planar_chain({100.0, 100.0});
  CHECK_THROWS_AS(forward_kinematics_end(chain, JointConfig::Zero(3)), ConfigError);
}

TEST_CASE("jacobian: planar 2-link columns at zero config") {
  const KinematicChain chain = planar_chain({100.0, 100.0});
  const Jacobian jac = chain_jacobian(chain, JointConfig::Zero(2));
  CHECK((jac.col(0).head<3>() - Eigen::Vector3d(0, 200, 0)).norm() < 1e-12);
  CHECK((jac.col(1).head<3>() - Eigen::Vector3d(0, 100, 0)).norm() < 1e-12);
  CHECK((jac.col(0).tail<3>() - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("jacobian: single joint with 100 mm link") {
  const KinematicChain chain = planar_chain({100.0});
  const Jacobian jac = chain_jacobian(chain, JointConfig::Zero(1));
  CHECK((jac.col(0).head<3>() - Eigen::Vector3d(0, 100, 0)).norm() < 1e-12);
  CHECK((jac.col(0).tail<3>() - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("jacobian linear block matches central finite differences") {
  Rng rng(103);
  constexpr double kStep = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const KinematicChain chain = random_chain(rng, 2 + trial % 4);
    const JointConfig q = chain.random_config(rng);
    const Jacobian jac = chain_jacobian(chain, q);
    for (int i = 0; i < chain.dof(); ++i) {
      JointConfig qp = q, qm = q;
      qp[i] += kStep;
      qm[i] -= kStep;
      const Eigen::Vector3d fd = (forward_kinematics_end(chain, qp).translation() -
                                  forward_kinematics_end(chain, qm).translation()) /
                                 (2.0 * kStep);
      CHECK((jac.col(i).head<3>() - fd).norm() < 1e-4);
    }
  }
}

TEST_CASE("joint-limit weights: identity at midpoints, shrink near limits") {
  const KinematicChain chain = planar_chain({100.0, 100.0}, -1.0, 1.0);
  const JointConfig mid = chain.midpoint_config();
  CHECK((weighted_jacobian(chain, mid) - chain_jacobian(chain, mid)).norm() == 0.0);

  JointConfig near(2);
  near << 0.98, 0.98;  // 99% of the [-1, 1] range
  const Jacobian jw = weighted_jacobian(chain, near);
  const Jacobian j = chain_jacobian(chain, near);
  for (int i = 0; i < 2; ++i) CHECK(jw.col(i).norm() < j.col(i).norm());

  JointConfig at_limit(2);
  at_limit << 1.0, 0.0;
  const Eigen::VectorXd w = joint_limit_weights(chain, at_limit);
  CHECK(w[0] == kJointWeightMax);
}

TEST_CASE("weighted column norm decreases monotonically toward the limit") {
  // Single joint: the raw column norm is constant, so the scan isolates the
  // weighting.
  const KinematicChain chain = planar_chain({100.0}, -1.0, 1.0);
  double prev = std::numeric_limits<double>::max();
  for (double q = 0.0; q <= 0.999; q += 0.037) {
    JointConfig config(1);
    config << q;
    const double norm = weighted_jacobian(chain, config).col(0).norm();
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("directional manipulability: planar 2-link closed form") {
  const KinematicChain chain = planar_chain({100.0, 100.0});
  const JointConfig q = chain.midpoint_config();  // zeros: J_w = J
  // J_lin J_lin^T has single nonzero eigenvalue 5e4 mm^2 along (0, 1, 0).
  CHECK(directional_manipulability(chain, q, {0, 1, 0}) == doctest::Approx(5e4).epsilon(1e-9));
  CHECK(directional_manipulability(chain, q, {1, 0, 0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(directional_manipulability(chain, q, {0, 0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("directional manipulability matches the closed-form eigensolver oracle") {
  Rng rng(104);
  for (int trial = 0; trial < 60; ++trial) {
    const KinematicChain chain = random_chain(rng, 3);
    const JointConfig q = chain.random_config(rng);
    Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
    t.normalize();

    const Jacobian jw = weighted_jacobian(chain, q);
    const Eigen::Matrix3d gram = jw.topRows<3>() * jw.topRows<3>().transpose();
    const test::Eig3 oracle = test::symmetric_eig3_oracle(gram);

    double expected = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;  // sign flips
      expected += std::abs(t.dot(sign * oracle.vectors[k])) * std::max(oracle.values[k], 0.0);
    }
    const double got = directional_manipulability(chain, q, t);
    CHECK(got == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("directional manipulability is frame invariant") {
  Rng rng(105);
  for (int trial = 0; trial < 20; ++trial) {
    KinematicChain chain = random_chain(rng, 3);
    const JointConfig q = chain.random_config(rng);
    Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
    t.normalize();
    const double base = directional_manipulability(chain, q, t);

    const Eigen::Matrix3d rot = random_rotation(rng);
    KinematicChain rotated = chain;
    rotated.base_frame = make_transform(rot, Eigen::Vector3d::Zero()) * chain.base_frame;
    const double moved = directional_manipulability(rotated, q, rot * t);
    CHECK(moved == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("eigendecomposition consistency: sum (t.v)^2 lambda = t' G t") {
  Rng rng(106);
  for (int trial = 0; trial < 40; ++trial) {
    const KinematicChain chain = random_chain(rng, 4);
    const JointConfig q = chain.random_config(rng);
    Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
    t.normalize();
    const Jacobian jw = weighted_jacobian(chain, q);
    const Eigen::Matrix3d gram = jw.topRows<3>() * jw.topRows<3>().transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(gram);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double proj = t.dot(eig.eigenvectors().col(k));
      sum += proj * proj * eig.eigenvalues()[k];
    }
    const double direct = t.dot(gram * t);
    CHECK(sum == doctest::Approx(direct).epsilon(1e-6));
  }
}

TEST_CASE("ik: generate-by-fk targets succeed at > 95%") {
  Rng rng(107);
  // Finger-like 3-DoF chain: abduction + two flexion joints.
  KinematicChain chain;
  JointSpec j0, j1, j2;
  j0.name = "abduct";
  j0.axis = Eigen::Vector3d::UnitZ();
  j0.lower = -0.45;
  j0.upper = 0.45;
  j1.name = "mcp";
  j1.axis = Eigen::Vector3d::UnitY();
  j1.origin = translation({10, 0, 0});
  j1.lower = -0.3;
  j1.upper = 1.9;
  j2.name = "pip";
  j2.axis = Eigen::Vector3d::UnitY();
  j2.origin = translation({90, 0, 0});
  j2.lower = 0.0;
  j2.upper = 1.9;
  chain.joints = {j0, j1, j2};
  chain.end_offset = translation({70, 0, 0});
  int successes = 0;
  IkOptions opts;
  opts.restarts = 10;
  for (int trial = 0; trial < 200; ++trial) {
    const JointConfig q_true = chain.random_config(rng);
    const Eigen::Vector3d target = forward_kinematics_end(chain, q_true).translation();
    const auto solved = solve_ik(chain, target, chain.midpoint_config(), opts, rng);
    if (!solved) continue;
    ++successes;
    CHECK((forward_kinematics_end(chain, *solved).translation() - target).norm() <=
          opts.tol_mm);
    for (int i = 0; i < chain.dof(); ++i) {
      CHECK((*solved)[i] >= chain.joints[i].lower);
      CHECK((*solved)[i] <= chain.joints[i].upper);
    }
  }
  CHECK(successes >= 190);
}

TEST_CASE("ik: beyond total reach fails gracefully") {
  const KinematicChain chain = planar_chain({100.0, 100.0});
  Rng rng(108);
  const auto result = solve_ik(chain, {500.0, 0.0, 0.0}, chain.midpoint_config(), {}, rng);
  CHECK(!result.has_value());
}

TEST_CASE("ik: equal-length 2-link folds back to its base") {
  const KinematicChain chain = planar_chain({100.0, 100.0});
  Rng rng(109);
  IkOptions opts;
  opts.restarts = 10;
  const auto result = solve_ik(chain, {0.0, 0.0, 0.0}, chain.midpoint_config(), opts, rng);
  REQUIRE(result.has_value());
  CHECK(forward_kinematics_end(chain, *result).translation().norm() <= opts.tol_mm);
}

TEST_CASE("reverse chain: fk round trip is the exact inverse") {
  Rng rng(110);
  for (int trial = 0; trial < 40; ++trial) {
    const KinematicChain chain = random_chain(rng, 3 + trial % 3);
    const KinematicChain reversed = reverse_chain(chain);
    const JointConfig q = chain.random_config(rng);
    const Transform forward = forward_kinematics_end(chain, q);
    const Transform backward = forward_kinematics_end(reversed, reverse_config(q));
    const Transform product = forward * backward;
    CHECK((product.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("reverse chain: limits negated and swapped, reach preserved") {
  Rng rng(111);
  const KinematicChain chain = random_chain(rng, 4);
  const KinematicChain reversed = reverse_chain(chain);
  const int n = chain.dof();
  REQUIRE(reversed.dof() == n);
  for (int i = 0; i < n; ++i) {
    CHECK(reversed.joints[i].lower == doctest::Approx(-chain.joints[n - 1 - i].upper));
    CHECK(reversed.joints[i].upper == doctest::Approx(-chain.joints[n - 1 - i].lower));
  }

  // Straight planar finger: same physical link lengths in both directions.
  const KinematicChain straight = planar_chain({80.0, 60.0, 40.0});
  CHECK(reverse_chain(straight).total_reach() ==
        doctest::Approx(straight.total_reach()).epsilon(1e-12));
}

TEST_CASE("reverse config is an involution") {
  JointConfig q(4);
  q << 0.1, -0.4, 0.9, 0.3;
  CHECK((reverse_config(reverse_config(q)) - q).norm() == 0.0);
}

}  // TEST_SUITE
