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

#include "funcgrasp/builtin.hpp"

#include <cmath>
#include <map>

namespace funcgrasp {

TriangleMesh make_cylinder_mesh(double radius_mm, double height_mm, int segments,
                                int rings) {
  TriangleMesh mesh;
  for (int k = 0; k <= rings; ++k) {
    const double z = height_mm * static_cast<double>(k) / rings;
    for (int i = 0; i < segments; ++i) {
      const double a = 2.0 * M_PI * i / segments;
      mesh.vertices.emplace_back(radius_mm * std::cos(a), radius_mm * std::sin(a), z);
    }
  }
  const auto ring_vertex = [&](int k, int i) { return k * segments + (i % segments); };
  for (int k = 0; k < rings; ++k)
    for (int i = 0; i < segments; ++i) {
      const int a = ring_vertex(k, i), b = ring_vertex(k, i + 1);
      const int c = ring_vertex(k + 1, i), d = ring_vertex(k + 1, i + 1);
      mesh.faces.push_back({a, b, d});
      mesh.faces.push_back({a, d, c});
    }
  const int bottom_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, 0.0);
  const int top_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, height_mm);
  for (int i = 0; i < segments; ++i) {
    mesh.faces.push_back({bottom_center, ring_vertex(0, i + 1), ring_vertex(0, i)});
    mesh.faces.push_back({top_center, ring_vertex(rings, i), ring_vertex(rings, i + 1)});
  }
  mesh.finalize();
  return mesh;
}

namespace {

struct WeldMap {
  std::map<std::array<double, 3>, int> ids;
  std::vector<Eigen::Vector3d>* vertices;

  int get(double x, double y, double z) {
    const std::array<double, 3> key{x, y, z};
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(vertices->size()));
    if (inserted) vertices->emplace_back(x, y, z);
    return it->second;
  }
};

}  // namespace

TriangleMesh make_box_mesh(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                           double cell_mm) {
  TriangleMesh mesh;
  WeldMap weld{{}, &mesh.vertices};

  std::array<int, 3> cells;
  std::array<std::vector<double>, 3> grid;
  for (int axis = 0; axis < 3; ++axis) {
    cells[axis] = std::max(1, static_cast<int>(std::lround((hi[axis] - lo[axis]) / cell_mm)));
    for (int i = 0; i <= cells[axis]; ++i)
      grid[axis].push_back(lo[axis] + (hi[axis] - lo[axis]) * i / cells[axis]);
  }

  // One subdivided quad grid per box face; u, v are the in-plane axes.
  const auto emit_face = [&](int fixed_axis, bool positive_side, int u_axis, int v_axis) {
    const double w = positive_side ? hi[fixed_axis] : lo[fixed_axis];
    for (int i = 0; i < cells[u_axis]; ++i)
      for (int j = 0; j < cells[v_axis]; ++j) {
        double p[3], q[3], r[3], s[3];
        p[fixed_axis] = q[fixed_axis] = r[fixed_axis] = s[fixed_axis] = w;
        p[u_axis] = grid[u_axis][i];
        p[v_axis] = grid[v_axis][j];
        q[u_axis] = grid[u_axis][i + 1];
        q[v_axis] = grid[v_axis][j];
        r[u_axis] = grid[u_axis][i + 1];
        r[v_axis] = grid[v_axis][j + 1];
        s[u_axis] = grid[u_axis][i];
        s[v_axis] = grid[v_axis][j + 1];
        const int a = weld.get(p[0], p[1], p[2]);
        const int b = weld.get(q[0], q[1], q[2]);
        const int c = weld.get(r[0], r[1], r[2]);
        const int d = weld.get(s[0], s[1], s[2]);
        if (positive_side) {
          mesh.faces.push_back({a, b, c});
          mesh.faces.push_back({a, c, d});
        } else {
          mesh.faces.push_back({a, c, b});
          mesh.faces.push_back({a, d, c});
        }
      }
  };

  emit_face(0, true, 1, 2);
  emit_face(0, false, 1, 2);
  emit_face(1, true, 2, 0);
  emit_face(1, false, 2, 0);
  emit_face(2, true, 0, 1);
  emit_face(2, false, 0, 1);
  mesh.finalize();
  return mesh;
}

TriangleMesh make_icosphere(double radius_mm, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> vertices = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Eigen::Vector3d& v : vertices) v = v.normalized() * radius_mm;
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    const auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] =
          midpoints.try_emplace({key.first, key.second}, static_cast<int>(vertices.size()));
      if (inserted)
        vertices.push_back(((vertices[a] + vertices[b]) / 2.0).normalized() * radius_mm);
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.faces = std::move(faces);
  mesh.finalize();
  return mesh;
}

namespace {

/// Finger in a local frame: extends +x, flexion curls the tip toward +z.
KinematicChain standard_finger(double mount_mm, double proximal_mm, double distal_mm,
                               double spread_rad, double flex_lo, double flex_hi) {
  KinematicChain chain;
  JointSpec spread;
  spread.name = "spread";
  spread.axis = Eigen::Vector3d::UnitZ();
  spread.lower = -spread_rad;
  spread.upper = spread_rad;
  JointSpec base;
  base.name = "flex_base";
  base.axis = -Eigen::Vector3d::UnitY();
  base.origin = translation({mount_mm, 0, 0});
  base.lower = flex_lo;
  base.upper = flex_hi;
  JointSpec mid;
  mid.name = "flex_mid";
  mid.axis = -Eigen::Vector3d::UnitY();
  mid.origin = translation({proximal_mm, 0, 0});
  mid.lower = 0.0;
  mid.upper = flex_hi;
  chain.joints = {spread, base, mid};
  chain.end_offset = translation({distal_mm, 0, 0});
  return chain;
}

VirtualContact finger_contact(int finger, int link, const Eigen::Vector3d& position,
                              bool functional = false) {
  VirtualContact contact;
  contact.finger = finger;
  contact.link = link;
  contact.local_position = position;
  contact.local_normal = Eigen::Vector3d::UnitZ();
  contact.functional = functional;
  return contact;
}

VirtualContact palm_contact(const Eigen::Vector3d& position) {
  VirtualContact contact;
  contact.finger = -1;
  contact.link = -1;
  contact.local_position = position;
  contact.local_normal = Eigen::Vector3d::UnitZ();
  return contact;
}

const Eigen::Matrix3d kFlipX = rotation_about(Eigen::Vector3d::UnitZ(), M_PI);

}  // namespace

HandModel builtin_hand_four_finger() {
  HandModel hand;
  hand.name = "four_finger";

  KinematicChain thumb = standard_finger(6, 36, 26, 0.6, -0.25, 1.9);
  thumb.base_frame = make_transform(kFlipX, {-24, 0, 0});
  KinematicChain index = standard_finger(6, 36, 26, 0.35, -0.25, 1.9);
  index.base_frame = translation({24, -26, 0});
  KinematicChain middle = standard_finger(6, 36, 26, 0.35, -0.25, 1.9);
  middle.base_frame = translation({24, 0, 0});
  KinematicChain ring = standard_finger(6, 36, 26, 0.35, -0.25, 1.9);
  ring.base_frame = translation({24, 26, 0});
  hand.fingers = {thumb, index, middle, ring};
  hand.functional_finger = 2;
  hand.functional_link = 2;

  hand.virtual_contacts = {
      palm_contact({0, 0, 8}),
      finger_contact(0, 1, {18, 0, 0}), finger_contact(0, 2, {20, 0, 0}),
      finger_contact(1, 1, {18, 0, 0}), finger_contact(1, 2, {20, 0, 0}),
      finger_contact(2, 1, {18, 0, 0}),
      finger_contact(2, 2, {24, 0, 0}, /*functional=*/true),
      finger_contact(3, 1, {18, 0, 0}), finger_contact(3, 2, {20, 0, 0}),
  };

  const int n = hand.total_dof();  // 12
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd flex = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd spread = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < 4; ++f) {
    const int at = hand.finger_offset(f);
    origin[at + 1] = 0.35;
    origin[at + 2] = 0.3;
    if (f != hand.functional_finger) {
      flex[at + 1] = 1.0;
      flex[at + 2] = 1.0;
    }
  }
  // Functional finger rests slightly straighter, ready to press.
  origin[hand.finger_offset(2) + 1] = 0.25;
  origin[hand.finger_offset(2) + 2] = 0.2;
  spread[hand.finger_offset(1) + 0] = -1.0;
  spread[hand.finger_offset(3) + 0] = 1.0;
  spread[hand.finger_offset(0) + 0] = 0.5;

  hand.eigengrasp.origin_posture = origin;
  hand.eigengrasp.basis_vectors = {flex, spread};
  hand.eigengrasp.amplitude_bounds = {{-0.5, 1.5}, {-0.3, 0.3}};

  hand.closing_directions.resize(4);
  for (int f = 0; f < 4; ++f) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(3);
    dir << 0.0, 1.0, 1.0;
    hand.closing_directions[f] = dir;
  }

  hand.validate();
  return hand;
}

HandModel builtin_hand_three_finger() {
  HandModel hand;
  hand.name = "three_finger";

  KinematicChain functional = standard_finger(8, 50, 34, 0.45, -0.2, 2.0);
  functional.base_frame = translation({30, 0, 0});
  KinematicChain coupled = standard_finger(8, 50, 34, 0.45, -0.2, 2.0);
  coupled.base_frame = translation({30, 34, 0});
  KinematicChain opposing = standard_finger(8, 50, 34, 0.45, -0.2, 2.0);
  opposing.base_frame = make_transform(kFlipX, {-30, 17, 0});
  hand.fingers = {functional, coupled, opposing};
  hand.functional_finger = 0;
  hand.functional_link = 2;

  hand.virtual_contacts = {
      palm_contact({0, 10, 10}),
      finger_contact(0, 1, {25, 0, 0}),
      finger_contact(0, 2, {30, 0, 0}, /*functional=*/true),
      finger_contact(1, 1, {25, 0, 0}), finger_contact(1, 2, {28, 0, 0}),
      finger_contact(2, 1, {25, 0, 0}), finger_contact(2, 2, {28, 0, 0}),
  };

  const int n = hand.total_dof();  // 9
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd flex = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd spread = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < 3; ++f) {
    const int at = hand.finger_offset(f);
    origin[at + 1] = 0.4;
    origin[at + 2] = 0.3;
    if (f != hand.functional_finger) {
      flex[at + 1] = 1.0;
      flex[at + 2] = 1.0;
    }
  }
  origin[hand.finger_offset(0) + 1] = 0.3;
  origin[hand.finger_offset(0) + 2] = 0.2;
  spread[hand.finger_offset(1) + 0] = 1.0;
  spread[hand.finger_offset(2) + 0] = -0.5;

  hand.eigengrasp.origin_posture = origin;
  hand.eigengrasp.basis_vectors = {flex, spread};
  hand.eigengrasp.amplitude_bounds = {{-0.5, 1.55}, {-0.35, 0.35}};

  hand.closing_directions.resize(3);
  for (int f = 0; f < 3; ++f) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(3);
    dir << 0.0, 1.0, 1.0;
    hand.closing_directions[f] = dir;
  }

  hand.validate();
  return hand;
}

}  // namespace funcgrasp
