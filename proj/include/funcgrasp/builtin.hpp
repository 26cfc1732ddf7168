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

#include "funcgrasp/hand.hpp"
#include "funcgrasp/mesh.hpp"

namespace funcgrasp {

/// Closed axis-z cylinder from z = 0 to z = height, triangulated side rings
/// plus cap fans.
TriangleMesh make_cylinder_mesh(double radius_mm, double height_mm, int segments = 48,
                                int rings = 8);

/// Closed axis-aligned box with faces subdivided into ~cell_mm grid cells.
TriangleMesh make_box_mesh(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                           double cell_mm = 10.0);

/// Icosphere of the given radius; 20 * 4^subdivisions faces.
TriangleMesh make_icosphere(double radius_mm, int subdivisions = 2);

/// Four-finger hand: opposing thumb plus three parallel fingers, the middle
/// one functional. Three joints per finger (spread + two flexion).
HandModel builtin_hand_four_finger();

/// Three-finger hand with wider, longer fingers: one opposing, two coupled,
/// one of the coupled pair functional.
HandModel builtin_hand_three_finger();

}  // namespace funcgrasp
