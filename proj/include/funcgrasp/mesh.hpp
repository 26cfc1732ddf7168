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

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "funcgrasp/random.hpp"
#include "funcgrasp/transform.hpp"

namespace funcgrasp {

enum class MeshFormat { kObj, kStlAscii };

/// Indexed triangle mesh, mm units, outward unit face normals. Degenerate
/// faces are dropped at load; closed meshes are reoriented to positive signed
/// volume if needed.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Eigen::Vector3d> face_normals;
  bool closed = false;
  int dropped_degenerate = 0;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }

  double face_area(int face) const;
  Eigen::Vector3d face_centroid(int face) const;
  double total_area() const;
  double signed_volume() const;

  void aabb(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const;
  /// Center = AABB center, radius = max vertex distance from it.
  void bounding_sphere(Eigen::Vector3d& center, double& radius) const;

  /// Recomputes normals, drops degenerate faces, fixes global orientation,
  /// detects closedness. Called by the loaders.
  void finalize();
};

TriangleMesh load_mesh(std::string_view bytes, MeshFormat format);
TriangleMesh load_mesh_file(const std::string& path);

struct SurfaceSample {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  int face_id = -1;
};

/// Exactly n samples, area-weighted uniform over the surface; deterministic
/// for a given rng state.
std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, int n, Rng& rng);

struct ClosestHit {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  int face_id = -1;
  double distance = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

/// BVH-accelerated queries over a mesh or a subset of its faces. Immutable
/// after construction; safe for concurrent readers.
class MeshQuery {
 public:
  explicit MeshQuery(const TriangleMesh& mesh);
  MeshQuery(const TriangleMesh& mesh, const std::vector<int>& face_subset);

  /// Exact minimum over the covered faces.
  ClosestHit closest_point(const Eigen::Vector3d& p) const;

  /// Signed distance to the surface, negative inside (ray-parity test).
  /// Meaningful only for closed meshes covering all faces.
  double signed_distance(const Eigen::Vector3d& p) const;

  bool inside(const Eigen::Vector3d& p) const;

  const TriangleMesh& mesh() const { return *mesh_; }

 private:
  struct Node {
    Eigen::Vector3d lo, hi;
    int left = -1, right = -1;   // children, -1 at leaves
    int first = 0, count = 0;    // leaf face range into face_ids_
  };

  int build(int first, int count, std::vector<Eigen::Vector3d>& centroids);
  void closest_recursive(int node, const Eigen::Vector3d& p, ClosestHit& best) const;
  /// Counts crossings; returns false when a hit is too close to an edge to
  /// trust parity, so the caller retries another direction.
  bool count_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                       int& crossings) const;

  const TriangleMesh* mesh_;
  std::vector<int> face_ids_;
  std::vector<Node> nodes_;
};

inline double penetration_depth(const MeshQuery& query, const Eigen::Vector3d& p) {
  return query.signed_distance(p);
}

/// Closest point on one triangle (Ericson's region test). Exposed for tests.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p,
                                          const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c);

/// Annotated functional part of an object: a face subset plus the task
/// direction the functional fingertip must move in, and the single surface
/// point the fingertip is anchored at during reachability sampling.
struct FunctionalRegion {
  std::vector<int> face_ids;
  Eigen::Vector3d task_direction = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d meeting_point = Eigen::Vector3d::Zero();

  void validate(const TriangleMesh& mesh) const;
};

/// Faces whose centroid lies inside the sphere.
std::vector<int> select_faces_by_sphere(const TriangleMesh& mesh,
                                        const Eigen::Vector3d& center, double radius);

/// Area-weighted centroid of the region faces, projected back onto them.
Eigen::Vector3d region_meeting_point(const TriangleMesh& mesh,
                                     const std::vector<int>& face_ids);

}  // namespace funcgrasp
