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

#include <set>

#include "funcgrasp/builtin.hpp"
#include "funcgrasp/common.hpp"
#include "funcgrasp/mesh.hpp"

using namespace funcgrasp;

namespace {

// Unit cube [0,1]^3, 12 triangles, outward orientation.
const char* kCubeObj = R"(v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3
f 1 3 2
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";

TriangleMesh scaled_cube(double side_mm) {
  TriangleMesh mesh = load_mesh(kCubeObj, MeshFormat::kObj);
  for (Eigen::Vector3d& v : mesh.vertices)
    v = (v - Eigen::Vector3d(0.5, 0.5, 0.5)) * side_mm;
  mesh.finalize();
  return mesh;
}

ClosestHit brute_force_closest(const TriangleMesh& mesh, const Eigen::Vector3d& p) {
  ClosestHit best;
  best.distance = std::numeric_limits<double>::max();
  for (int face = 0; face < mesh.face_count(); ++face) {
    const auto& f = mesh.faces[face];
    const Eigen::Vector3d q = closest_point_on_triangle(
        p, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    const double d = (q - p).norm();
    if (d < best.distance) {
      best.distance = d;
      best.point = q;
      best.face_id = face;
      best.normal = mesh.face_normals[face];
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("unit cube loads closed with outward normals") {
  const TriangleMesh mesh = load_mesh(kCubeObj, MeshFormat::kObj);
  CHECK(mesh.vertex_count() == 8);
  CHECK(mesh.face_count() == 12);
  CHECK(mesh.closed);
  CHECK(mesh.dropped_degenerate == 0);
  CHECK(mesh.signed_volume() == doctest::Approx(1.0).epsilon(1e-12));
  // Outward: every face normal points away from the center.
  const Eigen::Vector3d center(0.5, 0.5, 0.5);
  for (int face = 0; face < mesh.face_count(); ++face)
    CHECK(mesh.face_normals[face].dot(mesh.face_centroid(face) - center) > 0.0);
}

TEST_CASE("degenerate faces are dropped and counted") {
  std::string obj = kCubeObj;
  obj += "v 0 0 2\nf 1 1 9\n";  // zero-area: repeated vertex
  const TriangleMesh mesh = load_mesh(obj, MeshFormat::kObj);
  CHECK(mesh.face_count() == 12);
  CHECK(mesh.dropped_degenerate == 1);
}

TEST_CASE("parse errors carry a line number; empty mesh rejected") {
  CHECK_THROWS_WITH_AS(load_mesh("v 0 0\n", MeshFormat::kObj),
                       doctest::Contains("line 1"), InputError);
  CHECK_THROWS_AS(load_mesh("# nothing\n", MeshFormat::kObj), InputError);
}

TEST_CASE("ascii stl round trip welds vertices") {
  const char* stl = R"(solid tetra
facet normal 0 0 -1
 outer loop
  vertex 0 0 0
  vertex 1 1 0
  vertex 1 0 0
 endloop
endfacet
facet normal 0 -1 0
 outer loop
  vertex 0 0 0
  vertex 1 0 0
  vertex 0 0 1
 endloop
endfacet
facet normal -1 0 0
 outer loop
  vertex 0 0 0
  vertex 0 0 1
  vertex 1 1 0
 endloop
endfacet
facet normal 1 1 1
 outer loop
  vertex 1 0 0
  vertex 1 1 0
  vertex 0 0 1
 endloop
endfacet
endsolid tetra
)";
  const TriangleMesh mesh = load_mesh(stl, MeshFormat::kStlAscii);
  CHECK(mesh.vertex_count() == 4);
  CHECK(mesh.face_count() == 4);
  CHECK(mesh.closed);
  CHECK(mesh.signed_volume() > 0.0);
}

TEST_CASE("icosphere volume approaches the analytic sphere volume") {
  const TriangleMesh sphere = make_icosphere(50.0, 2);
  CHECK(sphere.face_count() == 320);
  CHECK(sphere.closed);
  const double analytic = 4.0 / 3.0 * M_PI * 50.0 * 50.0 * 50.0;
  CHECK(sphere.signed_volume() == doctest::Approx(analytic).epsilon(0.05));
  CHECK(sphere.signed_volume() < analytic);  // inscribed polyhedron deficit
}

TEST_CASE("surface samples lie on their faces") {
  const TriangleMesh sphere = make_icosphere(50.0, 1);
  Rng rng(201);
  for (const SurfaceSample& sample : sample_surface(sphere, 500, rng)) {
    REQUIRE(sample.face_id >= 0);
    const auto& f = sphere.faces[sample.face_id];
    // Barycentric validity via closest-point residual on the owning face.
    const Eigen::Vector3d on_face = closest_point_on_triangle(
        sample.position, sphere.vertices[f[0]], sphere.vertices[f[1]],
        sphere.vertices[f[2]]);
    CHECK((on_face - sample.position).norm() < 1e-9);
  }
}

TEST_CASE("sampling is deterministic and area weighted") {
  const TriangleMesh cube = scaled_cube(1000.0);

  Rng rng_a(202), rng_b(202);
  const auto samples_a = sample_surface(cube, 100, rng_a);
  const auto samples_b = sample_surface(cube, 100, rng_b);
  REQUIRE(samples_a.size() == samples_b.size());
  for (size_t i = 0; i < samples_a.size(); ++i) {
    CHECK(samples_a[i].face_id == samples_b[i].face_id);
    CHECK((samples_a[i].position - samples_b[i].position).norm() == 0.0);
  }

  CHECK(sample_surface(cube, 1, rng_a).size() == 1);

  // 6000 samples over 6 equal sides: each side expects 1000, sigma ~28.9.
  Rng rng(203);
  const auto samples = sample_surface(cube, 6000, rng);
  std::array<int, 6> side_counts{};
  for (const auto& sample : samples) side_counts[sample.face_id / 2]++;
  const double sigma = std::sqrt(6000.0 * (1.0 / 6.0) * (5.0 / 6.0));
  for (int side = 0; side < 6; ++side)
    CHECK(std::abs(side_counts[side] - 1000.0) <= 3.0 * sigma);
}

TEST_CASE("sampling matches the area distribution (chi-squared)") {
  const TriangleMesh cube = scaled_cube(1000.0);
  Rng rng(204);
  const int n = 100000;
  const auto samples = sample_surface(cube, n, rng);
  std::vector<int> counts(cube.face_count(), 0);
  for (const auto& sample : samples) ++counts[sample.face_id];
  const double total_area = cube.total_area();
  double chi2 = 0.0;
  for (int face = 0; face < cube.face_count(); ++face) {
    const double expected = n * cube.face_area(face) / total_area;
    chi2 += (counts[face] - expected) * (counts[face] - expected) / expected;
  }
  // chi-squared with 11 dof at p = 0.001 is 31.264.
  CHECK(chi2 < 31.264);
}

TEST_CASE("closest point on an axis-aligned cube face") {
  const TriangleMesh cube = scaled_cube(1000.0);
  const MeshQuery query(cube);
  const ClosestHit hit = query.closest_point({2000.0, 0.0, 0.0});
  CHECK(hit.distance == doctest::Approx(1500.0).epsilon(1e-12));
  CHECK((hit.point - Eigen::Vector3d(500.0, 0.0, 0.0)).norm() < 1e-9);
  CHECK((hit.normal - Eigen::Vector3d(1.0, 0.0, 0.0)).norm() < 1e-12);

  // A point on the surface is at distance zero.
  CHECK(query.closest_point({500.0, 123.0, -401.0}).distance < 1e-12);
}

TEST_CASE("bvh closest point matches brute force") {
  const TriangleMesh sphere = make_icosphere(60.0, 2);
  const MeshQuery query(sphere);
  Rng rng(205);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::Vector3d p(rng.uniform(-150, 150), rng.uniform(-150, 150),
                            rng.uniform(-150, 150));
    const ClosestHit fast = query.closest_point(p);
    const ClosestHit slow = brute_force_closest(sphere, p);
    CHECK(std::abs(fast.distance - slow.distance) < 1e-9);
  }
}

TEST_CASE("penetration depth: sign and magnitude") {
  const TriangleMesh cube = scaled_cube(1000.0);
  const MeshQuery query(cube);
  CHECK(penetration_depth(query, {0, 0, 0}) == doctest::Approx(-500.0).epsilon(1e-12));
  const Eigen::Vector3d outside(800.0, 0.0, 0.0);
  CHECK(penetration_depth(query, outside) ==
        doctest::Approx(query.closest_point(outside).distance).epsilon(1e-12));

  // Walk a line through the cube: sign flips exactly at x = +/-500.
  for (double x = -900.0; x <= 900.0; x += 37.0) {
    const double sd = penetration_depth(query, {x, 31.0, -77.0});
    if (std::abs(x) < 500.0)
      CHECK(sd < 0.0);
    else
      CHECK(sd > 0.0);
  }
}

TEST_CASE("face subset queries are restricted to the subset") {
  const TriangleMesh cube = scaled_cube(1000.0);
  // Faces of the +x side only.
  std::vector<int> subset;
  for (int face = 0; face < cube.face_count(); ++face)
    if (cube.face_normals[face].x() > 0.9) subset.push_back(face);
  REQUIRE(subset.size() == 2);
  const MeshQuery query(cube, subset);
  const ClosestHit hit = query.closest_point({-2000.0, 0.0, 0.0});
  CHECK(hit.point.x() == doctest::Approx(500.0));  // far side, not the near -x face
  CHECK(hit.distance == doctest::Approx(2500.0));
}

TEST_CASE("sphere face selection and region meeting point") {
  const TriangleMesh cylinder = make_cylinder_mesh(25.0, 160.0);
  CHECK(cylinder.closed);
  const Eigen::Vector3d patch_center(25.0, 0.0, 130.0);
  const std::vector<int> faces = select_faces_by_sphere(cylinder, patch_center, 12.0);
  CHECK(faces.size() >= 4);
  const Eigen::Vector3d meeting = region_meeting_point(cylinder, faces);
  CHECK((meeting - patch_center).norm() < 12.0);
  // The meeting point sits on the selected faces.
  const MeshQuery region_query(cylinder, faces);
  CHECK(region_query.closest_point(meeting).distance < 1e-9);

  FunctionalRegion region;
  region.face_ids = faces;
  region.task_direction = Eigen::Vector3d(-1, 0, 0);
  region.meeting_point = meeting;
  CHECK_NOTHROW(region.validate(cylinder));

  FunctionalRegion empty;
  empty.task_direction = Eigen::Vector3d(-1, 0, 0);
  CHECK_THROWS_AS(empty.validate(cylinder), ConfigError);
}

}  // TEST_SUITE
