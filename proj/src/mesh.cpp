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

#include "funcgrasp/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "funcgrasp/common.hpp"

namespace funcgrasp {

namespace {

constexpr double kDegenerateArea = 1e-9;  // mm^2

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const Eigen::Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

double TriangleMesh::face_area(int face) const {
  const auto& f = faces[face];
  return triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
}

Eigen::Vector3d TriangleMesh::face_centroid(int face) const {
  const auto& f = faces[face];
  return (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0;
}

double TriangleMesh::total_area() const {
  double area = 0.0;
  for (int i = 0; i < face_count(); ++i) area += face_area(i);
  return area;
}

double TriangleMesh::signed_volume() const {
  double volume = 0.0;
  for (const auto& f : faces)
    volume += vertices[f[0]].dot(vertices[f[1]].cross(vertices[f[2]]));
  return volume / 6.0;
}

void TriangleMesh::aabb(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const {
  lo.setConstant(std::numeric_limits<double>::max());
  hi.setConstant(std::numeric_limits<double>::lowest());
  for (const Eigen::Vector3d& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

void TriangleMesh::bounding_sphere(Eigen::Vector3d& center, double& radius) const {
  Eigen::Vector3d lo, hi;
  aabb(lo, hi);
  center = 0.5 * (lo + hi);
  radius = 0.0;
  for (const Eigen::Vector3d& v : vertices)
    radius = std::max(radius, (v - center).norm());
}

void TriangleMesh::finalize() {
  if (vertices.empty() || faces.empty()) throw InputError("mesh is empty");

  std::vector<std::array<int, 3>> kept;
  kept.reserve(faces.size());
  for (const auto& f : faces) {
    for (int idx : f)
      if (idx < 0 || idx >= vertex_count())
        throw InputError("mesh face references missing vertex " + std::to_string(idx));
    if (triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]) < kDegenerateArea) {
      ++dropped_degenerate;
      continue;
    }
    kept.push_back(f);
  }
  faces = std::move(kept);
  if (faces.empty()) throw InputError("mesh has no non-degenerate faces");

  // Closed = every undirected edge shared by exactly two faces, once per
  // direction (consistent orientation).
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : faces)
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      ++directed[{a, b}];
    }
  closed = true;
  for (const auto& [edge, count] : directed) {
    auto opposite = directed.find({edge.second, edge.first});
    if (count != 1 || opposite == directed.end() || opposite->second != 1) {
      closed = false;
      break;
    }
  }

  if (closed && signed_volume() < 0.0)
    for (auto& f : faces) std::swap(f[1], f[2]);

  face_normals.resize(faces.size());
  for (size_t i = 0; i < faces.size(); ++i) {
    const auto& f = faces[i];
    face_normals[i] =
        (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).normalized();
  }
}

namespace {

TriangleMesh parse_obj(std::string_view bytes) {
  TriangleMesh mesh;
  std::istringstream in{std::string(bytes)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw InputError("OBJ parse failure at line " + std::to_string(line_no));
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string token;
      while (ls >> token) {
        const size_t slash = token.find('/');
        if (slash != std::string::npos) token = token.substr(0, slash);
        int value = 0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
        if (res.ec != std::errc() || value == 0)
          throw InputError("OBJ parse failure at line " + std::to_string(line_no));
        if (value < 0) value = static_cast<int>(mesh.vertices.size()) + value + 1;
        idx.push_back(value - 1);
      }
      if (idx.size() < 3)
        throw InputError("OBJ face with fewer than 3 vertices at line " +
                         std::to_string(line_no));
      for (size_t k = 2; k < idx.size(); ++k)  // fan-triangulate polygons
        mesh.faces.push_back({idx[0], idx[static_cast<int>(k) - 1], idx[k]});
    }
    // vn/vt/usemtl/etc. ignored
  }
  return mesh;
}

TriangleMesh parse_stl_ascii(std::string_view bytes) {
  TriangleMesh mesh;
  std::istringstream in{std::string(bytes)};
  std::string token;
  std::map<std::array<double, 3>, int> welded;
  std::vector<int> pending;
  int line_guard = 0;
  while (in >> token) {
    if (++line_guard > 100'000'000) throw InputError("STL parse failure: runaway input");
    if (token == "vertex") {
      Eigen::Vector3d v;
      if (!(in >> v.x() >> v.y() >> v.z())) throw InputError("STL parse failure: bad vertex");
      const std::array<double, 3> key{v.x(), v.y(), v.z()};
      auto [it, inserted] = welded.try_emplace(key, static_cast<int>(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back(v);
      pending.push_back(it->second);
      if (pending.size() == 3) {
        mesh.faces.push_back({pending[0], pending[1], pending[2]});
        pending.clear();
      }
    }
  }
  if (!pending.empty()) throw InputError("STL parse failure: dangling vertices");
  return mesh;
}

}  // namespace

TriangleMesh load_mesh(std::string_view bytes, MeshFormat format) {
  TriangleMesh mesh =
      format == MeshFormat::kObj ? parse_obj(bytes) : parse_stl_ascii(bytes);
  mesh.finalize();
  return mesh;
}

TriangleMesh load_mesh_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open mesh file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();

  MeshFormat format;
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".obj") {
    format = MeshFormat::kObj;
  } else if (path.size() >= 4 && path.substr(path.size() - 4) == ".stl") {
    if (bytes.rfind("solid", 0) != 0)
      throw InputError("binary STL is not supported: " + path);
    format = MeshFormat::kStlAscii;
  } else {
    throw InputError("unsupported mesh extension (want .obj or ascii .stl): " + path);
  }
  try {
    return load_mesh(bytes, format);
  } catch (const InputError& e) {
    throw InputError(std::string(e.what()) + " [" + path + "]");
  }
}

std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, int n, Rng& rng) {
  if (n < 1) throw InputError("sample count must be >= 1");
  if (mesh.face_count() == 0) throw InputError("cannot sample an empty mesh");

  std::vector<double> cumulative(mesh.face_count());
  double total = 0.0;
  for (int i = 0; i < mesh.face_count(); ++i) {
    total += mesh.face_area(i);
    cumulative[i] = total;
  }

  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  for (int s = 0; s < n; ++s) {
    const double pick = rng.uniform01() * total;
    const int face = static_cast<int>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const int clamped = std::min(face, mesh.face_count() - 1);
    const auto& f = mesh.faces[clamped];
    const double r1 = std::sqrt(rng.uniform01());
    const double r2 = rng.uniform01();
    const double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
    SurfaceSample sample;
    sample.position =
        wa * mesh.vertices[f[0]] + wb * mesh.vertices[f[1]] + wc * mesh.vertices[f[2]];
    sample.normal = mesh.face_normals[clamped];
    sample.face_id = clamped;
    samples.push_back(sample);
  }
  return samples;
}

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p,
                                          const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

MeshQuery::MeshQuery(const TriangleMesh& mesh) : mesh_(&mesh) {
  face_ids_.resize(mesh.face_count());
  std::iota(face_ids_.begin(), face_ids_.end(), 0);
  std::vector<Eigen::Vector3d> centroids(mesh.face_count());
  for (int i = 0; i < mesh.face_count(); ++i) centroids[i] = mesh.face_centroid(i);
  nodes_.reserve(2 * face_ids_.size());
  build(0, static_cast<int>(face_ids_.size()), centroids);
}

MeshQuery::MeshQuery(const TriangleMesh& mesh, const std::vector<int>& face_subset)
    : mesh_(&mesh), face_ids_(face_subset) {
  if (face_ids_.empty()) throw InputError("face subset is empty");
  std::vector<Eigen::Vector3d> centroids(mesh.face_count());
  for (int i = 0; i < mesh.face_count(); ++i) centroids[i] = mesh.face_centroid(i);
  nodes_.reserve(2 * face_ids_.size());
  build(0, static_cast<int>(face_ids_.size()), centroids);
}

int MeshQuery::build(int first, int count, std::vector<Eigen::Vector3d>& centroids) {
  Node node;
  node.lo.setConstant(std::numeric_limits<double>::max());
  node.hi.setConstant(std::numeric_limits<double>::lowest());
  for (int i = first; i < first + count; ++i) {
    const auto& f = mesh_->faces[face_ids_[i]];
    for (int k = 0; k < 3; ++k) {
      node.lo = node.lo.cwiseMin(mesh_->vertices[f[k]]);
      node.hi = node.hi.cwiseMax(mesh_->vertices[f[k]]);
    }
  }

  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);

  constexpr int kLeafSize = 4;
  if (count <= kLeafSize) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }

  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(face_ids_.begin() + first, face_ids_.begin() + mid,
                   face_ids_.begin() + first + count, [&](int a, int b) {
                     return centroids[a][axis] < centroids[b][axis];
                   });

  const int left = build(first, mid - first, centroids);
  const int right = build(mid, first + count - mid, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

namespace {

double aabb_distance_sq(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                        const Eigen::Vector3d& p) {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double v = std::max({lo[k] - p[k], 0.0, p[k] - hi[k]});
    d2 += v * v;
  }
  return d2;
}

}  // namespace

void MeshQuery::closest_recursive(int node_id, const Eigen::Vector3d& p,
                                  ClosestHit& best) const {
  const Node& node = nodes_[node_id];
  if (aabb_distance_sq(node.lo, node.hi, p) >= best.distance * best.distance) return;

  if (node.left < 0) {
    for (int i = node.first; i < node.first + node.count; ++i) {
      const int face = face_ids_[i];
      const auto& f = mesh_->faces[face];
      const Eigen::Vector3d q = closest_point_on_triangle(
          p, mesh_->vertices[f[0]], mesh_->vertices[f[1]], mesh_->vertices[f[2]]);
      const double d = (q - p).norm();
      if (d < best.distance) {
        best.distance = d;
        best.point = q;
        best.face_id = face;
        best.normal = mesh_->face_normals[face];
      }
    }
    return;
  }

  const double dl = aabb_distance_sq(nodes_[node.left].lo, nodes_[node.left].hi, p);
  const double dr = aabb_distance_sq(nodes_[node.right].lo, nodes_[node.right].hi, p);
  if (dl <= dr) {
    closest_recursive(node.left, p, best);
    closest_recursive(node.right, p, best);
  } else {
    closest_recursive(node.right, p, best);
    closest_recursive(node.left, p, best);
  }
}

ClosestHit MeshQuery::closest_point(const Eigen::Vector3d& p) const {
  ClosestHit best;
  best.distance = std::numeric_limits<double>::max();
  closest_recursive(0, p, best);
  return best;
}

namespace {

// Moller-Trumbore; near-edge hits are reported as unreliable.
enum class RayHit { kMiss, kHit, kUnreliable };

RayHit ray_triangle(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                    const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                    const Eigen::Vector3d& c) {
  constexpr double kEps = 1e-10;
  const Eigen::Vector3d e1 = b - a, e2 = c - a;
  const Eigen::Vector3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  const double scale = std::max({e1.norm() * e2.norm(), 1.0});
  if (std::abs(det) < kEps * scale) return RayHit::kUnreliable;
  const double inv_det = 1.0 / det;
  const Eigen::Vector3d tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  const double t = e2.dot(qvec) * inv_det;
  constexpr double kBary = 1e-9;
  if (u < -kBary || v < -kBary || u + v > 1.0 + kBary || t < -1e-12) return RayHit::kMiss;
  if (u < kBary || v < kBary || u + v > 1.0 - kBary || t < 1e-12)
    return RayHit::kUnreliable;
  return RayHit::kHit;
}

bool ray_aabb(const Eigen::Vector3d& origin, const Eigen::Vector3d& inv_dir,
              const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  double tmin = 0.0, tmax = std::numeric_limits<double>::max();
  for (int k = 0; k < 3; ++k) {
    double t1 = (lo[k] - origin[k]) * inv_dir[k];
    double t2 = (hi[k] - origin[k]) * inv_dir[k];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return false;
  }
  return true;
}

}  // namespace

bool MeshQuery::count_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                int& crossings) const {
  crossings = 0;
  const Eigen::Vector3d inv_dir = dir.cwiseInverse();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!ray_aabb(origin, inv_dir, node.lo, node.hi)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const auto& f = mesh_->faces[face_ids_[i]];
        switch (ray_triangle(origin, dir, mesh_->vertices[f[0]], mesh_->vertices[f[1]],
                             mesh_->vertices[f[2]])) {
          case RayHit::kHit:
            ++crossings;
            break;
          case RayHit::kUnreliable:
            return false;
          case RayHit::kMiss:
            break;
        }
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return true;
}

bool MeshQuery::inside(const Eigen::Vector3d& p) const {
  static const std::array<Eigen::Vector3d, 4> kDirections = {
      Eigen::Vector3d(0.5377397103, 0.2113248654, 0.8161559464).normalized(),
      Eigen::Vector3d(-0.2817403517, 0.9134677129, 0.2934871791).normalized(),
      Eigen::Vector3d(0.0937461214, -0.5314119287, 0.8419218231).normalized(),
      Eigen::Vector3d(0.7716456301, 0.4522371938, -0.4473126417).normalized()};
  for (const Eigen::Vector3d& dir : kDirections) {
    int crossings = 0;
    if (count_crossings(p, dir, crossings)) return (crossings % 2) == 1;
  }
  // Every probe grazed an edge; fall back to the last parity we can get.
  int crossings = 0;
  count_crossings(p, Eigen::Vector3d::UnitX(), crossings);
  return (crossings % 2) == 1;
}

double MeshQuery::signed_distance(const Eigen::Vector3d& p) const {
  const double d = closest_point(p).distance;
  return inside(p) ? -d : d;
}

void FunctionalRegion::validate(const TriangleMesh& mesh) const {
  if (face_ids.empty()) throw ConfigError("functional region selects no faces");
  for (int face : face_ids)
    if (face < 0 || face >= mesh.face_count())
      throw ConfigError("functional region references missing face " + std::to_string(face));
  if (std::abs(task_direction.norm() - 1.0) > 1e-6)
    throw ConfigError("task direction must be unit length");
}

std::vector<int> select_faces_by_sphere(const TriangleMesh& mesh,
                                        const Eigen::Vector3d& center, double radius) {
  std::vector<int> selected;
  for (int i = 0; i < mesh.face_count(); ++i)
    if ((mesh.face_centroid(i) - center).norm() <= radius) selected.push_back(i);
  return selected;
}

Eigen::Vector3d region_meeting_point(const TriangleMesh& mesh,
                                     const std::vector<int>& face_ids) {
  if (face_ids.empty()) throw ConfigError("functional region selects no faces");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double total = 0.0;
  for (int face : face_ids) {
    const double area = mesh.face_area(face);
    centroid += area * mesh.face_centroid(face);
    total += area;
  }
  centroid /= total;
  MeshQuery region_query(mesh, face_ids);
  return region_query.closest_point(centroid).point;
}

}  // namespace funcgrasp
