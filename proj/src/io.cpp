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

#include "funcgrasp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "funcgrasp/builtin.hpp"
#include "funcgrasp/common.hpp"

namespace funcgrasp {

namespace {

Eigen::Vector3d vec3_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vec3_to_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Transform transform_from_json(const Json& j, const char* what) {
  Transform t = Transform::Identity();
  if (j.is_null()) return t;
  if (j.contains("translation")) t.translation() = vec3_from_json(j["translation"], what);
  if (j.contains("rotation")) {
    const Json& r = j["rotation"];
    if (!r.is_array() || r.size() != 9)
      throw ConfigError(std::string(what) + ": rotation must be 9 numbers, row-major");
    Eigen::Matrix3d m;
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) m(row, col) = r[3 * row + col].get<double>();
    t.linear() = m;
  } else if (j.contains("rpy")) {
    const Eigen::Vector3d rpy = vec3_from_json(j["rpy"], what);
    t.linear() = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                  Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                     .toRotationMatrix();
  }
  return t;
}

Json transform_to_json(const Transform& t) {
  Json j;
  j["translation"] = vec3_to_json(t.translation());
  Json rotation = Json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) rotation.push_back(t.linear()(row, col));
  j["rotation"] = rotation;
  return j;
}

Eigen::VectorXd vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

}  // namespace

HandModel hand_from_json(const Json& j) {
  HandModel hand;
  hand.name = j.value("name", "unnamed");

  if (!j.contains("units") || j["units"].value("length", "") != "mm" ||
      j["units"].value("angle", "") != "rad")
    throw ConfigError("hand '" + hand.name + "': units must declare mm and rad");

  if (!j.contains("fingers") || !j["fingers"].is_array())
    throw ConfigError("hand '" + hand.name + "': missing fingers array");
  for (const Json& jf : j["fingers"]) {
    KinematicChain chain;
    chain.base_frame = transform_from_json(jf.value("base", Json()), "finger base");
    chain.end_offset = transform_from_json(jf.value("tip", Json()), "finger tip");
    for (const Json& jj : jf.value("joints", Json::array())) {
      if (jj.value("type", "revolute") != "revolute")
        throw ConfigError("hand '" + hand.name + "': only revolute joints are supported");
      JointSpec joint;
      joint.name = jj.value("name", "joint");
      joint.axis = vec3_from_json(jj.at("axis"), "joint axis");
      joint.origin = transform_from_json(jj.value("origin", Json()), "joint origin");
      const Json& limits = jj.at("limits");
      if (!limits.is_array() || limits.size() != 2)
        throw ConfigError("hand '" + hand.name + "': joint limits must be [lo, hi]");
      joint.lower = limits[0].get<double>();
      joint.upper = limits[1].get<double>();
      chain.joints.push_back(joint);
    }
    hand.fingers.push_back(chain);
    if (jf.contains("closing"))
      hand.closing_directions.push_back(vector_from_json(jf["closing"], "closing"));
    else
      hand.closing_directions.push_back(Eigen::VectorXd());
  }

  hand.functional_finger = j.value("functional_finger", 0);
  hand.functional_link = j.value("functional_link", 0);

  for (const Json& jc : j.value("virtual_contacts", Json::array())) {
    VirtualContact contact;
    if (jc.value("palm", false)) {
      contact.finger = -1;
      contact.link = -1;
    } else {
      contact.finger = jc.at("finger").get<int>();
      contact.link = jc.at("link").get<int>();
    }
    contact.local_position = vec3_from_json(jc.at("position"), "contact position");
    contact.local_normal = vec3_from_json(jc.at("normal"), "contact normal");
    contact.functional = jc.value("functional", false);
    hand.virtual_contacts.push_back(contact);
  }

  const Json& je = j.at("eigengrasp");
  hand.eigengrasp.origin_posture = vector_from_json(je.at("origin"), "eigengrasp origin");
  for (const Json& jv : je.at("vectors"))
    hand.eigengrasp.basis_vectors.push_back(vector_from_json(jv, "eigengrasp vector"));
  for (const Json& jb : je.at("amplitude_bounds")) {
    if (!jb.is_array() || jb.size() != 2)
      throw ConfigError("eigengrasp amplitude bounds must be [lo, hi]");
    hand.eigengrasp.amplitude_bounds.push_back({jb[0].get<double>(), jb[1].get<double>()});
  }

  hand.validate();
  return hand;
}

Json hand_to_json(const HandModel& hand) {
  Json j;
  j["name"] = hand.name;
  j["units"] = {{"length", "mm"}, {"angle", "rad"}};
  Json fingers = Json::array();
  for (size_t f = 0; f < hand.fingers.size(); ++f) {
    const KinematicChain& chain = hand.fingers[f];
    Json jf;
    jf["base"] = transform_to_json(chain.base_frame);
    jf["tip"] = transform_to_json(chain.end_offset);
    Json joints = Json::array();
    for (const JointSpec& joint : chain.joints) {
      Json jj;
      jj["name"] = joint.name;
      jj["axis"] = vec3_to_json(joint.axis);
      jj["origin"] = transform_to_json(joint.origin);
      jj["limits"] = Json::array({joint.lower, joint.upper});
      joints.push_back(jj);
    }
    jf["joints"] = joints;
    if (f < hand.closing_directions.size() && hand.closing_directions[f].size() > 0)
      jf["closing"] = vector_to_json(hand.closing_directions[f]);
    fingers.push_back(jf);
  }
  j["fingers"] = fingers;
  j["functional_finger"] = hand.functional_finger;
  j["functional_link"] = hand.functional_link;
  Json contacts = Json::array();
  for (const VirtualContact& contact : hand.virtual_contacts) {
    Json jc;
    if (contact.on_palm()) {
      jc["palm"] = true;
    } else {
      jc["finger"] = contact.finger;
      jc["link"] = contact.link;
    }
    jc["position"] = vec3_to_json(contact.local_position);
    jc["normal"] = vec3_to_json(contact.local_normal);
    jc["functional"] = contact.functional;
    contacts.push_back(jc);
  }
  j["virtual_contacts"] = contacts;
  Json je;
  je["origin"] = vector_to_json(hand.eigengrasp.origin_posture);
  Json vectors = Json::array();
  for (const Eigen::VectorXd& v : hand.eigengrasp.basis_vectors)
    vectors.push_back(vector_to_json(v));
  je["vectors"] = vectors;
  Json bounds = Json::array();
  for (const auto& [lo, hi] : hand.eigengrasp.amplitude_bounds)
    bounds.push_back(Json::array({lo, hi}));
  je["amplitude_bounds"] = bounds;
  j["eigengrasp"] = je;
  return j;
}

HandModel load_hand_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw InputError("cannot parse hand config " + path.string() + ": " + e.what());
  }
  try {
    return hand_from_json(j);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid hand config " + path.string() + ": " + e.what());
  }
}

ScenarioConfig scenario_from_json(const Json& j) {
  ScenarioConfig config;
  config.name = j.value("name", "unnamed");
  config.mesh_path = j.at("object").at("mesh").get<std::string>();

  const Json& region = j.at("functional_region");
  if (region.contains("faces")) {
    for (const Json& face : region["faces"]) config.region_faces.push_back(face.get<int>());
  }
  if (region.contains("select_sphere")) {
    config.region_sphere_center =
        vec3_from_json(region["select_sphere"].at("center"), "region sphere center");
    config.region_sphere_radius = region["select_sphere"].at("radius").get<double>();
  }
  config.task_direction = vec3_from_json(region.at("task_direction"), "task direction");
  if (region.contains("meeting_point") && !region["meeting_point"].is_null())
    config.meeting_point = vec3_from_json(region["meeting_point"], "meeting point");

  if (j.contains("heatmap")) {
    const Json& h = j["heatmap"];
    config.heatmap.n_points = h.value("n_points", config.heatmap.n_points);
    config.heatmap.trials = h.value("trials", config.heatmap.trials);
    config.heatmap.quantile = h.value("quantile", config.heatmap.quantile);
    config.heatmap.interpolation_k =
        h.value("interpolation_k", config.heatmap.interpolation_k);
    config.heatmap.min_cluster_size =
        h.value("min_cluster_size", config.heatmap.min_cluster_size);
    config.heatmap.min_samples = h.value("min_samples", config.heatmap.min_samples);
    config.heatmap.seed = h.value("seed", config.heatmap.seed);
  }

  if (j.contains("energy")) {
    const Json& e = j["energy"];
    if (e.contains("weights")) {
      config.energy.weights.alpha = e["weights"].value("alpha", 0.75);
      config.energy.weights.beta = e["weights"].value("beta", 0.2);
      config.energy.weights.gamma = e["weights"].value("gamma", 0.05);
    }
    config.energy.k_align = e.value("k_align_mm", config.energy.k_align);
    if (e.contains("palm")) {
      config.energy.palm.score_threshold =
          e["palm"].value("score_threshold", config.energy.palm.score_threshold);
      config.energy.palm.heatmap_gain =
          e["palm"].value("heatmap_gain_mm", config.energy.palm.heatmap_gain);
      config.energy.palm.max_energy =
          e["palm"].value("max_energy", config.energy.palm.max_energy);
    }
    config.energy.collision_penetration_mm =
        e.value("collision_penetration_mm", config.energy.collision_penetration_mm);
  }
  config.energy.weights.validate();

  if (j.contains("planner")) {
    const Json& p = j["planner"];
    config.planner.steps = p.value("steps", config.planner.steps);
    config.planner.t0 = p.value("t0", config.planner.t0);
    config.planner.t_final_ratio = p.value("t_final_ratio", config.planner.t_final_ratio);
    config.planner.step_position_mm =
        p.value("step_position_mm", config.planner.step_position_mm);
    config.planner.step_rotation_rad =
        p.value("step_rotation_rad", config.planner.step_rotation_rad);
    config.planner.step_amplitude =
        p.value("step_amplitude", config.planner.step_amplitude);
    config.planner.shell_factor = p.value("shell_factor", config.planner.shell_factor);
    config.planner.trace_stride = p.value("trace_stride", config.planner.trace_stride);
    if (p.contains("seeds")) {
      config.seeds.clear();
      for (const Json& s : p["seeds"]) config.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  config.planner.validate();
  if (config.seeds.empty()) throw ConfigError("planner seeds list is empty");

  if (j.contains("finalize")) {
    const Json& f = j["finalize"];
    config.finalize.close_step_rad =
        f.value("close_step_rad", config.finalize.close_step_rad);
    config.finalize.contact_threshold_mm =
        f.value("contact_threshold_mm", config.finalize.contact_threshold_mm);
    config.finalize.max_steps_per_finger =
        f.value("max_steps_per_finger", config.finalize.max_steps_per_finger);
  }

  if (j.contains("friction")) {
    const Json& f = j["friction"];
    config.friction.mu = f.value("mu", config.friction.mu);
    config.friction.cone_edges = f.value("cone_edges", config.friction.cone_edges);
    config.friction.patch_radius_mm =
        f.value("patch_radius_mm", config.friction.patch_radius_mm);
    config.friction.torsion_scale =
        f.value("torsion_scale", config.friction.torsion_scale);
  }

  if (j.contains("quality")) {
    const Json& q = j["quality"];
    config.quality.nu_samples = q.value("nu_samples", config.quality.nu_samples);
    config.quality.nu_seed = q.value("nu_seed", config.quality.nu_seed);
    config.quality.epsilon.directions =
        q.value("epsilon_directions", config.quality.epsilon.directions);
  }

  if (config.region_faces.empty() && !config.region_sphere_center.has_value())
    throw ConfigError("scenario '" + config.name +
                      "': functional region needs faces or select_sphere");
  if (std::abs(config.task_direction.norm() - 1.0) > 1e-6)
    throw ConfigError("scenario '" + config.name + "': task direction must be unit length");
  return config;
}

Json scenario_to_json(const ScenarioConfig& config) {
  Json j;
  j["name"] = config.name;
  j["object"] = {{"mesh", config.mesh_path}};

  Json region;
  if (!config.region_faces.empty()) region["faces"] = config.region_faces;
  if (config.region_sphere_center.has_value())
    region["select_sphere"] = {{"center", vec3_to_json(*config.region_sphere_center)},
                               {"radius", config.region_sphere_radius}};
  region["task_direction"] = vec3_to_json(config.task_direction);
  if (config.meeting_point.has_value())
    region["meeting_point"] = vec3_to_json(*config.meeting_point);
  j["functional_region"] = region;

  j["heatmap"] = {{"n_points", config.heatmap.n_points},
                  {"trials", config.heatmap.trials},
                  {"quantile", config.heatmap.quantile},
                  {"interpolation_k", config.heatmap.interpolation_k},
                  {"min_cluster_size", config.heatmap.min_cluster_size},
                  {"min_samples", config.heatmap.min_samples},
                  {"seed", config.heatmap.seed}};
  j["energy"] = {{"weights",
                  {{"alpha", config.energy.weights.alpha},
                   {"beta", config.energy.weights.beta},
                   {"gamma", config.energy.weights.gamma}}},
                 {"k_align_mm", config.energy.k_align},
                 {"palm",
                  {{"score_threshold", config.energy.palm.score_threshold},
                   {"heatmap_gain_mm", config.energy.palm.heatmap_gain},
                   {"max_energy", config.energy.palm.max_energy}}},
                 {"collision_penetration_mm", config.energy.collision_penetration_mm}};
  j["planner"] = {{"steps", config.planner.steps},
                  {"t0", config.planner.t0},
                  {"t_final_ratio", config.planner.t_final_ratio},
                  {"step_position_mm", config.planner.step_position_mm},
                  {"step_rotation_rad", config.planner.step_rotation_rad},
                  {"step_amplitude", config.planner.step_amplitude},
                  {"shell_factor", config.planner.shell_factor},
                  {"trace_stride", config.planner.trace_stride},
                  {"seeds", config.seeds}};
  j["finalize"] = {{"close_step_rad", config.finalize.close_step_rad},
                   {"contact_threshold_mm", config.finalize.contact_threshold_mm},
                   {"max_steps_per_finger", config.finalize.max_steps_per_finger}};
  j["friction"] = {{"mu", config.friction.mu},
                   {"cone_edges", config.friction.cone_edges},
                   {"patch_radius_mm", config.friction.patch_radius_mm},
                   {"torsion_scale", config.friction.torsion_scale}};
  j["quality"] = {{"nu_samples", config.quality.nu_samples},
                  {"nu_seed", config.quality.nu_seed},
                  {"epsilon_directions", config.quality.epsilon.directions}};
  return j;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw InputError("cannot parse scenario " + path.string() + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid scenario " + path.string() + ": " + e.what());
  }
}

LoadedScenario realize_scenario(const std::filesystem::path& scenario_path) {
  LoadedScenario loaded;
  loaded.config = load_scenario_file(scenario_path);
  loaded.scenario_dir = scenario_path.parent_path();
  const std::filesystem::path mesh_path = loaded.scenario_dir / loaded.config.mesh_path;
  loaded.mesh_bytes = read_text_file(mesh_path);
  loaded.mesh = load_mesh_file(mesh_path.string());

  FunctionalRegion& region = loaded.region;
  region.face_ids = loaded.config.region_faces;
  if (region.face_ids.empty() && loaded.config.region_sphere_center.has_value())
    region.face_ids = select_faces_by_sphere(loaded.mesh,
                                             *loaded.config.region_sphere_center,
                                             loaded.config.region_sphere_radius);
  if (region.face_ids.empty())
    throw ConfigError("scenario '" + loaded.config.name +
                      "': functional region selects no faces");
  region.task_direction = loaded.config.task_direction;
  region.meeting_point = loaded.config.meeting_point.has_value()
                             ? *loaded.config.meeting_point
                             : region_meeting_point(loaded.mesh, region.face_ids);
  region.validate(loaded.mesh);
  return loaded;
}

// ---------------------------------------------------------------------------

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

std::string hash_json(const Json& j) { return fnv1a_hex(j.dump()); }

std::string hand_hash(const HandModel& hand) { return hash_json(hand_to_json(hand)); }

std::string object_hash(const LoadedScenario& scenario) {
  Json region;
  region["faces"] = scenario.region.face_ids;
  region["task_direction"] = vec3_to_json(scenario.region.task_direction);
  region["meeting_point"] = vec3_to_json(scenario.region.meeting_point);
  return fnv1a_hex(scenario.mesh_bytes + "|" + region.dump());
}

// ---------------------------------------------------------------------------

Json heatmap_to_json(const ApproachHeatmap& heatmap) {
  Json j;
  j["provenance"] = {{"tool_version", kToolVersion},
                     {"hand_id", heatmap.hand_id},
                     {"object_id", heatmap.object_id},
                     {"hand_hash", heatmap.hand_hash},
                     {"object_hash", heatmap.object_hash},
                     {"seed", heatmap.params.seed}};
  j["params"] = {{"n_points", heatmap.params.n_points},
                 {"trials", heatmap.params.trials},
                 {"quantile", heatmap.params.quantile},
                 {"interpolation_k", heatmap.params.interpolation_k},
                 {"min_cluster_size", heatmap.params.min_cluster_size},
                 {"min_samples", heatmap.params.min_samples},
                 {"seed", heatmap.params.seed}};
  if (heatmap.selected_cluster.has_value())
    j["selected_cluster"] = *heatmap.selected_cluster;
  else
    j["selected_cluster"] = nullptr;
  Json clusters = Json::array();
  for (const ClusterStat& stat : heatmap.clusters)
    clusters.push_back({{"label", stat.label},
                        {"count", stat.count},
                        {"mean_norm_score", stat.mean_norm_score}});
  j["clusters"] = clusters;
  Json points = Json::array();
  for (const ApproachPoint& point : heatmap.points)
    points.push_back(Json::array(
        {point.sample.position.x(), point.sample.position.y(), point.sample.position.z(),
         point.sample.normal.x(), point.sample.normal.y(), point.sample.normal.z(),
         point.sample.face_id, point.raw_score, point.norm_score,
         point.reachable ? 1 : 0, point.cluster_label}));
  j["points"] = points;
  j["vertex_scores"] = heatmap.vertex_scores;
  return j;
}

ApproachHeatmap heatmap_from_json(const Json& j) {
  ApproachHeatmap heatmap;
  const Json& p = j.at("params");
  heatmap.params.n_points = p.at("n_points").get<int>();
  heatmap.params.trials = p.at("trials").get<int>();
  heatmap.params.quantile = p.at("quantile").get<double>();
  heatmap.params.interpolation_k = p.at("interpolation_k").get<int>();
  heatmap.params.min_cluster_size = p.at("min_cluster_size").get<int>();
  heatmap.params.min_samples = p.at("min_samples").get<int>();
  heatmap.params.seed = p.at("seed").get<std::uint64_t>();

  const Json& prov = j.at("provenance");
  heatmap.hand_id = prov.value("hand_id", "");
  heatmap.object_id = prov.value("object_id", "");
  heatmap.hand_hash = prov.value("hand_hash", "");
  heatmap.object_hash = prov.value("object_hash", "");

  if (!j.at("selected_cluster").is_null())
    heatmap.selected_cluster = j["selected_cluster"].get<int>();
  for (const Json& stat : j.value("clusters", Json::array())) {
    ClusterStat s;
    s.label = stat.at("label").get<int>();
    s.count = stat.at("count").get<int>();
    s.mean_norm_score = stat.at("mean_norm_score").get<double>();
    heatmap.clusters.push_back(s);
  }
  for (const Json& row : j.at("points")) {
    ApproachPoint point;
    point.sample.position = {row[0].get<double>(), row[1].get<double>(),
                             row[2].get<double>()};
    point.sample.normal = {row[3].get<double>(), row[4].get<double>(),
                           row[5].get<double>()};
    point.sample.face_id = row[6].get<int>();
    point.raw_score = row[7].get<double>();
    point.norm_score = row[8].get<double>();
    point.reachable = row[9].get<int>() != 0;
    point.cluster_label = row[10].get<int>();
    heatmap.points.push_back(point);
  }
  heatmap.vertex_scores = j.at("vertex_scores").get<std::vector<double>>();
  return heatmap;
}

ApproachHeatmap load_heatmap_file(const std::filesystem::path& path) {
  try {
    return heatmap_from_json(Json::parse(read_text_file(path)));
  } catch (const Json::exception& e) {
    throw InputError("cannot parse heatmap " + path.string() + ": " + e.what());
  }
}

std::string heatmap_csv(const ApproachHeatmap& heatmap) {
  std::string out = "px,py,pz,nx,ny,nz,face,raw_score,norm_score,reachable,label\n";
  char line[360];
  for (const ApproachPoint& point : heatmap.points) {
    std::snprintf(line, sizeof line,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%d,%d\n",
                  point.sample.position.x(), point.sample.position.y(),
                  point.sample.position.z(), point.sample.normal.x(),
                  point.sample.normal.y(), point.sample.normal.z(),
                  point.sample.face_id, point.raw_score, point.norm_score,
                  point.reachable ? 1 : 0, point.cluster_label);
    out += line;
  }
  return out;
}

std::string heatmap_ply(const ApproachHeatmap& heatmap, const TriangleMesh& mesh) {
  if (static_cast<int>(heatmap.vertex_scores.size()) != mesh.vertex_count())
    throw ConfigError("heatmap vertex scores do not match the mesh");

  // A vertex belongs to the selected region when its nearest graded point
  // carries the selected label.
  std::vector<bool> selected(mesh.vertex_count(), false);
  if (heatmap.selected_cluster.has_value()) {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      double best = std::numeric_limits<double>::max();
      int best_label = -1;
      for (const ApproachPoint& point : heatmap.points) {
        const double d = (point.sample.position - mesh.vertices[v]).squaredNorm();
        if (d < best) {
          best = d;
          best_label = point.cluster_label;
        }
      }
      selected[v] = best_label == *heatmap.selected_cluster;
    }
  }

  std::ostringstream out;
  out << "ply\nformat ascii 1.0\ncomment approach heatmap\n";
  out << "element vertex " << mesh.vertex_count() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property float score\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.face_count() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  char line[200];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double score = heatmap.vertex_scores[v];
    const int blue = static_cast<int>(std::lround(55.0 + 200.0 * score));
    const int red = selected[v] ? 255 : 0;
    std::snprintf(line, sizeof line, "%.9g %.9g %.9g %.9g %d %d %d\n",
                  mesh.vertices[v].x(), mesh.vertices[v].y(), mesh.vertices[v].z(),
                  score, red, 0, selected[v] ? 60 : blue);
    out << line;
  }
  for (const auto& face : mesh.faces)
    out << "3 " << face[0] << " " << face[1] << " " << face[2] << "\n";
  return out.str();
}

void write_heatmap_artifacts(const ApproachHeatmap& heatmap, const TriangleMesh& mesh,
                             const std::filesystem::path& directory,
                             const std::string& stem) {
  std::filesystem::create_directories(directory);
  write_text_file(directory / (stem + ".json"), heatmap_to_json(heatmap).dump(1));
  write_text_file(directory / (stem + ".csv"), heatmap_csv(heatmap));
  write_text_file(directory / (stem + ".ply"), heatmap_ply(heatmap, mesh));
}

// ---------------------------------------------------------------------------

Json provenance_to_json(const Provenance& p) {
  return Json{{"tool_version", p.tool_version}, {"hand_id", p.hand_id},
              {"object_id", p.object_id},       {"hand_hash", p.hand_hash},
              {"object_hash", p.object_hash},   {"heatmap_hash", p.heatmap_hash},
              {"seed", p.seed}};
}

Provenance provenance_from_json(const Json& j) {
  Provenance p;
  p.tool_version = j.value("tool_version", "");
  p.hand_id = j.value("hand_id", "");
  p.object_id = j.value("object_id", "");
  p.hand_hash = j.value("hand_hash", "");
  p.object_hash = j.value("object_hash", "");
  p.heatmap_hash = j.value("heatmap_hash", "");
  p.seed = j.value("seed", std::uint64_t{0});
  return p;
}

Json grasp_to_json(const GraspCandidate& candidate, const Provenance& provenance) {
  Json j;
  j["provenance"] = provenance_to_json(provenance);
  j["state"] = {{"wrist_position", vec3_to_json(candidate.state.wrist_position)},
                {"wrist_rotation", vec3_to_json(candidate.state.wrist_rotation)},
                {"amplitudes", vector_to_json(candidate.state.amplitudes)}};
  j["q_full"] = vector_to_json(candidate.q_full);
  j["energy"] = {{"contact", candidate.energy.contact},
                 {"functional", candidate.energy.functional},
                 {"palm", candidate.energy.palm},
                 {"hybrid", candidate.energy.hybrid},
                 {"collision", candidate.energy.collision}};
  j["steps_used"] = candidate.steps_used;
  j["trace"] = candidate.trace;
  return j;
}

LoadedGrasp load_grasp_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw InputError("cannot parse grasp " + path.string() + ": " + e.what());
  }
  LoadedGrasp loaded;
  try {
    loaded.provenance = provenance_from_json(j.at("provenance"));
    const Json& state = j.at("state");
    loaded.candidate.state.wrist_position =
        vec3_from_json(state.at("wrist_position"), "wrist position");
    loaded.candidate.state.wrist_rotation =
        vec3_from_json(state.at("wrist_rotation"), "wrist rotation");
    loaded.candidate.state.amplitudes =
        vector_from_json(state.at("amplitudes"), "amplitudes");
    loaded.candidate.q_full = vector_from_json(j.at("q_full"), "q_full");
    const Json& energy = j.at("energy");
    loaded.candidate.energy.contact = energy.at("contact").get<double>();
    loaded.candidate.energy.functional = energy.at("functional").get<double>();
    loaded.candidate.energy.palm = energy.at("palm").get<double>();
    loaded.candidate.energy.hybrid = energy.at("hybrid").get<double>();
    loaded.candidate.energy.collision = energy.value("collision", false);
    loaded.candidate.steps_used = j.value("steps_used", 0);
    loaded.candidate.trace = j.value("trace", std::vector<double>{});
    loaded.candidate.seed = loaded.provenance.seed;
  } catch (const Json::exception& e) {
    throw InputError("invalid grasp file " + path.string() + ": " + e.what());
  }
  return loaded;
}

Json evaluation_to_json(const EvaluationOutput& output, const Provenance& provenance) {
  Json j;
  j["provenance"] = provenance_to_json(provenance);
  j["epsilon"] = output.report.epsilon;
  j["nu"] = output.report.nu;
  j["nu_standard_error"] = output.report.nu_standard_error;
  j["force_closure"] = output.report.force_closure;
  j["method"] = output.report.method;
  j["n_contacts"] = static_cast<int>(output.contacts.size());
  j["functional_distance_mm"] = output.functional_distance_mm;
  j["non_grasping"] = output.non_grasping;
  j["q_closed"] = vector_to_json(output.q_closed);
  Json contacts = Json::array();
  for (const Contact& contact : output.contacts)
    contacts.push_back({{"position", vec3_to_json(contact.position)},
                        {"normal", vec3_to_json(contact.normal)},
                        {"mu", contact.mu},
                        {"torsion_coeff", contact.torsion_coeff},
                        {"cone_edges", contact.cone_edges},
                        {"functional", contact.functional}});
  j["contacts"] = contacts;
  return j;
}

// ---------------------------------------------------------------------------

std::string mesh_to_obj(const TriangleMesh& mesh) {
  std::string out = "# funcgrasp mesh\n";
  char line[128];
  for (const Eigen::Vector3d& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out += line;
  }
  for (const auto& face : mesh.faces) {
    std::snprintf(line, sizeof line, "f %d %d %d\n", face[0] + 1, face[1] + 1,
                  face[2] + 1);
    out += line;
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

ScenarioConfig demo_scenario_defaults(const std::string& name,
                                      const std::string& mesh_file) {
  ScenarioConfig config;
  config.name = name;
  config.mesh_path = mesh_file;
  config.heatmap.seed = 20260809;
  config.seeds = {1, 2, 3, 4, 5};
  return config;
}

}  // namespace

std::vector<std::filesystem::path> write_demo(const std::string& name,
                                              const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  write_text_file(directory / "hand_four_finger.json",
                  hand_to_json(builtin_hand_four_finger()).dump(1));
  write_text_file(directory / "hand_three_finger.json",
                  hand_to_json(builtin_hand_three_finger()).dump(1));

  std::vector<std::filesystem::path> scenarios;
  if (name == "spray") {
    const TriangleMesh mesh = make_cylinder_mesh(25.0, 160.0, 48, 16);
    write_text_file(directory / "spray.obj", mesh_to_obj(mesh));
    ScenarioConfig config = demo_scenario_defaults("spray", "spray.obj");
    config.region_sphere_center = Eigen::Vector3d(25.0, 0.0, 130.0);
    config.region_sphere_radius = 12.0;
    config.task_direction = Eigen::Vector3d(-1.0, 0.0, 0.0);
    const std::filesystem::path path = directory / "spray_scenario.json";
    write_text_file(path, scenario_to_json(config).dump(1));
    scenarios.push_back(path);
  } else if (name == "remote") {
    const TriangleMesh mesh = make_box_mesh({-25, -75, 0}, {25, 75, 18}, 10.0);
    write_text_file(directory / "remote.obj", mesh_to_obj(mesh));
    const std::array<double, 3> button_y = {-40.0, 0.0, 40.0};
    for (int b = 0; b < 3; ++b) {
      ScenarioConfig config = demo_scenario_defaults(
          "remote_button" + std::to_string(b + 1), "remote.obj");
      // Explicit face list: top faces near the button center.
      std::vector<int> faces;
      const Eigen::Vector3d center(0.0, button_y[b], 18.0);
      for (int face : select_faces_by_sphere(mesh, center, 9.0))
        if (mesh.face_normals[face].z() > 0.9) faces.push_back(face);
      config.region_faces = faces;
      config.task_direction = Eigen::Vector3d(0.0, 0.0, -1.0);
      const std::filesystem::path path =
          directory / ("remote_button" + std::to_string(b + 1) + "_scenario.json");
      write_text_file(path, scenario_to_json(config).dump(1));
      scenarios.push_back(path);
    }
  } else if (name == "plate") {
    const TriangleMesh mesh = make_box_mesh({-75, -50, -6}, {75, 50, 0}, 10.0);
    write_text_file(directory / "plate.obj", mesh_to_obj(mesh));
    ScenarioConfig config = demo_scenario_defaults("plate", "plate.obj");
    std::vector<int> faces;
    for (int face : select_faces_by_sphere(mesh, {0.0, 0.0, 0.0}, 12.0))
      if (mesh.face_normals[face].z() > 0.9) faces.push_back(face);
    config.region_faces = faces;
    config.task_direction = Eigen::Vector3d(0.0, 0.0, -1.0);
    const std::filesystem::path path = directory / "plate_scenario.json";
    write_text_file(path, scenario_to_json(config).dump(1));
    scenarios.push_back(path);
  } else {
    throw InputError("unknown demo '" + name + "' (want spray, remote, or plate)");
  }
  return scenarios;
}

}  // namespace funcgrasp
