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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "funcgrasp/common.hpp"
#include "funcgrasp/hand.hpp"
#include "funcgrasp/heatmap.hpp"
#include "funcgrasp/mesh.hpp"
#include "funcgrasp/planner.hpp"
#include "funcgrasp/quality.hpp"

namespace funcgrasp {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Hand configuration

HandModel hand_from_json(const Json& j);
Json hand_to_json(const HandModel& hand);
HandModel load_hand_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Scenario configuration

struct ScenarioConfig {
  std::string name;
  std::string mesh_path;  // relative to the scenario file's directory

  std::vector<int> region_faces;  // explicit face list, or:
  std::optional<Eigen::Vector3d> region_sphere_center;
  double region_sphere_radius = 0.0;
  Eigen::Vector3d task_direction = Eigen::Vector3d::UnitZ();
  std::optional<Eigen::Vector3d> meeting_point;

  HeatmapParams heatmap;
  EvaluationParams energy;
  AnnealingSchedule planner;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  FinalizeParams finalize;
  FrictionParams friction;
  QualityOptions quality;
};

ScenarioConfig scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

/// Scenario with its mesh loaded and the functional region resolved
/// (meeting point defaulted to the region centroid projection).
struct LoadedScenario {
  ScenarioConfig config;
  std::filesystem::path scenario_dir;
  TriangleMesh mesh;
  std::string mesh_bytes;  // for provenance hashing
  FunctionalRegion region;
};

LoadedScenario realize_scenario(const std::filesystem::path& scenario_path);

// ---------------------------------------------------------------------------
// Provenance

std::string fnv1a_hex(std::string_view bytes);
std::string hash_json(const Json& j);  // canonical dump, then fnv1a
std::string hand_hash(const HandModel& hand);
std::string object_hash(const LoadedScenario& scenario);

// ---------------------------------------------------------------------------
// Heatmap artifacts

Json heatmap_to_json(const ApproachHeatmap& heatmap);
ApproachHeatmap heatmap_from_json(const Json& j);
ApproachHeatmap load_heatmap_file(const std::filesystem::path& path);

/// Writes <stem>.json, <stem>.ply (per-vertex score, selected region in red,
/// score gradient in blue) and <stem>.csv (graded points).
void write_heatmap_artifacts(const ApproachHeatmap& heatmap, const TriangleMesh& mesh,
                             const std::filesystem::path& directory,
                             const std::string& stem = "heatmap");

std::string heatmap_csv(const ApproachHeatmap& heatmap);
std::string heatmap_ply(const ApproachHeatmap& heatmap, const TriangleMesh& mesh);

// ---------------------------------------------------------------------------
// Grasp and quality artifacts

struct Provenance {
  std::string tool_version = kToolVersion;
  std::string hand_id, object_id;
  std::string hand_hash, object_hash, heatmap_hash;
  std::uint64_t seed = 0;
};

Json provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const Json& j);

Json grasp_to_json(const GraspCandidate& candidate, const Provenance& provenance);
struct LoadedGrasp {
  GraspCandidate candidate;
  Provenance provenance;
};
LoadedGrasp load_grasp_file(const std::filesystem::path& path);

struct EvaluationOutput {
  QualityReport report;
  Eigen::VectorXd q_closed;
  std::vector<Contact> contacts;
  double functional_distance_mm = 0.0;
  bool non_grasping = false;
};

Json evaluation_to_json(const EvaluationOutput& output, const Provenance& provenance);

// ---------------------------------------------------------------------------
// Mesh output + demo fixtures

std::string mesh_to_obj(const TriangleMesh& mesh);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Writes the demo object mesh, its scenario file(s), and both built-in hand
/// configs into the directory. Returns the scenario paths written.
std::vector<std::filesystem::path> write_demo(const std::string& name,
                                              const std::filesystem::path& directory);

}  // namespace funcgrasp
