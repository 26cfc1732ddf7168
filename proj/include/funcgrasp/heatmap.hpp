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
#include <optional>
#include <string>
#include <vector>

#include "funcgrasp/hand.hpp"
#include "funcgrasp/mesh.hpp"

namespace funcgrasp {

struct HeatmapParams {
  int n_points = 500;
  int trials = 5;              // IK attempts per approach point
  double quantile = 0.99;      // score normalization quantile
  int interpolation_k = 8;     // nearest graded points for interpolation
  int min_cluster_size = 15;
  int min_samples = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ApproachPoint {
  SurfaceSample sample;
  double raw_score = 0.0;   // mm^2 manipulability scale, 0 when unreachable
  double norm_score = 0.0;  // [0, 1]
  bool reachable = false;
  int cluster_label = -1;
};

struct ClusterStat {
  int label = -1;
  int count = 0;
  double mean_norm_score = 0.0;
};

/// Scored palm placements for one (hand, object, functional region) triple.
struct ApproachHeatmap {
  std::vector<ApproachPoint> points;
  std::vector<double> vertex_scores;  // per mesh vertex, [0, 1]
  std::optional<int> selected_cluster;
  std::vector<ClusterStat> clusters;
  HeatmapParams params;
  std::string hand_id, object_id;
  std::string hand_hash, object_hash;
};

/// Best directional-manipulability score over up to `trials` IK attempts of
/// the reversed functional-finger chain anchored at the meeting point and
/// targeting the approach point; 0 when never reachable. Each attempt draws
/// one random seed configuration from rng, so results for a trial prefix are
/// independent of the total trial count.
double evaluate_approach_point(const HandModel& hand, const Eigen::Vector3d& meeting_point,
                               const SurfaceSample& approach_point,
                               const Eigen::Vector3d& task_direction, int trials, Rng& rng);

/// Full heatmap build: sample, grade (optionally on a worker pool), normalize,
/// cluster, select, interpolate. Deterministic for a given params.seed and
/// independent of the worker count.
ApproachHeatmap generate_heatmap(const HandModel& hand, const TriangleMesh& mesh,
                                 const FunctionalRegion& region, const HeatmapParams& params,
                                 int workers = 1);

/// norm_score = min(1, raw / q) with q the `quantile` linear-interpolated
/// order statistic of raw scores over reachable points; all zero when q = 0.
void normalize_scores(std::vector<ApproachPoint>& points, double quantile);

/// Reference quantile (linear interpolation between order statistics).
double linear_quantile(std::vector<double> values, double quantile);

/// Density clustering over (position, norm_score * bbox diagonal) of the
/// reachable scored points; picks the cluster with the highest mean score
/// (ties: more members, then lower label).
void cluster_and_select(ApproachHeatmap& heatmap, const TriangleMesh& mesh,
                        const HeatmapParams& params);

struct HeatmapQuery {
  double score = 0.0;        // [0, 1], 0 when no cluster is selected
  double distance_mm = 0.0;  // to the object surface
};

/// Inverse-distance-weighted score over the k nearest selected-cluster points
/// plus the distance from p to the mesh.
HeatmapQuery query_score(const ApproachHeatmap& heatmap, const MeshQuery& mesh_query,
                         const Eigen::Vector3d& p);

}  // namespace funcgrasp
