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

#include "funcgrasp/heatmap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "funcgrasp/common.hpp"
#include "funcgrasp/hdbscan.hpp"

namespace funcgrasp {

void HeatmapParams::validate() const {
  if (n_points < 1) throw ConfigError("heatmap n_points must be >= 1");
  if (trials < 1) throw ConfigError("heatmap trials must be >= 1");
  if (!(quantile > 0.0 && quantile <= 1.0))
    throw ConfigError("heatmap quantile must be in (0, 1]");
  if (interpolation_k < 1) throw ConfigError("heatmap interpolation_k must be >= 1");
}

namespace {

/// Reversed functional-finger chain rooted at the fingertip. The fingertip
/// sits at the meeting point with a free orientation (the hand may roll
/// around the contact), so reachability of an approach point only depends on
/// its distance: the solver targets a point at that distance along the
/// chain's canonical direction and the whole solution is then rotated about
/// the meeting point onto the real approach direction.
struct ReachabilityContext {
  KinematicChain reversed;          // tip-rooted, no world anchor applied
  KinematicChain forward_template;  // functional finger, base overwritten per solve
  Transform finger_base;
  Eigen::Vector3d meeting_point;

  ReachabilityContext(const HandModel& hand, const Eigen::Vector3d& meeting)
      : reversed(reverse_chain(hand)),
        forward_template(hand.fingers[hand.functional_finger]),
        finger_base(hand.fingers[hand.functional_finger].base_frame),
        meeting_point(meeting) {}
};

struct TrialScore {
  double score = 0.0;
  bool reachable = false;
};

TrialScore grade_point(const ReachabilityContext& ctx, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& task_direction, int trials, Rng& rng) {
  TrialScore result;
  IkOptions opts;
  opts.tol_mm = 1.0;
  opts.max_iters = 100;
  opts.restarts = 1;

  const Eigen::Vector3d offset = target - ctx.meeting_point;
  const double distance = offset.norm();
  if (distance < 1e-9) return result;  // palm cannot sit on the fingertip

  for (int trial = 0; trial < trials; ++trial) {
    const JointConfig seed = ctx.reversed.random_config(rng);
    const auto solved = solve_ik_distance(ctx.reversed, distance, seed, opts, rng);
    if (!solved) continue;

    const Transform palm_local = forward_kinematics_end(ctx.reversed, *solved);
    if (palm_local.translation().norm() < 1e-9) continue;
    result.reachable = true;

    // Swing the solution around the fingertip so the palm lands on the real
    // approach point, then grade the forward chain in world coordinates.
    const Eigen::Quaterniond align =
        Eigen::Quaterniond::FromTwoVectors(palm_local.translation(), offset);
    const Transform palm_world =
        translation(ctx.meeting_point) *
        make_transform(align.toRotationMatrix(), Eigen::Vector3d::Zero()) * palm_local;
    KinematicChain posed = ctx.forward_template;
    posed.base_frame = palm_world * ctx.finger_base;
    const double score =
        directional_manipulability(posed, reverse_config(*solved), task_direction);
    result.score = std::max(result.score, score);
  }
  return result;
}

}  // namespace

double evaluate_approach_point(const HandModel& hand, const Eigen::Vector3d& meeting_point,
                               const SurfaceSample& approach_point,
                               const Eigen::Vector3d& task_direction, int trials, Rng& rng) {
  const ReachabilityContext ctx(hand, meeting_point);
  return grade_point(ctx, approach_point.position, task_direction, trials, rng).score;
}

double linear_quantile(std::vector<double> values, double quantile) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = quantile * (static_cast<double>(values.size()) - 1.0);
  const auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - std::floor(h)) * (values[lo + 1] - values[lo]);
}

void normalize_scores(std::vector<ApproachPoint>& points, double quantile) {
  if (points.empty()) throw ConfigError("no approach points to normalize");
  std::vector<double> reachable_scores;
  for (const ApproachPoint& point : points)
    if (point.reachable) reachable_scores.push_back(point.raw_score);
  const double q = linear_quantile(std::move(reachable_scores), quantile);
  for (ApproachPoint& point : points)
    point.norm_score = q > 0.0 ? std::min(1.0, point.raw_score / q) : 0.0;
}

void cluster_and_select(ApproachHeatmap& heatmap, const TriangleMesh& mesh,
                        const HeatmapParams& params) {
  for (ApproachPoint& point : heatmap.points) point.cluster_label = -1;
  heatmap.clusters.clear();
  heatmap.selected_cluster.reset();

  std::vector<int> candidates;
  for (size_t i = 0; i < heatmap.points.size(); ++i)
    if (heatmap.points[i].reachable && heatmap.points[i].norm_score > 0.0)
      candidates.push_back(static_cast<int>(i));
  if (candidates.empty()) return;

  Eigen::Vector3d lo, hi;
  mesh.aabb(lo, hi);
  const double diagonal = (hi - lo).norm();

  Eigen::MatrixXd features(static_cast<int>(candidates.size()), 4);
  for (size_t row = 0; row < candidates.size(); ++row) {
    const ApproachPoint& point = heatmap.points[candidates[row]];
    features.row(static_cast<int>(row)) << point.sample.position.x(),
        point.sample.position.y(), point.sample.position.z(),
        point.norm_score * diagonal;
  }

  const HdbscanResult clustering =
      hdbscan(features, params.min_cluster_size, params.min_samples);
  for (size_t row = 0; row < candidates.size(); ++row)
    heatmap.points[candidates[row]].cluster_label = clustering.labels[row];

  if (clustering.n_clusters == 0) return;

  heatmap.clusters.resize(clustering.n_clusters);
  for (int label = 0; label < clustering.n_clusters; ++label)
    heatmap.clusters[label].label = label;
  for (const ApproachPoint& point : heatmap.points)
    if (point.cluster_label >= 0) {
      ClusterStat& stat = heatmap.clusters[point.cluster_label];
      ++stat.count;
      stat.mean_norm_score += point.norm_score;
    }
  for (ClusterStat& stat : heatmap.clusters) stat.mean_norm_score /= stat.count;

  int best = 0;
  for (int label = 1; label < clustering.n_clusters; ++label) {
    const ClusterStat& a = heatmap.clusters[label];
    const ClusterStat& b = heatmap.clusters[best];
    if (a.mean_norm_score > b.mean_norm_score ||
        (a.mean_norm_score == b.mean_norm_score && a.count > b.count))
      best = label;
  }
  heatmap.selected_cluster = best;
}

namespace {

void interpolate_vertex_scores(ApproachHeatmap& heatmap, const TriangleMesh& mesh) {
  const int k = std::min<int>(heatmap.params.interpolation_k,
                              static_cast<int>(heatmap.points.size()));
  heatmap.vertex_scores.assign(mesh.vertex_count(), 0.0);
  std::vector<std::pair<double, int>> nearest;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    nearest.clear();
    for (size_t i = 0; i < heatmap.points.size(); ++i)
      nearest.emplace_back(
          (heatmap.points[i].sample.position - mesh.vertices[v]).squaredNorm(),
          static_cast<int>(i));
    std::partial_sort(nearest.begin(), nearest.begin() + k, nearest.end());
    double weight_sum = 0.0, score_sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double w = 1.0 / (std::sqrt(nearest[j].first) + 1e-9);
      weight_sum += w;
      score_sum += w * heatmap.points[nearest[j].second].norm_score;
    }
    heatmap.vertex_scores[v] = score_sum / weight_sum;
  }
}

}  // namespace

ApproachHeatmap generate_heatmap(const HandModel& hand, const TriangleMesh& mesh,
                                 const FunctionalRegion& region, const HeatmapParams& params,
                                 int workers) {
  params.validate();
  hand.validate();
  region.validate(mesh);

  ApproachHeatmap heatmap;
  heatmap.params = params;
  heatmap.hand_id = hand.name;

  Rng rng(params.seed);
  Rng sample_rng = rng.derive(0);
  const std::vector<SurfaceSample> samples = sample_surface(mesh, params.n_points, sample_rng);
  heatmap.points.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) heatmap.points[i].sample = samples[i];

  const ReachabilityContext ctx(hand, region.meeting_point);

  // Per-point derived RNG streams: the grading order (and worker count) never
  // changes the result.
  const auto grade_range = [&](std::atomic<int>& cursor) {
    for (int i = cursor.fetch_add(1); i < static_cast<int>(samples.size());
         i = cursor.fetch_add(1)) {
      Rng point_rng = rng.derive(1 + static_cast<std::uint64_t>(i));
      const TrialScore graded = grade_point(ctx, samples[i].position,
                                            region.task_direction, params.trials, point_rng);
      heatmap.points[i].raw_score = graded.score;
      heatmap.points[i].reachable = graded.reachable;
    }
  };

  int n_workers = workers;
  if (n_workers <= 0)
    n_workers = std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<int>(n_workers, static_cast<int>(samples.size()));
  std::atomic<int> cursor{0};
  if (n_workers <= 1) {
    grade_range(cursor);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back([&] { grade_range(cursor); });
    for (std::thread& t : pool) t.join();
  }

  normalize_scores(heatmap.points, params.quantile);
  cluster_and_select(heatmap, mesh, params);
  interpolate_vertex_scores(heatmap, mesh);
  return heatmap;
}

HeatmapQuery query_score(const ApproachHeatmap& heatmap, const MeshQuery& mesh_query,
                         const Eigen::Vector3d& p) {
  HeatmapQuery out;
  out.distance_mm = mesh_query.closest_point(p).distance;
  if (!heatmap.selected_cluster.has_value()) return out;

  std::vector<std::pair<double, int>> members;
  for (size_t i = 0; i < heatmap.points.size(); ++i)
    if (heatmap.points[i].cluster_label == *heatmap.selected_cluster)
      members.emplace_back((heatmap.points[i].sample.position - p).squaredNorm(),
                           static_cast<int>(i));
  if (members.empty()) return out;

  const int k = std::min<int>(heatmap.params.interpolation_k,
                              static_cast<int>(members.size()));
  std::partial_sort(members.begin(), members.begin() + k, members.end());
  double weight_sum = 0.0, score_sum = 0.0;
  for (int j = 0; j < k; ++j) {
    const double w = 1.0 / (std::sqrt(members[j].first) + 1e-9);
    weight_sum += w;
    score_sum += w * heatmap.points[members[j].second].norm_score;
  }
  out.score = score_sum / weight_sum;
  return out;
}

}  // namespace funcgrasp
