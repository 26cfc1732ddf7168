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

#include <Eigen/Dense>
#include <vector>

namespace funcgrasp {

struct HdbscanResult {
  std::vector<int> labels;  // -1 = noise, clusters numbered 0..n_clusters-1
  int n_clusters = 0;
};

/// Hierarchical density-based clustering with noise. Euclidean metric,
/// excess-of-mass cluster selection, no single-root cluster. Labels are
/// assigned in ascending order of the internal cluster ids, so results are
/// deterministic for identical input.
///
/// `points` is n x d (row per point). Core distance of a point is the
/// distance to its (min_samples - 1)-th nearest other point, matching the
/// common reference implementations that count the point itself among its
/// neighbors.
HdbscanResult hdbscan(const Eigen::MatrixXd& points, int min_cluster_size,
                      int min_samples);

}  // namespace funcgrasp
