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

#include "funcgrasp/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "funcgrasp/common.hpp"

namespace funcgrasp {

namespace {

constexpr double kLambdaCap = 1e12;  // stand-in for 1/0 at duplicate points

struct MstEdge {
  int a = 0, b = 0;
  double weight = 0.0;
};

struct DendrogramNode {
  int left = -1, right = -1;  // node ids; leaves are 0..n-1
  double distance = 0.0;
  int size = 1;
};

struct CondensedEdge {
  int parent = 0;
  int child = 0;       // < n: point, >= n: cluster
  double lambda = 0.0;
  int size = 1;
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int root_a, int root_b, int new_root) {
    parent_.push_back(new_root);
    parent_[root_a] = new_root;
    parent_[root_b] = new_root;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

HdbscanResult hdbscan(const Eigen::MatrixXd& points, int min_cluster_size,
                      int min_samples) {
  const int n = static_cast<int>(points.rows());
  HdbscanResult result;
  result.labels.assign(n, -1);
  if (n == 0) return result;
  if (min_cluster_size < 2) throw ConfigError("min_cluster_size must be >= 2");
  if (min_samples < 1) throw ConfigError("min_samples must be >= 1");
  if (n < min_cluster_size) return result;  // nothing can form a cluster

  // Core distances: k-th nearest including the point itself.
  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  std::vector<double> core(n, 0.0);
  const int k_other = std::min(min_samples - 1, n - 1);
  if (k_other > 0) {
    std::vector<double> row(n - 1);
    for (int i = 0; i < n; ++i) {
      int m = 0;
      for (int j = 0; j < n; ++j)
        if (j != i) row[m++] = dist(i, j);
      std::nth_element(row.begin(), row.begin() + (k_other - 1), row.end());
      core[i] = row[k_other - 1];
    }
  }

  // Minimum spanning tree of the mutual reachability graph (Prim).
  std::vector<MstEdge> mst;
  mst.reserve(n - 1);
  {
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::max());
    std::vector<int> from(n, 0);
    in_tree[0] = true;
    for (int j = 1; j < n; ++j) {
      best[j] = std::max({core[0], core[j], dist(0, j)});
      from[j] = 0;
    }
    for (int added = 1; added < n; ++added) {
      int next = -1;
      double next_weight = std::numeric_limits<double>::max();
      for (int j = 0; j < n; ++j)
        if (!in_tree[j] && best[j] < next_weight) {
          next_weight = best[j];
          next = j;
        }
      mst.push_back({from[next], next, next_weight});
      in_tree[next] = true;
      for (int j = 0; j < n; ++j)
        if (!in_tree[j]) {
          const double w = std::max({core[next], core[j], dist(next, j)});
          if (w < best[j]) {
            best[j] = w;
            from[j] = next;
          }
        }
    }
  }
  std::stable_sort(mst.begin(), mst.end(),
                   [](const MstEdge& a, const MstEdge& b) { return a.weight < b.weight; });

  // Single-linkage dendrogram; internal nodes n..2n-2 in merge order.
  std::vector<DendrogramNode> nodes(2 * n - 1);
  {
    UnionFind uf(n);
    int next_node = n;
    int next_uf = n;
    std::vector<int> uf_to_node(n);
    std::iota(uf_to_node.begin(), uf_to_node.end(), 0);
    for (const MstEdge& edge : mst) {
      const int ra = uf.find(edge.a), rb = uf.find(edge.b);
      DendrogramNode& node = nodes[next_node];
      node.left = uf_to_node[ra];
      node.right = uf_to_node[rb];
      node.distance = edge.weight;
      node.size = nodes[node.left].size + nodes[node.right].size;
      uf.unite(ra, rb, next_uf);
      uf_to_node.push_back(next_node);
      ++next_uf;
      ++next_node;
    }
  }
  const int root = 2 * n - 2;

  // Condense: clusters keep their identity through splits that only shed
  // undersized children; cluster ids start at n.
  std::vector<CondensedEdge> condensed;
  std::vector<int> cluster_parent;  // per cluster id - n
  int next_cluster = n;
  {
    const auto leaves_under = [&](int start, std::vector<int>& out) {
      std::vector<int> stack{start};
      while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        if (x < n) {
          out.push_back(x);
        } else {
          stack.push_back(nodes[x].left);
          stack.push_back(nodes[x].right);
        }
      }
    };

    struct Item {
      int node;
      int cluster;
    };
    std::vector<Item> stack;
    const int root_cluster = next_cluster++;
    cluster_parent.push_back(-1);
    if (root >= n) {
      stack.push_back({root, root_cluster});
    }
    while (!stack.empty()) {
      const auto [node_id, cluster] = stack.back();
      stack.pop_back();
      const DendrogramNode& node = nodes[node_id];
      const double lambda =
          node.distance > 0.0 ? std::min(1.0 / node.distance, kLambdaCap) : kLambdaCap;
      const int left = node.left, right = node.right;
      const int left_size = left < n ? 1 : nodes[left].size;
      const int right_size = right < n ? 1 : nodes[right].size;

      const bool left_big = left_size >= min_cluster_size;
      const bool right_big = right_size >= min_cluster_size;

      if (left_big && right_big) {
        const int cl = next_cluster++;
        cluster_parent.push_back(cluster);
        condensed.push_back({cluster, cl, lambda, left_size});
        stack.push_back({left, cl});
        const int cr = next_cluster++;
        cluster_parent.push_back(cluster);
        condensed.push_back({cluster, cr, lambda, right_size});
        stack.push_back({right, cr});
      } else if (!left_big && !right_big) {
        std::vector<int> leaves;
        leaves_under(left, leaves);
        leaves_under(right, leaves);
        for (int leaf : leaves) condensed.push_back({cluster, leaf, lambda, 1});
      } else {
        // One undersized child sheds its points; the cluster continues
        // through the big child (always internal since mcs >= 2).
        const int small = left_big ? right : left;
        const int big = left_big ? left : right;
        std::vector<int> leaves;
        leaves_under(small, leaves);
        for (int leaf : leaves) condensed.push_back({cluster, leaf, lambda, 1});
        stack.push_back({big, cluster});
      }
    }
  }
  const int n_condensed = next_cluster - n;
  if (n_condensed <= 1) return result;  // only the root: everything is noise

  // Cluster stability: sum over children of (lambda - birth) * size.
  std::vector<double> birth(n_condensed, 0.0);
  for (const CondensedEdge& edge : condensed)
    if (edge.child >= n) birth[edge.child - n] = edge.lambda;
  std::vector<double> stability(n_condensed, 0.0);
  for (const CondensedEdge& edge : condensed)
    stability[edge.parent - n] += (edge.lambda - birth[edge.parent - n]) * edge.size;

  std::vector<std::vector<int>> children(n_condensed);
  for (int c = 1; c < n_condensed; ++c) children[cluster_parent[c] - n].push_back(c);

  // Excess-of-mass selection, deepest clusters first; the root is never
  // selected.
  std::vector<bool> is_cluster(n_condensed, true);
  is_cluster[0] = false;
  for (int c = n_condensed - 1; c >= 1; --c) {
    double subtree = 0.0;
    for (int child : children[c]) subtree += stability[child];
    if (!children[c].empty() && subtree > stability[c]) {
      is_cluster[c] = false;
      stability[c] = subtree;
    } else if (is_cluster[c]) {
      // Deselect every descendant.
      std::vector<int> stack(children[c]);
      while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        is_cluster[x] = false;
        for (int child : children[x]) stack.push_back(child);
      }
    }
  }

  std::vector<int> label_of_cluster(n_condensed, -1);
  for (int c = 0; c < n_condensed; ++c)
    if (is_cluster[c]) label_of_cluster[c] = result.n_clusters++;

  // Each point belongs to the nearest selected ancestor of the cluster it
  // fell out of.
  std::vector<int> point_cluster(n, 0);  // root by default
  for (const CondensedEdge& edge : condensed)
    if (edge.child < n) point_cluster[edge.child] = edge.parent - n;
  for (int i = 0; i < n; ++i) {
    int c = point_cluster[i];
    while (c >= 0 && !is_cluster[c]) c = c == 0 ? -1 : cluster_parent[c] - n;
    result.labels[i] = c >= 0 ? label_of_cluster[c] : -1;
  }
  return result;
}

}  // namespace funcgrasp
