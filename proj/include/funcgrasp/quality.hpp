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
#include <string>
#include <vector>

#include "funcgrasp/hand.hpp"
#include "funcgrasp/mesh.hpp"

namespace funcgrasp {

using Wrench = Eigen::Matrix<double, 6, 1>;  // force; torque / lambda

struct FrictionParams {
  double mu = 0.8;
  int cone_edges = 8;
  double patch_radius_mm = 5.0;  // characteristic soft-finger patch radius
  double torsion_scale = 0.4;    // torsion_coeff = scale * mu * patch_radius

  double torsion_coeff() const { return torsion_scale * mu * patch_radius_mm; }
};

/// Soft-finger contact: normal force, tangential friction, torsion about the
/// normal. The normal points into the object.
struct Contact {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // unit, inward
  double mu = 0.8;
  double torsion_coeff = 1.6;
  int cone_edges = 8;
  bool functional = false;
};

struct WrenchSet {
  std::vector<Wrench> wrenches;
  Eigen::Vector3d torque_origin = Eigen::Vector3d::Zero();
  double lambda_mm = 1.0;  // torque scale

  int affine_rank() const;
};

/// Linearized friction cone edges f_k = n + mu (cos t_k u + sin t_k v), each
/// with torque ((p - origin) x f_k) / lambda, plus the two pure-torsion
/// wrenches +-(0, e n / lambda). mu = 0 degenerates to the single normal
/// wrench.
std::vector<Wrench> contact_wrenches(const Contact& contact,
                                     const Eigen::Vector3d& torque_origin,
                                     double lambda_mm);

WrenchSet build_wrench_set(const std::vector<Contact>& contacts,
                           const Eigen::Vector3d& torque_origin, double lambda_mm);

struct EpsilonOptions {
  int directions = 65536;  // deterministic low-discrepancy S^5 sample
  int refine_starts = 4;   // Nelder-Mead polish from the best separated starts
  int refine_iters = 400;
};

/// Radius of the largest origin-centered ball inside conv(wrenches + {0}):
/// minimum of the support function over unit directions, clamped at 0.
/// Estimated by direction sampling plus local simplex refinement.
double epsilon_quality(const WrenchSet& set, const EpsilonOptions& opts = {});

struct NuEstimate {
  double nu = 0.0;
  double standard_error = 0.0;
};

/// 6-D volume of conv(wrenches + {0}) by Monte Carlo over the bounding box
/// with an exact LP membership test per sample. Deterministic for a given
/// seed; chunked so worker count does not change the result.
NuEstimate nu_quality(const WrenchSet& set, int samples = 1000000,
                      std::uint64_t seed = 777, int workers = 1);

struct QualityReport {
  double epsilon = 0.0;
  double nu = 0.0;
  double nu_standard_error = 0.0;
  bool force_closure = false;  // epsilon > 1e-9
  std::string method = "direction-sampling";
};

struct QualityOptions {
  EpsilonOptions epsilon;
  int nu_samples = 1000000;
  std::uint64_t nu_seed = 777;
  int workers = 1;
};

QualityReport evaluate_quality(const std::vector<Contact>& contacts,
                               const Eigen::Vector3d& torque_origin, double lambda_mm,
                               const QualityOptions& opts = {});

/// Virtual contacts of the closed posture within threshold of the surface,
/// projected onto it with inward surface normals.
std::vector<Contact> detect_contacts(const Eigen::VectorXd& q_closed,
                                     const HandModel& hand, const Transform& wrist,
                                     const MeshQuery& object_query,
                                     const FrictionParams& friction,
                                     double threshold_mm = 0.5);

/// Deterministic low-discrepancy directions on S^5 (additive recurrence
/// mapped through the inverse normal CDF). Exposed for the cross-check tests.
std::vector<Wrench> sphere_directions(int count);

}  // namespace funcgrasp
