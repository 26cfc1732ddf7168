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

#include "funcgrasp/quality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "funcgrasp/common.hpp"
#include "funcgrasp/energy.hpp"

namespace funcgrasp {

namespace {

void tangent_basis(const Eigen::Vector3d& n, Eigen::Vector3d& u, Eigen::Vector3d& v) {
  const Eigen::Vector3d helper =
      std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  u = helper.cross(n).normalized();
  v = n.cross(u);
}

/// Inverse standard normal CDF (Acklam's rational approximation).
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425, p_high = 1.0 - 0.02425;
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  double q, r;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= p_high) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

std::vector<Wrench> sphere_directions(int count) {
  // Additive recurrence with the generalized golden ratio for d = 6.
  double phi = 1.2;
  for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / 7.0);
  std::array<double, 6> alpha;
  double inv = 1.0 / phi;
  for (int j = 0; j < 6; ++j) {
    alpha[j] = inv;
    inv /= phi;
  }
  std::vector<Wrench> directions;
  directions.reserve(count);
  std::array<double, 6> x{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  for (int i = 0; i < count; ++i) {
    Wrench w;
    for (int j = 0; j < 6; ++j) {
      x[j] += alpha[j];
      x[j] -= std::floor(x[j]);
      w[j] = inverse_normal_cdf(x[j]);
    }
    const double norm = w.norm();
    if (norm < 1e-9) {
      w.setZero();
      w[0] = 1.0;
    } else {
      w /= norm;
    }
    directions.push_back(w);
  }
  return directions;
}

std::vector<Wrench> contact_wrenches(const Contact& contact,
                                     const Eigen::Vector3d& torque_origin,
                                     double lambda_mm) {
  if (contact.mu < 0.0) throw ConfigError("friction coefficient must be >= 0");
  if (contact.cone_edges < 3) throw ConfigError("cone_edges must be >= 3");
  if (!(lambda_mm > 0.0)) throw ConfigError("torque scale lambda must be positive");

  const Eigen::Vector3d n = contact.normal.normalized();
  const Eigen::Vector3d arm = contact.position - torque_origin;
  std::vector<Wrench> wrenches;

  const auto emit_force = [&](const Eigen::Vector3d& f) {
    Wrench w;
    w.head<3>() = f;
    w.tail<3>() = arm.cross(f) / lambda_mm;
    wrenches.push_back(w);
  };

  if (contact.mu == 0.0) {
    emit_force(n);
  } else {
    Eigen::Vector3d u, v;
    tangent_basis(n, u, v);
    for (int k = 0; k < contact.cone_edges; ++k) {
      const double theta = 2.0 * M_PI * k / contact.cone_edges;
      emit_force(n + contact.mu * (std::cos(theta) * u + std::sin(theta) * v));
    }
  }

  if (contact.torsion_coeff > 0.0) {
    Wrench torsion = Wrench::Zero();
    torsion.tail<3>() = contact.torsion_coeff * n / lambda_mm;
    wrenches.push_back(torsion);
    wrenches.push_back(-torsion);
  }
  return wrenches;
}

WrenchSet build_wrench_set(const std::vector<Contact>& contacts,
                           const Eigen::Vector3d& torque_origin, double lambda_mm) {
  WrenchSet set;
  set.torque_origin = torque_origin;
  set.lambda_mm = lambda_mm;
  for (const Contact& contact : contacts) {
    const std::vector<Wrench> local = contact_wrenches(contact, torque_origin, lambda_mm);
    set.wrenches.insert(set.wrenches.end(), local.begin(), local.end());
  }
  return set;
}

int WrenchSet::affine_rank() const {
  if (wrenches.size() < 2) return 0;
  Eigen::MatrixXd diffs(6, static_cast<int>(wrenches.size()) - 1);
  for (size_t i = 1; i < wrenches.size(); ++i)
    diffs.col(static_cast<int>(i) - 1) = wrenches[i] - wrenches[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs);
  const double threshold = 1e-9 * std::max(1.0, svd.singularValues()[0]);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > threshold) ++rank;
  return rank;
}

namespace {

double support(const std::vector<Wrench>& wrenches, const Wrench& direction) {
  double best = std::numeric_limits<double>::lowest();
  for (const Wrench& w : wrenches) best = std::max(best, w.dot(direction));
  return best;
}

/// Nelder-Mead on the tangent chart x -> normalize(u0 + B x).
double refine_direction(const std::vector<Wrench>& wrenches, const Wrench& start,
                        int iters) {
  Eigen::Matrix<double, 6, 5> basis;
  {
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Identity();
    m.col(0) = start;
    const Eigen::HouseholderQR<Eigen::Matrix<double, 6, 6>> qr(m);
    const Eigen::Matrix<double, 6, 6> q = qr.householderQ();
    basis = q.rightCols<5>();
  }
  using Point = Eigen::Matrix<double, 5, 1>;
  const auto value = [&](const Point& x) {
    Wrench u = start + basis * x;
    const double n = u.norm();
    if (n < 1e-12) return std::numeric_limits<double>::max();
    return support(wrenches, u / n);
  };

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  std::array<std::pair<double, Point>, 6> simplex;
  simplex[0] = {value(Point::Zero()), Point::Zero()};
  for (int i = 0; i < 5; ++i) {
    Point x = Point::Zero();
    x[i] = 0.1;
    simplex[i + 1] = {value(x), x};
  }

  for (int iter = 0; iter < iters; ++iter) {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if ((simplex[5].second - simplex[0].second).norm() < 1e-10) break;

    Point centroid = Point::Zero();
    for (int i = 0; i < 5; ++i) centroid += simplex[i].second;
    centroid /= 5.0;

    const Point reflected = centroid + kReflect * (centroid - simplex[5].second);
    const double f_reflected = value(reflected);
    if (f_reflected < simplex[0].first) {
      const Point expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = value(expanded);
      simplex[5] = f_expanded < f_reflected ? std::make_pair(f_expanded, expanded)
                                            : std::make_pair(f_reflected, reflected);
    } else if (f_reflected < simplex[4].first) {
      simplex[5] = {f_reflected, reflected};
    } else {
      const Point contracted = centroid + kContract * (simplex[5].second - centroid);
      const double f_contracted = value(contracted);
      if (f_contracted < simplex[5].first) {
        simplex[5] = {f_contracted, contracted};
      } else {
        for (int i = 1; i < 6; ++i) {
          simplex[i].second =
              simplex[0].second + kShrink * (simplex[i].second - simplex[0].second);
          simplex[i].first = value(simplex[i].second);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return simplex[0].first;
}

}  // namespace

double epsilon_quality(const WrenchSet& set, const EpsilonOptions& opts) {
  if (set.wrenches.empty()) throw ConfigError("epsilon quality needs a non-empty wrench set");
  if (set.wrenches.size() < 7 || set.affine_rank() < 6) return 0.0;

  const std::vector<Wrench> directions = sphere_directions(opts.directions);
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(directions.size());
  for (size_t i = 0; i < directions.size(); ++i)
    ranked.emplace_back(support(set.wrenches, directions[i]), static_cast<int>(i));
  std::sort(ranked.begin(), ranked.end());

  double best = ranked[0].first;
  if (best <= 0.0) return 0.0;

  // Polish from a few well-separated low-support directions.
  std::vector<int> starts;
  for (const auto& [h, index] : ranked) {
    bool separated = true;
    for (int chosen : starts)
      if (directions[chosen].dot(directions[index]) > 0.9) {
        separated = false;
        break;
      }
    if (separated) starts.push_back(index);
    if (static_cast<int>(starts.size()) >= opts.refine_starts) break;
  }
  for (int index : starts)
    best = std::min(best, refine_direction(set.wrenches, directions[index],
                                           opts.refine_iters));
  return std::max(best, 0.0);
}

namespace {

/// Phase-1 simplex (Bland's rule) deciding x in conv(points). Reused across
/// samples: the tableau is preallocated once per worker.
class MembershipTest {
 public:
  explicit MembershipTest(const std::vector<Wrench>& points)
      : n_points_(static_cast<int>(points.size()) + 1),
        columns_(n_points_ + 7),
        tableau_(8, columns_ + 1),
        basis_(7) {
    points_.resize(7, n_points_);
    for (int i = 0; i < n_points_ - 1; ++i) {
      points_.col(i).head<6>() = points[i];
      points_(6, i) = 1.0;
    }
    points_.col(n_points_ - 1).setZero();  // the origin vertex
    points_(6, n_points_ - 1) = 1.0;
  }

  bool contains(const Wrench& x) {
    Eigen::Matrix<double, 7, 1> rhs;
    rhs.head<6>() = x;
    rhs[6] = 1.0;

    tableau_.setZero();
    for (int row = 0; row < 7; ++row) {
      const double sign = rhs[row] < 0.0 ? -1.0 : 1.0;
      for (int col = 0; col < n_points_; ++col)
        tableau_(row, col) = sign * points_(row, col);
      tableau_(row, n_points_ + row) = 1.0;  // artificial
      tableau_(row, columns_) = sign * rhs[row];
      basis_[row] = n_points_ + row;
    }
    // Phase-1 objective: minimize the artificial sum; reduced costs start as
    // the negated column sums.
    for (int col = 0; col <= columns_; ++col) {
      double sum = 0.0;
      for (int row = 0; row < 7; ++row) sum += tableau_(row, col);
      tableau_(7, col) = col < n_points_ ? -sum : 0.0;
      if (col == columns_) tableau_(7, col) = -sum;
    }

    constexpr double kEps = 1e-9;
    for (int pivots = 0; pivots < 2000; ++pivots) {
      int entering = -1;
      for (int col = 0; col < columns_; ++col)
        if (tableau_(7, col) < -kEps) {
          entering = col;
          break;  // Bland: lowest index
        }
      if (entering < 0) break;

      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::max();
      for (int row = 0; row < 7; ++row) {
        const double a = tableau_(row, entering);
        if (a > kEps) {
          const double ratio = tableau_(row, columns_) / a;
          if (ratio < best_ratio - kEps ||
              (ratio < best_ratio + kEps && leaving >= 0 &&
               basis_[row] < basis_[leaving])) {
            best_ratio = ratio;
            leaving = row;
          }
        }
      }
      if (leaving < 0) break;  // unbounded: cannot happen in phase 1

      const double pivot = tableau_(leaving, entering);
      tableau_.row(leaving) /= pivot;
      for (int row = 0; row < 8; ++row) {
        if (row == leaving) continue;
        const double factor = tableau_(row, entering);
        if (factor != 0.0) tableau_.row(row) -= factor * tableau_.row(leaving);
      }
      basis_[leaving] = entering;
    }
    return -tableau_(7, columns_) < 1e-7;  // objective value ~ 0 => feasible
  }

 private:
  int n_points_;
  int columns_;
  Eigen::MatrixXd points_;
  Eigen::MatrixXd tableau_;
  std::vector<int> basis_;
};

}  // namespace

NuEstimate nu_quality(const WrenchSet& set, int samples, std::uint64_t seed, int workers) {
  NuEstimate estimate;
  if (set.wrenches.empty()) throw ConfigError("nu quality needs a non-empty wrench set");
  if (set.affine_rank() < 6) return estimate;

  Wrench lo = Wrench::Zero(), hi = Wrench::Zero();  // box includes the origin
  for (const Wrench& w : set.wrenches) {
    lo = lo.cwiseMin(w);
    hi = hi.cwiseMax(w);
  }
  double box_volume = 1.0;
  for (int k = 0; k < 6; ++k) box_volume *= hi[k] - lo[k];
  if (!(box_volume > 0.0)) return estimate;

  // Cheap outside certificates: cached support values along a direction set.
  const std::vector<Wrench> filters = sphere_directions(128);
  std::vector<double> filter_support(filters.size());
  for (size_t i = 0; i < filters.size(); ++i)
    filter_support[i] = std::max(0.0, support(set.wrenches, filters[i]));

  constexpr int kChunk = 4096;
  const int n_chunks = (samples + kChunk - 1) / kChunk;
  const Rng base(seed);

  std::vector<long> chunk_hits(n_chunks, 0);
  const auto run_chunk = [&](int chunk) {
    Rng rng = base.derive(static_cast<std::uint64_t>(chunk));
    MembershipTest membership(set.wrenches);
    const int begin = chunk * kChunk;
    const int end = std::min(samples, begin + kChunk);
    long hits = 0;
    for (int s = begin; s < end; ++s) {
      Wrench x;
      for (int k = 0; k < 6; ++k) x[k] = rng.uniform(lo[k], hi[k]);
      bool outside = false;
      for (size_t f = 0; f < filters.size(); ++f)
        if (x.dot(filters[f]) > filter_support[f] + 1e-12) {
          outside = true;
          break;
        }
      if (!outside && membership.contains(x)) ++hits;
    }
    chunk_hits[chunk] = hits;
  };

  int n_workers = workers <= 0 ? std::max(1u, std::thread::hardware_concurrency())
                               : workers;
  n_workers = std::min(n_workers, n_chunks);
  if (n_workers <= 1) {
    for (int chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<int> cursor{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (int c = cursor.fetch_add(1); c < n_chunks; c = cursor.fetch_add(1))
          run_chunk(c);
      });
    for (std::thread& t : pool) t.join();
  }

  long hits = 0;
  for (long h : chunk_hits) hits += h;
  const double fraction = static_cast<double>(hits) / samples;
  estimate.nu = box_volume * fraction;
  estimate.standard_error =
      box_volume * std::sqrt(fraction * (1.0 - fraction) / samples);
  return estimate;
}

QualityReport evaluate_quality(const std::vector<Contact>& contacts,
                               const Eigen::Vector3d& torque_origin, double lambda_mm,
                               const QualityOptions& opts) {
  QualityReport report;
  if (contacts.empty()) return report;  // epsilon = 0, no closure
  const WrenchSet set = build_wrench_set(contacts, torque_origin, lambda_mm);
  report.epsilon = epsilon_quality(set, opts.epsilon);
  report.force_closure = report.epsilon > 1e-9;
  const NuEstimate nu = nu_quality(set, opts.nu_samples, opts.nu_seed, opts.workers);
  report.nu = nu.nu;
  report.nu_standard_error = nu.standard_error;
  return report;
}

std::vector<Contact> detect_contacts(const Eigen::VectorXd& q_closed,
                                     const HandModel& hand, const Transform& wrist,
                                     const MeshQuery& object_query,
                                     const FrictionParams& friction,
                                     double threshold_mm) {
  std::vector<Contact> contacts;
  const std::vector<WorldContact> world = world_contacts(hand, wrist, q_closed);
  for (const WorldContact& wc : world) {
    const ClosestHit hit = object_query.closest_point(wc.position);
    if (hit.distance >= threshold_mm) continue;
    Contact contact;
    contact.position = hit.point;
    contact.normal = -hit.normal;  // inward
    contact.mu = friction.mu;
    contact.cone_edges = friction.cone_edges;
    contact.torsion_coeff = friction.torsion_coeff();
    contact.functional = wc.functional;
    contacts.push_back(contact);
  }
  return contacts;
}

}  // namespace funcgrasp
