/**
 * Copyright 2026 The Flowmind Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FLOWMIND_CLUSTERING_HPP
#define FLOWMIND_CLUSTERING_HPP

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "flowmind/core.hpp"

namespace flowmind {

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class InvalidK : public Error {
 public:
  using Error::Error;
};

/// One observation per row.
template <typename Scalar>
using FeatureMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct ClusterResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  /// One centroid per row.
  FeatureMatrix<Scalar> centroids;
  /// Canopy only: members within the loose threshold of each center.
  std::vector<std::vector<std::size_t>> canopies;
  /// K-means only: objective after each assignment step.
  std::vector<Scalar> objective_history;
  std::size_t iterations = 0;
};

enum class CanopyMetric {
  euclidean,
  /// Thresholds are compared against squared distances.
  squared_euclidean,
};

namespace detail {

template <typename Scalar>
std::size_t nearest_row(const FeatureMatrix<Scalar>& centers, const auto& row, Scalar* dist2 = nullptr) {
  std::size_t best = 0;
  Scalar best_d = (centers.row(0) - row).squaredNorm();
  for (Eigen::Index c = 1; c < centers.rows(); ++c) {
    const Scalar d = (centers.row(c) - row).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  if (dist2 != nullptr) *dist2 = best_d;
  return best;
}

template <typename Scalar>
std::vector<std::size_t> lexicographic_order(const FeatureMatrix<Scalar>& points) {
  std::vector<std::size_t> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      const Scalar va = points(static_cast<Eigen::Index>(a), c);
      const Scalar vb = points(static_cast<Eigen::Index>(b), c);
      if (va != vb) return va < vb;
    }
    return false;
  });
  return order;
}

}  // namespace detail

/// Deterministic Canopy pre-clustering. Points are visited in lexicographic
/// order (ties by row index); each unremoved point becomes a center, points
/// closer than `loose` join its canopy and points closer than `tight` are
/// removed. Every point is finally assigned to its nearest center.
template <typename Scalar>
ClusterResult<Scalar> canopy(const FeatureMatrix<Scalar>& points, Scalar loose, Scalar tight,
                             CanopyMetric metric = CanopyMetric::euclidean) {
  if (points.rows() == 0) throw EmptyInput("canopy needs at least one point");
  if (!(loose > 0) || !(tight > 0)) throw Error("canopy thresholds must be positive");

  auto distance = [&](Eigen::Index a, Eigen::Index b) {
    const Scalar d2 = (points.row(a) - points.row(b)).squaredNorm();
    if (metric == CanopyMetric::squared_euclidean) return d2;
    using std::sqrt;
    return sqrt(d2);
  };

  const std::vector<std::size_t> order = detail::lexicographic_order(points);
  std::vector<bool> removed(order.size(), false);
  std::vector<std::size_t> centers;
  ClusterResult<Scalar> result;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t c = order[pos];
    if (removed[c]) continue;
    removed[c] = true;
    centers.push_back(c);
    std::vector<std::size_t> members{c};
    for (std::size_t q = pos + 1; q < order.size(); ++q) {
      const std::size_t j = order[q];
      if (removed[j]) continue;
      const Scalar d = distance(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
      if (d < loose) members.push_back(j);
      if (d < tight) removed[j] = true;
    }
    result.canopies.push_back(std::move(members));
  }

  result.k = centers.size();
  result.centroids.resize(static_cast<Eigen::Index>(centers.size()), points.cols());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    result.centroids.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(centers[i]));
  }
  result.assignments.resize(order.size());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    result.assignments[static_cast<std::size_t>(r)] = detail::nearest_row(result.centroids, points.row(r));
  }
  return result;
}

/// Lloyd iterations on the squared Euclidean objective, seeded with `initial`
/// (one centroid per row). Stops once no centroid moves by `tol` or more, or
/// after `max_iters` iterations. An emptied cluster is re-seeded with the point
/// farthest from its current centroid.
template <typename Scalar>
ClusterResult<Scalar> kmeans(const FeatureMatrix<Scalar>& points, const FeatureMatrix<Scalar>& initial,
                             std::size_t max_iters = 300, Scalar tol = Scalar(1e-6)) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto k = static_cast<std::size_t>(initial.rows());
  if (k < 1 || k > n) throw InvalidK("k must satisfy 1 <= k <= n");
  if (initial.cols() != points.cols()) throw InvalidK("centroid dimension does not match points");

  ClusterResult<Scalar> result;
  result.k = k;
  result.centroids = initial;
  result.assignments.assign(n, 0);
  std::vector<Scalar> dist2(n, Scalar(0));

  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      result.assignments[i] =
          detail::nearest_row(result.centroids, points.row(static_cast<Eigen::Index>(i)), &dist2[i]);
      ++sizes[result.assignments[i]];
    }

    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[result.assignments[i]] < 2) continue;
        if (far == n || dist2[i] > dist2[far]) far = i;
      }
      if (far == n) break;
      --sizes[result.assignments[far]];
      result.assignments[far] = c;
      sizes[c] = 1;
      dist2[far] = Scalar(0);
      result.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
    }

    Scalar objective(0);
    for (Scalar d : dist2) objective += d;
#ifndef NDEBUG
    if (!result.objective_history.empty()) {
      const Scalar prev = result.objective_history.back();
      assert(objective <= prev + Scalar(1e-9) * (Scalar(1) + prev));
    }
#endif
    result.objective_history.push_back(objective);
    result.iterations = iter + 1;

    FeatureMatrix<Scalar> next = FeatureMatrix<Scalar>::Zero(static_cast<Eigen::Index>(k), points.cols());
    for (std::size_t i = 0; i < n; ++i) {
      next.row(static_cast<Eigen::Index>(result.assignments[i])) += points.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) next.row(static_cast<Eigen::Index>(c)) = result.centroids.row(static_cast<Eigen::Index>(c));
      else next.row(static_cast<Eigen::Index>(c)) /= static_cast<Scalar>(sizes[c]);
    }
    const Scalar movement = (next - result.centroids).rowwise().norm().maxCoeff();
    result.centroids = std::move(next);
    if (movement < tol) break;
  }
  return result;
}

/// Sum of squared distances from each point to its assigned centroid.
template <typename Scalar>
Scalar kmeans_objective(const FeatureMatrix<Scalar>& points, const ClusterResult<Scalar>& r) {
  Scalar total(0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - r.centroids.row(static_cast<Eigen::Index>(r.assignments[static_cast<std::size_t>(i)])))
                 .squaredNorm();
  }
  return total;
}

}  // namespace flowmind

#endif  // FLOWMIND_CLUSTERING_HPP
