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

#include "flowmind/layout.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace flowmind {

namespace {

std::size_t distinct_rows(const FeatureMatrix<double>& m) {
  std::set<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
    rows.insert(std::move(v));
  }
  return rows.size();
}

/// Canopy seeds k-means and every feature row is replaced by its cluster mean.
/// Later rounds re-cluster the snapped rows and stop once no groups merge.
template <typename TightFn>
ClusterResult<double> cluster_to_fixed_point(FeatureMatrix<double>& features, double loose, TightFn tight_of,
                                             CanopyMetric metric, const LayoutConfig& cfg,
                                             LayoutTrace* trace) {
  ClusterResult<double> last;
  for (Eigen::Index round = 0; round <= features.rows(); ++round) {
    const double tight = tight_of(features);
    if (!(tight > 0)) break;
    const ClusterResult<double> seeds = canopy<double>(features, loose, tight, metric);
    ClusterResult<double> refined =
        kmeans<double>(features, seeds.centroids, cfg.kmeans_max_iters, cfg.kmeans_tol);
    if (trace != nullptr) trace->objective_histories.push_back(refined.objective_history);

    if (round > 0 && refined.k == distinct_rows(features)) {
      last = std::move(refined);
      break;
    }
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      const auto c = static_cast<Eigen::Index>(refined.assignments[static_cast<std::size_t>(r)]);
      features.row(r) = refined.centroids.row(c);
    }
    last = std::move(refined);
  }
  return last;
}

}  // namespace

void validate(const LayoutConfig& cfg) {
  if (!(cfg.dpi > 0)) throw InvalidConfig("layout dpi must be positive");
  if (!(cfg.stage1_t1 > 0) || !(cfg.stage2_t1 > 0)) throw InvalidConfig("canopy loose thresholds must be positive");
  if (!(cfg.golden_divisor > 0)) throw InvalidConfig("tight threshold divisor must be positive");
  if (!(cfg.kmeans_tol >= 0)) throw InvalidConfig("k-means tolerance must be non-negative");
}

double size_tight_threshold(std::span<const CenterBoxd> boxes, const LayoutConfig& cfg) {
  double m = std::numeric_limits<double>::infinity();
  for (const CenterBoxd& b : boxes) m = std::min(m, b.w * b.w + b.h * b.h);
  return m / cfg.golden_divisor;
}

ResizeResult resize_shapes(std::span<const CenterBoxd> boxes, const LayoutConfig& cfg, LayoutTrace* trace) {
  validate(cfg);
  if (boxes.empty()) throw EmptyInput("resize needs at least one shape");
  ResizeResult out;
  out.boxes.assign(boxes.begin(), boxes.end());

  FeatureMatrix<double> features(static_cast<Eigen::Index>(boxes.size()), 2);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    features(static_cast<Eigen::Index>(i), 0) = boxes[i].w;
    features(static_cast<Eigen::Index>(i), 1) = boxes[i].h;
  }
  auto tight = [&](const FeatureMatrix<double>& f) {
    return (f.col(0).array().square() + f.col(1).array().square()).minCoeff() / cfg.golden_divisor;
  };
  out.clusters = cluster_to_fixed_point(features, cfg.stage1_t1 * cfg.stage1_t1, tight,
                                        CanopyMetric::squared_euclidean, cfg, trace);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    out.boxes[i].w = features(static_cast<Eigen::Index>(i), 0);
    out.boxes[i].h = features(static_cast<Eigen::Index>(i), 1);
  }
  if (trace != nullptr) trace->size_clusters = out.clusters.k;
  return out;
}

std::vector<CenterBoxd> align_shapes(std::span<const CenterBoxd> boxes, const LayoutConfig& cfg,
                                     LayoutTrace* trace) {
  validate(cfg);
  std::vector<CenterBoxd> out(boxes.begin(), boxes.end());
  if (boxes.empty()) return out;

  const auto n = static_cast<Eigen::Index>(boxes.size());
  FeatureMatrix<double> xs(n, 1);
  FeatureMatrix<double> ys(n, 1);
  double min_w = std::numeric_limits<double>::infinity();
  double min_h = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    xs(i, 0) = boxes[static_cast<std::size_t>(i)].xc;
    ys(i, 0) = boxes[static_cast<std::size_t>(i)].yc;
    min_w = std::min(min_w, boxes[static_cast<std::size_t>(i)].w);
    min_h = std::min(min_h, boxes[static_cast<std::size_t>(i)].h);
  }
  const double tight_x = min_w / cfg.golden_divisor;
  const double tight_y = min_h / cfg.golden_divisor;
  const auto kx = cluster_to_fixed_point(xs, cfg.stage2_t1, [&](const auto&) { return tight_x; },
                                         CanopyMetric::euclidean, cfg, trace);
  const auto ky = cluster_to_fixed_point(ys, cfg.stage2_t1, [&](const auto&) { return tight_y; },
                                         CanopyMetric::euclidean, cfg, trace);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)].xc = xs(i, 0);
    out[static_cast<std::size_t>(i)].yc = ys(i, 0);
  }
  if (trace != nullptr) {
    trace->x_clusters = kx.k;
    trace->y_clusters = ky.k;
  }
  return out;
}

DiagramDoc autotypeset(const DiagramDoc& doc, const LayoutConfig& cfg, LayoutTrace* trace) {
  if (!cfg.enabled || doc.shapes.empty()) return doc;

  std::vector<CenterBoxd> boxes;
  boxes.reserve(doc.shapes.size());
  for (const ShapeNode& s : doc.shapes) boxes.push_back(s.box);

  const ResizeResult resized = resize_shapes(boxes, cfg, trace);
  const std::vector<CenterBoxd> aligned = align_shapes(resized.boxes, cfg, trace);

  DiagramDoc out = doc;
  for (std::size_t i = 0; i < out.shapes.size(); ++i) out.shapes[i].box = aligned[i];
  for (ConnectorEdge& c : out.connectors) {
    for (Binding* b : {&c.from, &c.to}) {
      auto* bound = std::get_if<Bound>(b);
      if (bound == nullptr) continue;
      const ShapeNode* shape = out.find_shape(bound->anchor.shape_id);
      if (shape == nullptr) throw Error("connector binds a missing shape");
      bound->anchor.position =
          anchor_position(shape->cls, shape_bbox(*shape), bound->anchor.site_index, bound->anchor.edge_t);
    }
  }
  return out;
}

}  // namespace flowmind
