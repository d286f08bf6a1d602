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

#ifndef FLOWMIND_LAYOUT_HPP
#define FLOWMIND_LAYOUT_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "flowmind/clustering.hpp"
#include "flowmind/diagram.hpp"

namespace flowmind {

struct LayoutConfig {
  bool enabled = true;
  double dpi = 96.0;
  /// Loose threshold of the size clustering, inches.
  double stage1_t1 = 1.0;
  /// Loose threshold of the position clustering, inches.
  double stage2_t1 = 0.8;
  /// Divisor of the tight thresholds: min(W^2 + H^2) / d for sizes, min W / d and
  /// min H / d for positions.
  double golden_divisor = 1.618;
  std::size_t kmeans_max_iters = 300;
  double kmeans_tol = 1e-6;
};

void validate(const LayoutConfig& cfg);

/// Tight size threshold in squared inches.
double size_tight_threshold(std::span<const CenterBoxd> boxes, const LayoutConfig& cfg);

/// Every k-means run performed, for inspection.
struct LayoutTrace {
  std::vector<std::vector<double>> objective_histories;
  std::size_t size_clusters = 0;
  std::size_t x_clusters = 0;
  std::size_t y_clusters = 0;
};

struct ResizeResult {
  std::vector<CenterBoxd> boxes;
  ClusterResult<double> clusters;
};

/// Canopy + k-means over (W, H); every box takes its cluster's mean size.
/// Centers are untouched. The pass is repeated on its own output until the
/// cluster structure is stable, so the result is a fixed point.
ResizeResult resize_shapes(std::span<const CenterBoxd> boxes, const LayoutConfig& cfg = {},
                           LayoutTrace* trace = nullptr);

/// Independent 1-D clustering of xc and yc; each coordinate snaps to its cluster
/// mean. Sizes are untouched.
std::vector<CenterBoxd> align_shapes(std::span<const CenterBoxd> boxes, const LayoutConfig& cfg = {},
                                     LayoutTrace* trace = nullptr);

/// Resize then align the shapes, then move bound connector endpoints onto the
/// same sites of the updated outlines. Identity when disabled.
DiagramDoc autotypeset(const DiagramDoc& doc, const LayoutConfig& cfg = {}, LayoutTrace* trace = nullptr);

}  // namespace flowmind

#endif  // FLOWMIND_LAYOUT_HPP
