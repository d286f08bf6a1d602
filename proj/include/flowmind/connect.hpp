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

#ifndef FLOWMIND_CONNECT_HPP
#define FLOWMIND_CONNECT_HPP

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flowmind/core.hpp"

namespace flowmind {

/// Standardized outline of a shape inscribed in its bbox. Polygons carry their
/// vertex cycle; circle and long_oval carry their eight candidate points in the
/// order Up, Down, Left, Right, Top-left, Bottom-left, Top-right, Bottom-right.
struct ShapeOutline {
  bool polygon = true;
  std::vector<Point2d> points;
};

// Polygon proportions, as fractions of the bbox width.
inline constexpr double kParallelogramShift = 0.25;
inline constexpr double kTrapezoidInset = 0.25;
inline constexpr double kHexagonInset = 0.25;

inline constexpr int kCurveCandidateCount = 8;

/// Relative distance difference below which two anchors count as tied.
inline constexpr double kTieTolerance = 1e-9;

ShapeOutline standard_shape_outline(ElementClass cls, const CornerBoxd& bbox);

/// A connectable site on a shape. For polygons `site_index` is the edge index and
/// `edge_t` the parameter along that edge; for curves `site_index` is the
/// candidate index and `edge_t` is 0.
struct AnchorPoint {
  ElementId shape_id;
  int site_index = 0;
  double edge_t = 0.0;
  Point2d position = Point2d::Zero();

  bool operator==(const AnchorPoint& o) const {
    return shape_id == o.shape_id && site_index == o.site_index && edge_t == o.edge_t &&
           position == o.position;
  }
};

/// Re-evaluates an anchor's position on a (possibly moved or resized) bbox.
Point2d anchor_position(ElementClass cls, const CornerBoxd& bbox, int site_index, double edge_t);

struct NearestAnchor {
  double distance = std::numeric_limits<double>::infinity();
  int site_index = 0;
  double edge_t = 0.0;
  Point2d position = Point2d::Zero();
};

/// Distance from a keypoint to a shape. Polygons use the edge foot-point rule,
/// curves only their candidate points. Sites within kTieTolerance of the
/// minimum count as tied and go to the lower site index.
NearestAnchor keypoint_to_shape_distance(const Point2d& p, ElementClass cls,
                                         const CornerBoxd& bbox);

struct Bound {
  AnchorPoint anchor;
  double distance = 0.0;

  bool operator==(const Bound&) const = default;
};

struct Free {
  Point2d position = Point2d::Zero();

  bool operator==(const Free& o) const { return position == o.position; }
};

using Binding = std::variant<Bound, Free>;

inline bool is_bound(const Binding& b) { return std::holds_alternative<Bound>(b); }

inline std::optional<ElementId> bound_shape(const Binding& b) {
  if (const auto* bound = std::get_if<Bound>(&b)) return bound->anchor.shape_id;
  return std::nullopt;
}

Point2d binding_position(const Binding& b);

struct ConnectorEdge {
  ElementId id;
  ElementClass kind = ElementClass::line;
  Binding from;
  Binding to;
  std::optional<std::string> label;
  /// Source bbox of the connector detection, used for label assignment.
  CornerBoxd bbox;

  bool operator==(const ConnectorEdge&) const = default;
};

struct ShapeRef {
  ElementId id;
  ElementClass cls = ElementClass::rectangle;
  CornerBoxd bbox;
};

struct ConnectConfig {
  double max_bind_distance = std::numeric_limits<double>::infinity();
};

/// Binds one keypoint to the globally nearest anchor (ties within kTieTolerance go
/// to the lower shape id, then the lower site index), or leaves it Free.
Binding bind_keypoint(const Point2d& p, std::span<const ShapeRef> shapes,
                      const ConnectConfig& cfg = {});

/// Resolves every connector; connector i receives id `first_id + i`.
std::vector<ConnectorEdge> resolve_connections(std::span<const ShapeRef> shapes,
                                               std::span<const Detection> connectors,
                                               const ConnectConfig& cfg = {},
                                               ElementId first_id = {});

}  // namespace flowmind

#endif  // FLOWMIND_CONNECT_HPP
